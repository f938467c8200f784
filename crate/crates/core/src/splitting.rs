//! Free products `A * B` and amalgamated products `A *_C B` with
//! alternating-syllable normal forms.
//!
//! An element is stored as `r1 r2 ... rk c` where each `ri` is a nontrivial
//! canonical left-coset representative of `C` in its factor, consecutive
//! syllables come from different factors, and `c` lies in `C` (kept as an
//! element of `A`). Right multiplication by a factor element touches only
//! the last syllable and the tail, so normal forms are built letter by
//! letter without cascades.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{BaseGroup, Elem, OracleDecl};
use crate::subgroup::{CWord, DesignatedSubgroup};
use crate::word::{is_valid_name, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn idx(self) -> usize {
        match self {
            Side::A => 0,
            Side::B => 1,
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplittingKind {
    FreeProduct,
    Amalgam,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syllable {
    pub side: Side,
    pub elem: Elem,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NormalForm {
    pub syllables: Vec<Syllable>,
    /// Element of the edge group, expressed in factor `A`.
    pub tail: Elem,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Elementarity {
    EllipticAction,
    LinearAction,
    NonElementary,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementarityVerdict {
    pub verdict: Elementarity,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[allow(non_snake_case)]
struct EdgeDoc {
    generators: Vec<String>,
    into_A: Vec<Word>,
    into_B: Vec<Word>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct SpecDoc {
    kind: String,
    factors: Vec<OracleDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edge: Option<EdgeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    declared_k: Option<u64>,
}

/// Where a generator name lives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenRef {
    Factor(Side, usize),
    Edge(usize),
}

#[derive(Clone, Debug)]
pub struct SplittingSpec {
    kind: SplittingKind,
    factors: [BaseGroup; 2],
    edge_gens: Vec<String>,
    edge_words: [Vec<Word>; 2],
    edge: [DesignatedSubgroup; 2],
    declared_k: Option<u64>,
}

impl SplittingSpec {
    pub fn free_product(a: BaseGroup, b: BaseGroup) -> Result<Self> {
        Self::build(SplittingKind::FreeProduct, a, b, Vec::new(), [Vec::new(), Vec::new()], None)
    }

    pub fn amalgam(
        a: BaseGroup,
        b: BaseGroup,
        edge_gens: &[&str],
        into_a: Vec<Word>,
        into_b: Vec<Word>,
    ) -> Result<Self> {
        Self::build(
            SplittingKind::Amalgam,
            a,
            b,
            edge_gens.iter().map(|s| s.to_string()).collect(),
            [into_a, into_b],
            None,
        )
    }

    pub fn with_declared_k(mut self, k: Option<u64>) -> Self {
        self.declared_k = k;
        self
    }

    fn build(
        kind: SplittingKind,
        a: BaseGroup,
        b: BaseGroup,
        edge_gens: Vec<String>,
        edge_words: [Vec<Word>; 2],
        declared_k: Option<u64>,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        for name in a.gens().iter().chain(b.gens()).chain(&edge_gens) {
            if !is_valid_name(name) {
                return Err(Error::InvalidGeneratorName(name.clone()));
            }
            if !seen.insert(name.clone()) {
                return Err(Error::DuplicateGenerator(name.clone()));
            }
        }
        if kind == SplittingKind::Amalgam && edge_gens.is_empty() {
            return Err(Error::InvalidSplitting("amalgam needs edge generators".into()));
        }
        for (side, words) in edge_words.iter().enumerate() {
            if words.len() != edge_gens.len() {
                return Err(Error::InvalidSplitting(format!(
                    "edge has {} generators but into_{} lists {} images",
                    edge_gens.len(),
                    if side == 0 { "A" } else { "B" },
                    words.len()
                )));
            }
        }
        let images_a = edge_words[0].iter().map(|w| a.canonical(w)).collect::<Result<Vec<_>>>()?;
        let images_b = edge_words[1].iter().map(|w| b.canonical(w)).collect::<Result<Vec<_>>>()?;
        let edge = [
            DesignatedSubgroup::new(&a, images_a)?,
            DesignatedSubgroup::new(&b, images_b)?,
        ];
        let spec = SplittingSpec {
            kind,
            factors: [a, b],
            edge_gens,
            edge_words,
            edge,
            declared_k,
        };
        spec.check_edge_isomorphism()?;
        Ok(spec)
    }

    /// The two embeddings must agree on which edge words are trivial. Checked
    /// on every word of length at most 4 in the edge generators.
    fn check_edge_isomorphism(&self) -> Result<()> {
        let n = self.edge_gens.len();
        let mut frontier: Vec<CWord> = vec![Vec::new()];
        for _ in 0..4 {
            let mut next = Vec::new();
            for w in &frontier {
                for i in 0..n {
                    for e in [1i64, -1] {
                        let mut w2 = w.clone();
                        crate::subgroup::push_cword(&mut w2, i, BigInt::from(e));
                        let ta = self.factors[0].is_identity(&self.edge[0].eval(&w2));
                        let tb = self.factors[1].is_identity(&self.edge[1].eval(&w2));
                        if ta != tb {
                            return Err(Error::InvalidSplitting(format!(
                                "edge embeddings disagree on a word of length <= 4 (trivial in {} only)",
                                if ta { "A" } else { "B" }
                            )));
                        }
                        next.push(w2);
                    }
                }
            }
            frontier = next;
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: SpecDoc = serde_json::from_str(s)?;
        let kind = match doc.kind.as_str() {
            "free_product" => SplittingKind::FreeProduct,
            "amalgam" => SplittingKind::Amalgam,
            "hnn" | "hnn_extension" => return Err(Error::HnnUnsupported),
            other => return Err(Error::InvalidSplitting(format!("unknown kind `{other}`"))),
        };
        if doc.factors.len() != 2 {
            return Err(Error::InvalidSplitting(format!(
                "expected 2 factors, got {}",
                doc.factors.len()
            )));
        }
        let a = BaseGroup::from_decl(&doc.factors[0])?;
        let b = BaseGroup::from_decl(&doc.factors[1])?;
        let (gens, words) = match (kind, doc.edge) {
            (SplittingKind::FreeProduct, None) => (Vec::new(), [Vec::new(), Vec::new()]),
            (SplittingKind::FreeProduct, Some(e)) if e.generators.is_empty() => {
                (Vec::new(), [Vec::new(), Vec::new()])
            }
            (SplittingKind::FreeProduct, Some(_)) => {
                return Err(Error::InvalidSplitting("free products take no edge group".into()))
            }
            (SplittingKind::Amalgam, None) => {
                return Err(Error::InvalidSplitting("amalgam needs an edge group".into()))
            }
            (SplittingKind::Amalgam, Some(e)) => (e.generators, [e.into_A, e.into_B]),
        };
        Self::build(kind, a, b, gens, words, doc.declared_k)
    }

    pub fn to_json(&self) -> String {
        let doc = SpecDoc {
            kind: match self.kind {
                SplittingKind::FreeProduct => "free_product".into(),
                SplittingKind::Amalgam => "amalgam".into(),
            },
            factors: vec![self.factors[0].to_decl(), self.factors[1].to_decl()],
            edge: match self.kind {
                SplittingKind::FreeProduct => None,
                SplittingKind::Amalgam => Some(EdgeDoc {
                    generators: self.edge_gens.clone(),
                    into_A: self.edge_words[0].clone(),
                    into_B: self.edge_words[1].clone(),
                }),
            },
            declared_k: self.declared_k,
        };
        serde_json::to_string(&doc).expect("spec serializes")
    }

    pub fn kind(&self) -> SplittingKind {
        self.kind
    }

    pub fn factor(&self, side: Side) -> &BaseGroup {
        &self.factors[side.idx()]
    }

    pub fn edge_subgroup(&self, side: Side) -> &DesignatedSubgroup {
        &self.edge[side.idx()]
    }

    pub fn edge_is_trivial(&self) -> bool {
        self.edge[0].is_trivial()
    }

    pub fn declared_k(&self) -> Option<u64> {
        self.declared_k
    }

    pub fn resolve(&self, name: &str) -> Option<GenRef> {
        for side in [Side::A, Side::B] {
            if let Some(i) = self.factor(side).gen_index(name) {
                return Some(GenRef::Factor(side, i));
            }
        }
        self.edge_gens.iter().position(|g| g == name).map(GenRef::Edge)
    }

    /// Factor generators and their inverses as one-letter words, in the order
    /// `a, a^-1, b, b^-1, ...` (A first).
    pub fn letters(&self) -> Vec<Word> {
        self.factors
            .iter()
            .flat_map(|f| f.gens().iter())
            .flat_map(|g| [Word::letter(g, 1), Word::letter(g, -1)])
            .collect()
    }

    pub fn identity(&self) -> NormalForm {
        NormalForm {
            syllables: Vec::new(),
            tail: self.factors[0].identity(),
        }
    }

    /// Moves an edge element held in `A` to factor `side`.
    pub fn edge_to_side(&self, c: &Elem, side: Side) -> Elem {
        match side {
            Side::A => c.clone(),
            Side::B => {
                let (rep, cw) = self.edge[0].decompose(c);
                debug_assert!(self.factors[0].is_identity(&rep));
                self.edge[1].eval(&cw)
            }
        }
    }

    /// `nf * x` for `x` in factor `side`.
    pub fn append(&self, nf: &mut NormalForm, side: Side, x: &Elem) {
        let f = self.factor(side);
        let y = f.mul(&self.edge_to_side(&nf.tail, side), x);
        let z = match nf.syllables.last() {
            Some(last) if last.side == side => {
                let z = f.mul(&last.elem, &y);
                nf.syllables.pop();
                z
            }
            _ => y,
        };
        let (rep, cw) = self.edge[side.idx()].decompose(&z);
        nf.tail = self.edge[0].eval(&cw);
        if !f.is_identity(&rep) {
            nf.syllables.push(Syllable { side, elem: rep });
        }
    }

    pub fn normal_form(&self, w: &Word) -> Result<NormalForm> {
        let mut nf = self.identity();
        for l in w.letters() {
            match self.resolve(&l.gen) {
                Some(GenRef::Factor(side, i)) => {
                    let x = self.factor(side).gen_power(i, &l.exp);
                    self.append(&mut nf, side, &x);
                }
                Some(GenRef::Edge(i)) => {
                    let x = self.edge[0].eval(&vec![(i, l.exp.clone())]);
                    self.append(&mut nf, Side::A, &x);
                }
                None => return Err(Error::ForeignGenerator(l.gen.clone())),
            }
        }
        Ok(nf)
    }

    pub fn multiply(&self, u: &NormalForm, v: &NormalForm) -> NormalForm {
        let mut out = u.clone();
        for s in &v.syllables {
            self.append(&mut out, s.side, &s.elem);
        }
        self.append(&mut out, Side::A, &v.tail);
        out
    }

    pub fn inverse(&self, u: &NormalForm) -> NormalForm {
        let mut out = NormalForm {
            syllables: Vec::new(),
            tail: self.factors[0].inv(&u.tail),
        };
        for s in u.syllables.iter().rev() {
            self.append(&mut out, s.side, &self.factor(s.side).inv(&s.elem));
        }
        out
    }

    pub fn power(&self, u: &NormalForm, e: &BigInt) -> NormalForm {
        let mut base = if e.is_negative() { self.inverse(u) } else { u.clone() };
        let mut n = e.abs();
        let mut acc = self.identity();
        while !n.is_zero() {
            if (&n & BigInt::one()).is_one() {
                acc = self.multiply(&acc, &base);
            }
            n >>= 1;
            if !n.is_zero() {
                base = self.multiply(&base, &base);
            }
        }
        acc
    }

    /// `u v u^-1`.
    pub fn conjugate(&self, u: &NormalForm, v: &NormalForm) -> NormalForm {
        self.multiply(&self.multiply(u, v), &self.inverse(u))
    }

    pub fn word_of(&self, nf: &NormalForm) -> Word {
        let mut w = Word::identity();
        for s in &nf.syllables {
            w = w.concat(&self.factor(s.side).word_of(&s.elem));
        }
        w.concat(&self.factors[0].word_of(&nf.tail))
    }

    pub fn is_trivial_nf(&self, nf: &NormalForm) -> bool {
        nf.syllables.is_empty() && self.factors[0].is_identity(&nf.tail)
    }

    pub fn is_trivial(&self, w: &Word) -> Result<bool> {
        Ok(self.is_trivial_nf(&self.normal_form(w)?))
    }

    pub fn classify_elementarity(&self) -> ElementarityVerdict {
        let names = ["A", "B"];
        for side in [Side::A, Side::B] {
            if self.factor(side).order() == Some(1) {
                return ElementarityVerdict {
                    verdict: Elementarity::EllipticAction,
                    reason: format!("factor {} is trivial", names[side.idx()]),
                };
            }
        }
        let idx = [self.edge[0].index(), self.edge[1].index()];
        for side in [Side::A, Side::B] {
            if idx[side.idx()] == Some(BigInt::one()) {
                return ElementarityVerdict {
                    verdict: Elementarity::EllipticAction,
                    reason: format!(
                        "edge group equals factor {}, so the group fixes a vertex",
                        names[side.idx()]
                    ),
                };
            }
        }
        let two = Some(BigInt::from(2));
        if idx[0] == two && idx[1] == two {
            let reason = match self.kind {
                SplittingKind::FreeProduct => "free product of two groups of order 2 (Z2*Z2)",
                SplittingKind::Amalgam => "edge group has index 2 in both factors, so the tree is a line",
            };
            return ElementarityVerdict {
                verdict: Elementarity::LinearAction,
                reason: reason.into(),
            };
        }
        ElementarityVerdict {
            verdict: Elementarity::NonElementary,
            reason: "edge group has index >= 2 in both factors and >= 3 in one".into(),
        }
    }
}

pub fn syllable_length(nf: &NormalForm) -> usize {
    nf.syllables.len()
}
