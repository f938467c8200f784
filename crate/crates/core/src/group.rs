//! Base-group oracles.
//!
//! Each [`BaseGroup`] keeps elements in a canonical form ([`Elem`]) so that
//! identity tests and equality are plain comparisons:
//!
//! | kind           | canonical form                |
//! |----------------|-------------------------------|
//! | cyclic `Z/n`   | least nonnegative residue     |
//! | finite table   | row index of the table        |
//! | free abelian   | exponent vector               |
//! | free           | freely reduced syllable list  |

use std::collections::{HashMap, HashSet, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::word::{is_valid_name, Word};

/// Exhaustive associativity is checked up to this order; larger tables use
/// Light's test over the generators.
const EXHAUSTIVE_ASSOC_LIMIT: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleKind {
    Cyclic { order: u64 },
    FiniteTable { order: usize },
    FreeAbelian { rank: usize },
    Free { rank: usize },
}

/// Canonical element of a base group.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Elem {
    Residue(u64),
    Index(usize),
    Vector(Vec<BigInt>),
    /// `(generator index, nonzero exponent)` with no two adjacent entries
    /// sharing a generator.
    Reduced(Vec<(usize, BigInt)>),
}

/// The JSON shape of a base group inside a splitting document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum OracleDecl {
    Cyclic {
        order: u64,
        gens: Vec<String>,
    },
    FreeAbelian {
        rank: usize,
        gens: Vec<String>,
    },
    Free {
        rank: usize,
        gens: Vec<String>,
    },
    FiniteTable {
        order: usize,
        table: Vec<Vec<usize>>,
        gens: Vec<String>,
        gen_elements: Vec<usize>,
    },
}

#[derive(Clone, Debug)]
struct Table {
    mul: Vec<Vec<usize>>,
    identity: usize,
    inv: Vec<usize>,
    gen_elements: Vec<usize>,
    /// Cyclic powers `g^0, g^1, ...` of each generator, one full period.
    gen_powers: Vec<Vec<usize>>,
    /// Shortest word for every element, found by BFS over the generators.
    words: Vec<Word>,
}

#[derive(Clone, Debug)]
pub struct BaseGroup {
    kind: OracleKind,
    gens: Vec<String>,
    table: Option<Table>,
}

fn check_names(gens: &[String]) -> Result<()> {
    let mut seen = HashSet::new();
    for g in gens {
        if !is_valid_name(g) {
            return Err(Error::InvalidGeneratorName(g.clone()));
        }
        if !seen.insert(g.as_str()) {
            return Err(Error::DuplicateGenerator(g.clone()));
        }
    }
    Ok(())
}

fn owned(gens: &[&str]) -> Vec<String> {
    gens.iter().map(|s| s.to_string()).collect()
}

pub fn make_cyclic(n: u64, gen: &str) -> Result<BaseGroup> {
    if n == 0 {
        return Err(Error::InvalidOracle("cyclic order must be at least 1".into()));
    }
    let gens = vec![gen.to_string()];
    check_names(&gens)?;
    Ok(BaseGroup {
        kind: OracleKind::Cyclic { order: n },
        gens,
        table: None,
    })
}

pub fn make_free_abelian(rank: usize, gens: &[&str]) -> Result<BaseGroup> {
    if rank == 0 || rank != gens.len() {
        return Err(Error::InvalidOracle(format!(
            "free abelian rank {rank} needs exactly {rank} generators, got {}",
            gens.len()
        )));
    }
    let gens = owned(gens);
    check_names(&gens)?;
    Ok(BaseGroup {
        kind: OracleKind::FreeAbelian { rank },
        gens,
        table: None,
    })
}

pub fn make_free(rank: usize, gens: &[&str]) -> Result<BaseGroup> {
    if rank == 0 || rank != gens.len() {
        return Err(Error::InvalidOracle(format!(
            "free rank {rank} needs exactly {rank} generators, got {}",
            gens.len()
        )));
    }
    let gens = owned(gens);
    check_names(&gens)?;
    Ok(BaseGroup {
        kind: OracleKind::Free { rank },
        gens,
        table: None,
    })
}

/// Builds a finite group from its multiplication table, validating it
/// eagerly. `gen_elements[i]` is the table index of generator `gens[i]`.
pub fn make_finite_table(
    table: Vec<Vec<usize>>,
    gens: &[&str],
    gen_elements: &[usize],
) -> Result<BaseGroup> {
    let gens = owned(gens);
    check_names(&gens)?;
    let n = table.len();
    let bad = |m: String| Err(Error::InvalidOracle(m));
    if n == 0 {
        return bad("empty multiplication table".into());
    }
    if gens.len() != gen_elements.len() {
        return bad("gens and gen_elements differ in length".into());
    }
    for row in &table {
        if row.len() != n {
            return bad("multiplication table is not square".into());
        }
        if row.iter().any(|&x| x >= n) {
            return bad("table entry out of range (not closed)".into());
        }
    }
    if gen_elements.iter().any(|&g| g >= n) {
        return bad("generator element out of range".into());
    }
    let identity = match (0..n).find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x)) {
        Some(e) => e,
        None => return bad("no two-sided identity".into()),
    };
    let mut inv = vec![usize::MAX; n];
    for x in 0..n {
        match (0..n).find(|&y| table[x][y] == identity && table[y][x] == identity) {
            Some(y) => inv[x] = y,
            None => return bad(format!("element {x} has no inverse")),
        }
    }
    let assoc = |x: usize, y: usize, z: usize| table[table[x][y]][z] == table[x][table[y][z]];
    if n <= EXHAUSTIVE_ASSOC_LIMIT {
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if !assoc(x, y, z) {
                        return bad(format!("not associative at ({x},{y},{z})"));
                    }
                }
            }
        }
    } else {
        for &g in gen_elements {
            for x in 0..n {
                for y in 0..n {
                    if !assoc(x, g, y) {
                        return bad(format!("Light's test fails at ({x},{g},{y})"));
                    }
                }
            }
        }
    }

    // BFS over right multiplication by generators and their inverses.
    let mut words: Vec<Option<Word>> = vec![None; n];
    words[identity] = Some(Word::identity());
    let mut queue = VecDeque::from([identity]);
    while let Some(x) = queue.pop_front() {
        for (i, &g) in gen_elements.iter().enumerate() {
            for (step, e) in [(g, 1i64), (inv[g], -1i64)] {
                let y = table[x][step];
                if words[y].is_none() {
                    let mut w = words[x].clone().unwrap();
                    w.push(&gens[i], BigInt::from(e));
                    words[y] = Some(w);
                    queue.push_back(y);
                }
            }
        }
    }
    if words.iter().any(|w| w.is_none()) {
        return bad("generators do not generate the table".into());
    }
    let words = words.into_iter().map(Option::unwrap).collect();
    let gen_powers = gen_elements
        .iter()
        .map(|&g| {
            let mut p = vec![identity];
            let mut cur = g;
            while cur != identity {
                p.push(cur);
                cur = table[cur][g];
            }
            p
        })
        .collect();
    Ok(BaseGroup {
        kind: OracleKind::FiniteTable { order: n },
        gens,
        table: Some(Table {
            mul: table,
            identity,
            inv,
            gen_elements: gen_elements.to_vec(),
            gen_powers,
            words,
        }),
    })
}

fn mod_u64(e: &BigInt, n: u64) -> u64 {
    e.mod_floor(&BigInt::from(n)).to_u64().expect("residue fits in u64")
}

fn free_push(v: &mut Vec<(usize, BigInt)>, g: usize, e: BigInt) {
    if e.is_zero() {
        return;
    }
    if let Some(last) = v.last_mut() {
        if last.0 == g {
            last.1 += e;
            if last.1.is_zero() {
                v.pop();
            }
            return;
        }
    }
    v.push((g, e));
}

impl BaseGroup {
    pub fn from_decl(decl: &OracleDecl) -> Result<BaseGroup> {
        match decl {
            OracleDecl::Cyclic { order, gens } => {
                if gens.len() != 1 {
                    return Err(Error::InvalidOracle(
                        "cyclic groups take exactly one generator".into(),
                    ));
                }
                make_cyclic(*order, &gens[0])
            }
            OracleDecl::FreeAbelian { rank, gens } => {
                make_free_abelian(*rank, &gens.iter().map(String::as_str).collect::<Vec<_>>())
            }
            OracleDecl::Free { rank, gens } => {
                make_free(*rank, &gens.iter().map(String::as_str).collect::<Vec<_>>())
            }
            OracleDecl::FiniteTable {
                order,
                table,
                gens,
                gen_elements,
            } => {
                if *order != table.len() {
                    return Err(Error::InvalidOracle(format!(
                        "declared order {order} but table has {} rows",
                        table.len()
                    )));
                }
                make_finite_table(
                    table.clone(),
                    &gens.iter().map(String::as_str).collect::<Vec<_>>(),
                    gen_elements,
                )
            }
        }
    }

    pub fn to_decl(&self) -> OracleDecl {
        let gens = self.gens.clone();
        match &self.kind {
            OracleKind::Cyclic { order } => OracleDecl::Cyclic {
                order: *order,
                gens,
            },
            OracleKind::FreeAbelian { rank } => OracleDecl::FreeAbelian { rank: *rank, gens },
            OracleKind::Free { rank } => OracleDecl::Free { rank: *rank, gens },
            OracleKind::FiniteTable { order } => {
                let t = self.table.as_ref().unwrap();
                OracleDecl::FiniteTable {
                    order: *order,
                    table: t.mul.clone(),
                    gens,
                    gen_elements: t.gen_elements.clone(),
                }
            }
        }
    }

    pub fn kind(&self) -> &OracleKind {
        &self.kind
    }

    pub fn gens(&self) -> &[String] {
        &self.gens
    }

    pub fn gen_index(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g == name)
    }

    /// Group order, `None` when infinite.
    pub fn order(&self) -> Option<u64> {
        match &self.kind {
            OracleKind::Cyclic { order } => Some(*order),
            OracleKind::FiniteTable { order } => Some(*order as u64),
            _ => None,
        }
    }

    pub fn is_abelian(&self) -> bool {
        match &self.kind {
            OracleKind::Cyclic { .. } | OracleKind::FreeAbelian { .. } => true,
            OracleKind::Free { rank } => *rank == 1,
            OracleKind::FiniteTable { .. } => {
                let t = self.table.as_ref().unwrap();
                let g = &t.gen_elements;
                g.iter().all(|&x| g.iter().all(|&y| t.mul[x][y] == t.mul[y][x]))
            }
        }
    }

    pub fn identity(&self) -> Elem {
        match &self.kind {
            OracleKind::Cyclic { .. } => Elem::Residue(0),
            OracleKind::FiniteTable { .. } => Elem::Index(self.table.as_ref().unwrap().identity),
            OracleKind::FreeAbelian { rank } => Elem::Vector(vec![BigInt::zero(); *rank]),
            OracleKind::Free { .. } => Elem::Reduced(Vec::new()),
        }
    }

    pub fn is_identity(&self, x: &Elem) -> bool {
        *x == self.identity()
    }

    /// `gens[i]^e` as a canonical element.
    pub fn gen_power(&self, i: usize, e: &BigInt) -> Elem {
        match &self.kind {
            OracleKind::Cyclic { order } => Elem::Residue(mod_u64(e, *order)),
            OracleKind::FiniteTable { .. } => {
                let p = &self.table.as_ref().unwrap().gen_powers[i];
                Elem::Index(p[mod_u64(e, p.len() as u64) as usize])
            }
            OracleKind::FreeAbelian { rank } => {
                let mut v = vec![BigInt::zero(); *rank];
                v[i] = e.clone();
                Elem::Vector(v)
            }
            OracleKind::Free { .. } => {
                let mut v = Vec::new();
                free_push(&mut v, i, e.clone());
                Elem::Reduced(v)
            }
        }
    }

    pub fn canonical(&self, w: &Word) -> Result<Elem> {
        let mut acc = self.identity();
        for l in w.letters() {
            let i = self
                .gen_index(&l.gen)
                .ok_or_else(|| Error::ForeignGenerator(l.gen.clone()))?;
            acc = self.mul(&acc, &self.gen_power(i, &l.exp));
        }
        Ok(acc)
    }

    /// The canonical word of an element.
    pub fn word_of(&self, x: &Elem) -> Word {
        match x {
            Elem::Residue(r) => Word::letter(&self.gens[0], BigInt::from(*r)),
            Elem::Index(i) => self.table.as_ref().unwrap().words[*i].clone(),
            Elem::Vector(v) => {
                Word::from_letters(self.gens.iter().zip(v.iter().cloned()))
            }
            Elem::Reduced(v) => {
                Word::from_letters(v.iter().map(|(g, e)| (&self.gens[*g], e.clone())))
            }
        }
    }

    pub fn mul(&self, x: &Elem, y: &Elem) -> Elem {
        match (x, y, &self.kind) {
            (Elem::Residue(a), Elem::Residue(b), OracleKind::Cyclic { order }) => {
                Elem::Residue(((*a as u128 + *b as u128) % *order as u128) as u64)
            }
            (Elem::Index(a), Elem::Index(b), _) => {
                Elem::Index(self.table.as_ref().unwrap().mul[*a][*b])
            }
            (Elem::Vector(a), Elem::Vector(b), _) => {
                Elem::Vector(a.iter().zip(b).map(|(p, q)| p + q).collect())
            }
            (Elem::Reduced(a), Elem::Reduced(b), _) => {
                let mut v = a.clone();
                for (g, e) in b {
                    free_push(&mut v, *g, e.clone());
                }
                Elem::Reduced(v)
            }
            _ => panic!("element kinds do not match the group"),
        }
    }

    pub fn inv(&self, x: &Elem) -> Elem {
        match (x, &self.kind) {
            (Elem::Residue(a), OracleKind::Cyclic { order }) => {
                Elem::Residue((*order - *a % *order) % *order)
            }
            (Elem::Index(a), _) => Elem::Index(self.table.as_ref().unwrap().inv[*a]),
            (Elem::Vector(a), _) => Elem::Vector(a.iter().map(|p| -p).collect()),
            (Elem::Reduced(a), _) => {
                Elem::Reduced(a.iter().rev().map(|(g, e)| (*g, -e)).collect())
            }
            _ => panic!("element kind does not match the group"),
        }
    }

    pub fn pow(&self, x: &Elem, e: &BigInt) -> Elem {
        match (x, &self.kind) {
            (Elem::Residue(a), OracleKind::Cyclic { order }) => {
                Elem::Residue(mod_u64(&(BigInt::from(*a) * e), *order))
            }
            (Elem::Vector(a), _) => Elem::Vector(a.iter().map(|p| p * e).collect()),
            (Elem::Index(_), _) => {
                let ord = self.elem_order(x).expect("finite group");
                let k = mod_u64(e, ord);
                let mut acc = self.identity();
                for _ in 0..k {
                    acc = self.mul(&acc, x);
                }
                acc
            }
            (Elem::Reduced(a), _) => {
                if a.len() == 1 {
                    let mut v = Vec::new();
                    free_push(&mut v, a[0].0, &a[0].1 * e);
                    return Elem::Reduced(v);
                }
                let base = if e.is_negative() { self.inv(x) } else { x.clone() };
                let mut n = e.abs();
                let mut acc = self.identity();
                let mut sq = base;
                while !n.is_zero() {
                    if n.is_odd() {
                        acc = self.mul(&acc, &sq);
                    }
                    sq = self.mul(&sq, &sq);
                    n >>= 1;
                }
                acc
            }
            _ => panic!("element kind does not match the group"),
        }
    }

    /// Order of an element, `None` when infinite.
    pub fn elem_order(&self, x: &Elem) -> Option<u64> {
        match (x, &self.kind) {
            (Elem::Residue(a), OracleKind::Cyclic { order }) => Some(order / a.gcd(order)),
            (Elem::Index(_), _) => {
                let mut k = 1;
                let mut cur = x.clone();
                while !self.is_identity(&cur) {
                    cur = self.mul(&cur, x);
                    k += 1;
                }
                Some(k)
            }
            _ if self.is_identity(x) => Some(1),
            _ => None,
        }
    }

    /// All elements, for finite groups.
    pub fn enumerate(&self) -> Option<Vec<Elem>> {
        match &self.kind {
            OracleKind::Cyclic { order } => Some((0..*order).map(Elem::Residue).collect()),
            OracleKind::FiniteTable { order } => Some((0..*order).map(Elem::Index).collect()),
            _ => None,
        }
    }

    /// Elements whose canonical word has length at most `len`, deduplicated
    /// and sorted. Used for windowed exploration of infinite groups.
    pub fn ball(&self, len: usize) -> Vec<Elem> {
        let mut seen: HashSet<Elem> = HashSet::from([self.identity()]);
        let mut frontier = vec![self.identity()];
        let steps: Vec<Elem> = (0..self.gens.len())
            .flat_map(|i| [self.gen_power(i, &BigInt::one()), self.gen_power(i, &-BigInt::one())])
            .collect();
        for _ in 0..len {
            let mut next = Vec::new();
            for x in &frontier {
                for s in &steps {
                    let y = self.mul(x, s);
                    if seen.insert(y.clone()) {
                        next.push(y);
                    }
                }
            }
            frontier = next;
        }
        let mut out: Vec<Elem> = seen.into_iter().collect();
        out.sort();
        out
    }

    /// Canonical-form product of two words.
    pub fn multiply(&self, u: &Word, v: &Word) -> Result<Word> {
        let x = self.canonical(u)?;
        let y = self.canonical(v)?;
        Ok(self.word_of(&self.mul(&x, &y)))
    }

    pub fn is_trivial_word(&self, w: &Word) -> Result<bool> {
        Ok(self.is_identity(&self.canonical(w)?))
    }

    /// Maps each element of a finite group to its table index, for callers
    /// that need dense indexing.
    pub fn index_map(&self) -> Option<HashMap<Elem, usize>> {
        self.enumerate()
            .map(|v| v.into_iter().enumerate().map(|(i, x)| (x, i)).collect())
    }
}

/// Same as [`BaseGroup::multiply`], under the name used in the CLI docs.
pub fn oracle_multiply(o: &BaseGroup, u: &Word, v: &Word) -> Result<Word> {
    o.multiply(u, v)
}

/// The symmetric group on three letters with `s` a transposition and `r` a
/// 3-cycle. Index 0 is the identity.
pub fn s3_table() -> (Vec<Vec<usize>>, Vec<usize>) {
    // Elements as permutations of {0,1,2}, composed as functions (p*q)(i) = p(q(i)).
    let perms: [[usize; 3]; 6] = [
        [0, 1, 2],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [0, 2, 1],
        [2, 1, 0],
    ];
    let idx = |p: [usize; 3]| perms.iter().position(|q| *q == p).unwrap();
    let table = (0..6)
        .map(|a| {
            (0..6)
                .map(|b| {
                    let (p, q) = (perms[a], perms[b]);
                    idx([p[q[0]], p[q[1]], p[q[2]]])
                })
                .collect()
        })
        .collect();
    (table, vec![1, 2])
}
