//! Designated subgroups of base groups: membership, canonical left-coset
//! representatives and the decomposition `z = rep * c` with `c` written as a
//! word in the subgroup's own generators.
//!
//! Supported shapes:
//! - any subgroup of a cyclic or finite-table group,
//! - any sublattice of a free abelian group,
//! - subgroups of a free group generated by powers of one free generator.

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::group::{BaseGroup, Elem, OracleKind};

/// A word in the generators of the subgroup: `(generator index, exponent)`.
pub type CWord = Vec<(usize, BigInt)>;

/// Left cosets `aC` with `a^-1 * delta * a` in `C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FixedCosets {
    /// Every coset is fixed.
    All,
    Reps(Vec<Elem>),
}

#[derive(Clone, Debug)]
enum Shape {
    Trivial,
    /// `C = <d>` inside `Z/n`, with `d = sum coeffs[i] * images[i]` mod n.
    Residues { d: u64, coeffs: Vec<BigInt> },
    /// Row echelon basis of the lattice; `rows[j] = sum u[j][i] * images[i]`.
    Lattice {
        rows: Vec<Vec<BigInt>>,
        pivots: Vec<usize>,
        u: Vec<Vec<BigInt>>,
    },
    /// `C = <g^d>` for a free generator `g`, with `d = sum coeffs[i] * m_i`.
    GenPowers {
        gen: usize,
        d: BigInt,
        coeffs: Vec<BigInt>,
    },
    Table {
        rep_of: Vec<usize>,
        cword_of: HashMap<usize, CWord>,
        reps: Vec<usize>,
    },
}

#[derive(Clone, Debug)]
pub struct DesignatedSubgroup {
    group: BaseGroup,
    images: Vec<Elem>,
    shape: Shape,
}

/// Extended gcd on BigInt: returns `(g, s, t)` with `g = s*a + t*b`, `g >= 0`.
fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let e = a.extended_gcd(b);
    if e.gcd.is_negative() {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// Integer row reduction to echelon form with positive pivots, tracking the
/// unimodular transform.
fn echelon(mut m: Vec<Vec<BigInt>>, dim: usize) -> (Vec<Vec<BigInt>>, Vec<usize>, Vec<Vec<BigInt>>) {
    let k = m.len();
    let mut u: Vec<Vec<BigInt>> = (0..k)
        .map(|i| (0..k).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..dim {
        if r == k {
            break;
        }
        loop {
            let best = (r..k)
                .filter(|&i| !m[i][col].is_zero())
                .min_by(|&a, &b| m[a][col].abs().cmp(&m[b][col].abs()));
            let Some(p) = best else { break };
            m.swap(r, p);
            u.swap(r, p);
            let mut done = true;
            for i in r + 1..k {
                if m[i][col].is_zero() {
                    continue;
                }
                let q = m[i][col].div_floor(&m[r][col]);
                for c in 0..dim {
                    let t = &q * &m[r][c];
                    m[i][c] -= t;
                }
                for c in 0..k {
                    let t = &q * &u[r][c];
                    u[i][c] -= t;
                }
                if !m[i][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if r < k && !m[r][col].is_zero() {
            if m[r][col].is_negative() {
                m[r].iter_mut().for_each(|x| *x = -x.clone());
                u[r].iter_mut().for_each(|x| *x = -x.clone());
            }
            pivots.push(col);
            r += 1;
        }
    }
    m.truncate(r);
    u.truncate(r);
    (m, pivots, u)
}

/// Splits a reduced free word into `u * core * u^-1` with `core` cyclically
/// reduced.
fn cyclic_core(v: &[(usize, BigInt)]) -> (Vec<(usize, BigInt)>, Vec<(usize, BigInt)>) {
    let mut lo = 0;
    let mut hi = v.len();
    let mut u = Vec::new();
    while hi - lo >= 2 && v[lo].0 == v[hi - 1].0 {
        if (&v[lo].1 + &v[hi - 1].1).is_zero() {
            u.push(v[lo].clone());
            lo += 1;
            hi -= 1;
        } else {
            // g^x M g^y = g^x (M g^(x+y)) g^-x
            u.push(v[lo].clone());
            let mut core: Vec<_> = v[lo + 1..hi - 1].to_vec();
            core.push((v[lo].0, &v[lo].1 + &v[hi - 1].1));
            return (u, core);
        }
    }
    (u, v[lo..hi].to_vec())
}

impl DesignatedSubgroup {
    /// The subgroup of `group` generated by `images`.
    pub fn new(group: &BaseGroup, images: Vec<Elem>) -> Result<Self> {
        let shape = if images.iter().all(|x| group.is_identity(x)) {
            Shape::Trivial
        } else {
            match group.kind() {
                OracleKind::Cyclic { order } => {
                    let n = BigInt::from(*order);
                    let mut g = n.clone();
                    let mut coeffs = vec![BigInt::zero(); images.len()];
                    for (i, x) in images.iter().enumerate() {
                        let Elem::Residue(r) = x else { unreachable!() };
                        let (g2, s, t) = ext_gcd(&g, &BigInt::from(*r));
                        coeffs.iter_mut().for_each(|c| *c *= &s);
                        coeffs[i] = t;
                        g = g2;
                    }
                    Shape::Residues {
                        d: g.to_u64().unwrap(),
                        coeffs,
                    }
                }
                OracleKind::FreeAbelian { rank } => {
                    let m = images
                        .iter()
                        .map(|x| match x {
                            Elem::Vector(v) => v.clone(),
                            _ => unreachable!(),
                        })
                        .collect();
                    let (rows, pivots, u) = echelon(m, *rank);
                    Shape::Lattice { rows, pivots, u }
                }
                OracleKind::Free { .. } => {
                    let mut gen = None;
                    let mut ms = Vec::new();
                    for x in &images {
                        let Elem::Reduced(v) = x else { unreachable!() };
                        match v.as_slice() {
                            [] => ms.push(BigInt::zero()),
                            [(g, m)] if gen.is_none() || gen == Some(*g) => {
                                gen = Some(*g);
                                ms.push(m.clone());
                            }
                            _ => {
                                return Err(Error::UnsupportedSubgroup(
                                    "edge subgroups of free groups must be generated by powers of a single free generator"
                                        .into(),
                                ))
                            }
                        }
                    }
                    let mut d = BigInt::zero();
                    let mut coeffs = vec![BigInt::zero(); ms.len()];
                    for (i, m) in ms.iter().enumerate() {
                        let (g2, s, t) = ext_gcd(&d, m);
                        coeffs.iter_mut().for_each(|c| *c *= &s);
                        coeffs[i] = t;
                        d = g2;
                    }
                    Shape::GenPowers {
                        gen: gen.unwrap(),
                        d,
                        coeffs,
                    }
                }
                OracleKind::FiniteTable { order } => Self::table_shape(group, &images, *order),
            }
        };
        Ok(DesignatedSubgroup {
            group: group.clone(),
            images,
            shape,
        })
    }

    fn table_shape(group: &BaseGroup, images: &[Elem], order: usize) -> Shape {
        let idx = |x: &Elem| match x {
            Elem::Index(i) => *i,
            _ => unreachable!(),
        };
        let id = idx(&group.identity());
        let mut cword_of: HashMap<usize, CWord> = HashMap::from([(id, Vec::new())]);
        let mut queue = VecDeque::from([group.identity()]);
        while let Some(x) = queue.pop_front() {
            for (i, g) in images.iter().enumerate() {
                for (step, e) in [(g.clone(), 1i64), (group.inv(g), -1i64)] {
                    let y = group.mul(&x, &step);
                    if !cword_of.contains_key(&idx(&y)) {
                        let mut w = cword_of[&idx(&x)].clone();
                        push_cword(&mut w, i, BigInt::from(e));
                        cword_of.insert(idx(&y), w);
                        queue.push_back(y);
                    }
                }
            }
        }
        let members: Vec<Elem> = cword_of.keys().map(|&i| Elem::Index(i)).collect();
        let mut rep_of = vec![usize::MAX; order];
        let mut reps = Vec::new();
        for z in 0..order {
            if rep_of[z] != usize::MAX {
                continue;
            }
            let coset: Vec<usize> = members
                .iter()
                .map(|c| idx(&group.mul(&Elem::Index(z), c)))
                .collect();
            let rep = if coset.contains(&id) {
                id
            } else {
                *coset.iter().min().unwrap()
            };
            for &y in &coset {
                rep_of[y] = rep;
            }
            reps.push(rep);
        }
        reps.sort();
        Shape::Table {
            rep_of,
            cword_of,
            reps,
        }
    }

    pub fn group(&self) -> &BaseGroup {
        &self.group
    }

    pub fn images(&self) -> &[Elem] {
        &self.images
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self.shape, Shape::Trivial)
    }

    /// Evaluates a word in the subgroup generators inside the base group.
    pub fn eval(&self, w: &CWord) -> Elem {
        let mut acc = self.group.identity();
        for (i, e) in w {
            acc = self.group.mul(&acc, &self.group.pow(&self.images[*i], e));
        }
        acc
    }

    /// Writes `z = rep * c` with `rep` the canonical representative of `zC`
    /// and `c` in `C`, returned as a word in the subgroup generators.
    pub fn decompose(&self, z: &Elem) -> (Elem, CWord) {
        match (&self.shape, z) {
            (Shape::Trivial, _) => (z.clone(), Vec::new()),
            (Shape::Residues { d, coeffs }, Elem::Residue(r)) => {
                let rep = r % d;
                let q = BigInt::from((r - rep) / d);
                (Elem::Residue(rep), scaled(coeffs, &q))
            }
            (Shape::Lattice { rows, pivots, u }, Elem::Vector(v)) => {
                let mut z = v.clone();
                let mut total = vec![BigInt::zero(); self.images.len()];
                for (j, row) in rows.iter().enumerate() {
                    let p = pivots[j];
                    let q = z[p].div_floor(&row[p]);
                    if q.is_zero() {
                        continue;
                    }
                    for (c, x) in z.iter_mut().enumerate() {
                        *x -= &q * &row[c];
                    }
                    for (i, t) in total.iter_mut().enumerate() {
                        *t += &q * &u[j][i];
                    }
                }
                let cw = total
                    .into_iter()
                    .enumerate()
                    .filter(|(_, e)| !e.is_zero())
                    .collect();
                (Elem::Vector(z), cw)
            }
            (Shape::GenPowers { gen, d, coeffs }, Elem::Reduced(v)) => {
                let mut rep = v.clone();
                let e = match rep.last() {
                    Some((g, e)) if g == gen => e.clone(),
                    _ => BigInt::zero(),
                };
                if !e.is_zero() {
                    rep.pop();
                }
                let r = e.mod_floor(d);
                let q = (&e - &r) / d;
                if !r.is_zero() {
                    rep.push((*gen, r));
                }
                (Elem::Reduced(rep), scaled(coeffs, &q))
            }
            (
                Shape::Table {
                    rep_of, cword_of, ..
                },
                Elem::Index(i),
            ) => {
                let rep = Elem::Index(rep_of[*i]);
                let c = self.group.mul(&self.group.inv(&rep), z);
                let Elem::Index(ci) = c else { unreachable!() };
                (rep, cword_of[&ci].clone())
            }
            _ => panic!("element kind does not match the subgroup's group"),
        }
    }

    pub fn rep(&self, z: &Elem) -> Elem {
        self.decompose(z).0
    }

    pub fn contains(&self, z: &Elem) -> bool {
        self.group.is_identity(&self.rep(z))
    }

    /// Index `[G:C]`, `None` when infinite.
    pub fn index(&self) -> Option<BigInt> {
        match &self.shape {
            Shape::Trivial => self.group.order().map(BigInt::from),
            Shape::Residues { d, .. } => Some(BigInt::from(*d)),
            Shape::Lattice { rows, pivots, .. } => {
                let OracleKind::FreeAbelian { rank } = self.group.kind() else { unreachable!() };
                if pivots.len() < *rank {
                    None
                } else {
                    Some(rows.iter().zip(pivots).map(|(r, &p)| r[p].clone()).product())
                }
            }
            Shape::GenPowers { d, .. } => match self.group.kind() {
                OracleKind::Free { rank: 1 } => Some(d.clone()),
                _ => None,
            },
            Shape::Table { reps, .. } => Some(BigInt::from(reps.len())),
        }
    }

    /// Coset representatives, sorted. For infinite index only those coming
    /// from elements of word length at most `budget` are listed and the flag
    /// is `false`.
    pub fn transversal_slice(&self, budget: usize) -> (Vec<Elem>, bool) {
        match (&self.shape, self.index()) {
            (Shape::Table { reps, .. }, _) => (reps.iter().map(|&i| Elem::Index(i)).collect(), true),
            (_, Some(idx)) => {
                let reps = match &self.shape {
                    Shape::Trivial => self.group.enumerate().unwrap(),
                    Shape::Residues { d, .. } => (0..*d).map(Elem::Residue).collect(),
                    Shape::GenPowers { d, gen, .. } => {
                        let d = d.to_u64().unwrap();
                        (0..d).map(|j| self.group.gen_power(*gen, &BigInt::from(j))).collect()
                    }
                    Shape::Lattice { rows, pivots, .. } => {
                        let mut out = vec![self.group.identity()];
                        for (r, &p) in rows.iter().zip(pivots) {
                            let pv = r[p].to_u64().unwrap();
                            out = out
                                .into_iter()
                                .flat_map(|x| {
                                    (0..pv).map(move |j| {
                                        let Elem::Vector(mut v) = x.clone() else { unreachable!() };
                                        v[p] += BigInt::from(j);
                                        Elem::Vector(v)
                                    })
                                })
                                .collect();
                        }
                        out
                    }
                    Shape::Table { .. } => unreachable!(),
                };
                debug_assert_eq!(BigInt::from(reps.len()), idx);
                let mut reps: Vec<Elem> = reps.into_iter().map(|x| self.rep(&x)).collect();
                reps.sort();
                (reps, true)
            }
            (_, None) => {
                let set: BTreeSet<Elem> = self
                    .group
                    .ball(budget)
                    .iter()
                    .map(|x| self.rep(x))
                    .collect();
                (set.into_iter().collect(), false)
            }
        }
    }

    /// Cosets `aC` fixed by left multiplication with `delta`.
    pub fn fixed_cosets(&self, delta: &Elem) -> FixedCosets {
        let g = &self.group;
        if g.is_identity(delta) {
            return FixedCosets::All;
        }
        if let Shape::Table { reps, .. } = &self.shape {
            let fixed: Vec<Elem> = reps
                .iter()
                .map(|&i| Elem::Index(i))
                .filter(|a| self.contains(&g.mul(&g.mul(&g.inv(a), delta), a)))
                .collect();
            return if fixed.len() == reps.len() {
                FixedCosets::All
            } else {
                FixedCosets::Reps(fixed)
            };
        }
        if g.is_abelian() {
            return if self.contains(delta) {
                FixedCosets::All
            } else {
                FixedCosets::Reps(Vec::new())
            };
        }
        match (&self.shape, delta) {
            (Shape::Trivial, _) => FixedCosets::Reps(Vec::new()),
            (Shape::GenPowers { gen, d, .. }, Elem::Reduced(v)) => {
                let (u, core) = cyclic_core(v);
                match core.as_slice() {
                    [(cg, e)] if cg == gen && e.mod_floor(d).is_zero() => {
                        let u = Elem::Reduced(u);
                        let d = d.to_u64().unwrap();
                        let set: BTreeSet<Elem> = (0..d)
                            .map(|j| self.rep(&g.mul(&u, &g.gen_power(*gen, &BigInt::from(j)))))
                            .collect();
                        FixedCosets::Reps(set.into_iter().collect())
                    }
                    _ => FixedCosets::Reps(Vec::new()),
                }
            }
            _ => unreachable!("non-abelian groups here are free or finite tables"),
        }
    }
}

fn scaled(coeffs: &[BigInt], q: &BigInt) -> CWord {
    if q.is_zero() {
        return Vec::new();
    }
    coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (i, c * q))
        .collect()
}

pub fn push_cword(w: &mut CWord, i: usize, e: BigInt) {
    if e.is_zero() {
        return;
    }
    if let Some(last) = w.last_mut() {
        if last.0 == i {
            last.1 += e;
            if last.1.is_zero() {
                w.pop();
            }
            return;
        }
    }
    w.push((i, e));
}
