//! The Bass–Serre tree of a splitting, explored lazily.
//!
//! Vertices are cosets `gA` and `gB`, edges are cosets `gC`. A vertex is
//! stored by the normal-form syllables of a coset representative with any
//! trailing syllable from its own factor removed, which makes the
//! representation canonical. The path from a vertex back to the base
//! vertex `A` is read off its syllables, so distances are exact and need no
//! search.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::splitting::{NormalForm, Side, SplittingSpec, Syllable};
use crate::subgroup::FixedCosets;
use crate::word::Word;

/// Default number of letters used when listing coset representatives of an
/// infinite-index edge group.
pub const DEFAULT_SLICE_BUDGET: usize = 1;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeVertex {
    pub side: Side,
    /// Normal-form syllables of the representative; never ends with a
    /// syllable from `side`.
    pub rep: Vec<Syllable>,
}

impl TreeVertex {
    pub fn base(side: Side) -> Self {
        TreeVertex {
            side,
            rep: Vec::new(),
        }
    }

    /// The vertex `g X` for `g` in normal form.
    pub fn of(g: &NormalForm, side: Side) -> Self {
        let mut rep = g.syllables.clone();
        if rep.last().map(|s| s.side) == Some(side) {
            rep.pop();
        }
        TreeVertex { side, rep }
    }

    pub fn rep_nf(&self, spec: &SplittingSpec) -> NormalForm {
        NormalForm {
            syllables: self.rep.clone(),
            tail: spec.factor(Side::A).identity(),
        }
    }

    pub fn rep_word(&self, spec: &SplittingSpec) -> Word {
        spec.word_of(&self.rep_nf(spec))
    }

    /// `A:<rep>` or `B:<rep>`.
    pub fn label(&self, spec: &SplittingSpec) -> String {
        let side = match self.side {
            Side::A => "A",
            Side::B => "B",
        };
        format!("{side}:{}", self.rep_word(spec))
    }

    /// Vertices on the path from the base `A` vertex, as `(side, prefix
    /// length)` pairs.
    fn chain(&self) -> Vec<(Side, usize)> {
        let k = self.rep.len();
        let root = if k == 0 { self.side } else { self.rep[0].side };
        let mut out = Vec::with_capacity(k + 2);
        if root == Side::B {
            out.push((Side::A, 0));
        }
        let mut side = root;
        for j in 0..=k {
            out.push((side, j));
            side = side.other();
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Elliptic,
    Hyperbolic,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementClass {
    pub verdict: Verdict,
    pub tau: u64,
    pub witness_vertex: TreeVertex,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexRegion {
    pub center: TreeVertex,
    pub radius: u64,
    pub members: Vec<TreeVertex>,
    pub exhaustive_within_radius: bool,
    /// Only meaningful for T-sets: whether every nontrivial power is
    /// accounted for.
    pub power_exhaustive: bool,
}

impl VertexRegion {
    fn empty(center: &TreeVertex, radius: u64) -> Self {
        VertexRegion {
            center: center.clone(),
            radius,
            members: Vec::new(),
            exhaustive_within_radius: true,
            power_exhaustive: true,
        }
    }

    pub fn contains(&self, v: &TreeVertex) -> bool {
        self.members.contains(v)
    }
}

pub fn act(spec: &SplittingSpec, g: &NormalForm, v: &TreeVertex) -> TreeVertex {
    let mut nf = g.clone();
    for s in &v.rep {
        spec.append(&mut nf, s.side, &s.elem);
    }
    TreeVertex::of(&nf, v.side)
}

pub fn tree_distance(u: &TreeVertex, v: &TreeVertex) -> u64 {
    let (cu, cv) = (u.chain(), v.chain());
    let lcp = u
        .rep
        .iter()
        .zip(&v.rep)
        .take_while(|(x, y)| x == y)
        .count();
    let common = cu
        .iter()
        .zip(&cv)
        .take_while(|(x, y)| x == y && x.1 <= lcp)
        .count();
    (cu.len() + cv.len() - 2 * common) as u64
}

/// Vertices of the geodesic from `u` to `v`, both ends included.
pub fn geodesic(u: &TreeVertex, v: &TreeVertex) -> Vec<TreeVertex> {
    let (cu, cv) = (u.chain(), v.chain());
    let lcp = u
        .rep
        .iter()
        .zip(&v.rep)
        .take_while(|(x, y)| x == y)
        .count();
    let common = cu
        .iter()
        .zip(&cv)
        .take_while(|(x, y)| x == y && x.1 <= lcp)
        .count();
    let mk = |rep: &[Syllable], (side, len): (Side, usize)| TreeVertex {
        side,
        rep: rep[..len].to_vec(),
    };
    let mut out: Vec<TreeVertex> = cu[common - 1..].iter().rev().map(|&c| mk(&u.rep, c)).collect();
    out.extend(cv[common..].iter().map(|&c| mk(&v.rep, c)));
    out
}

pub fn displacement(spec: &SplittingSpec, g: &NormalForm, v: &TreeVertex) -> u64 {
    tree_distance(v, &act(spec, g, v))
}

/// Neighbours of `v`; the flag is `false` when the edge group has infinite
/// index in the factor and only a slice of the coset representatives was
/// listed.
pub fn neighbors(spec: &SplittingSpec, v: &TreeVertex, budget: usize) -> (Vec<TreeVertex>, bool) {
    let (reps, exhaustive) = spec.edge_subgroup(v.side).transversal_slice(budget);
    let base = v.rep_nf(spec);
    let out = reps
        .iter()
        .map(|x| {
            let mut nf = base.clone();
            spec.append(&mut nf, v.side, x);
            TreeVertex::of(&nf, v.side.other())
        })
        .collect();
    (out, exhaustive)
}

/// Breadth-first ball around `center`; members are listed in BFS order.
pub fn ball(spec: &SplittingSpec, center: &TreeVertex, radius: u64, budget: usize) -> VertexRegion {
    let mut seen: HashSet<TreeVertex> = HashSet::from([center.clone()]);
    let mut members = vec![center.clone()];
    let mut frontier = vec![center.clone()];
    let mut exhaustive = true;
    for _ in 0..radius {
        let mut next = Vec::new();
        for v in &frontier {
            let (ns, ex) = neighbors(spec, v, budget);
            exhaustive &= ex;
            for n in ns {
                if seen.insert(n.clone()) {
                    members.push(n.clone());
                    next.push(n);
                }
            }
        }
        frontier = next;
    }
    VertexRegion {
        center: center.clone(),
        radius,
        members,
        exhaustive_within_radius: exhaustive,
        power_exhaustive: true,
    }
}

pub fn classify(spec: &SplittingSpec, g: &NormalForm, base: &TreeVertex) -> ElementClass {
    let d1 = displacement(spec, g, base);
    let g2 = spec.multiply(g, g);
    let d2 = displacement(spec, &g2, base);
    let (verdict, tau) = if d2 > d1 {
        (Verdict::Hyperbolic, d2 - d1)
    } else {
        (Verdict::Elliptic, 0)
    };
    ElementClass {
        verdict,
        tau,
        witness_vertex: base.clone(),
    }
}

/// For `g` fixing `v = sX`, the element `s^-1 g s` of factor `X`.
pub fn stabilizer_element(
    spec: &SplittingSpec,
    g: &NormalForm,
    v: &TreeVertex,
) -> Option<crate::group::Elem> {
    let s = v.rep_nf(spec);
    let d = spec.multiply(&spec.multiply(&spec.inverse(&s), g), &s);
    let f = spec.factor(v.side);
    let c = spec.edge_to_side(&d.tail, v.side);
    match d.syllables.as_slice() {
        [] => Some(c),
        [x] if x.side == v.side => Some(f.mul(&x.elem, &c)),
        _ => None,
    }
}

/// Neighbours of a fixed vertex `v` that `g` also fixes.
fn fixed_neighbors(
    spec: &SplittingSpec,
    g: &NormalForm,
    v: &TreeVertex,
    budget: usize,
) -> (Vec<TreeVertex>, bool) {
    let delta = stabilizer_element(spec, g, v).expect("vertex is fixed");
    let sub = spec.edge_subgroup(v.side);
    let (reps, exhaustive) = match sub.fixed_cosets(&delta) {
        FixedCosets::All => sub.transversal_slice(budget),
        FixedCosets::Reps(r) => (r, true),
    };
    let base = v.rep_nf(spec);
    let out = reps
        .iter()
        .map(|x| {
            let mut nf = base.clone();
            spec.append(&mut nf, v.side, x);
            TreeVertex::of(&nf, v.side.other())
        })
        .collect();
    (out, exhaustive)
}

/// Result of exploring `Fix(g)` inside a ball, with the BFS tree kept so the
/// diameter can be read off.
struct FixExplore {
    members: Vec<TreeVertex>,
    parent: Vec<usize>,
    exhaustive: bool,
}

fn explore_fix(
    spec: &SplittingSpec,
    g: &NormalForm,
    base: &TreeVertex,
    radius: u64,
    budget: usize,
) -> Option<FixExplore> {
    if classify(spec, g, base).verdict == Verdict::Hyperbolic {
        return None;
    }
    let gb = act(spec, g, base);
    let path = geodesic(base, &gb);
    let h0 = (path.len() as u64 - 1) / 2;
    if h0 > radius {
        return None;
    }
    // The midpoint of [v, gv] is the projection of v onto Fix(g), so
    // d(base, w) = h0 + d(mid, w) for every fixed w.
    let mid = path[h0 as usize].clone();
    let depth_limit = radius - h0;
    let mut index: HashMap<TreeVertex, usize> = HashMap::from([(mid.clone(), 0)]);
    let mut members = vec![mid];
    let mut parent = vec![usize::MAX];
    let mut depth = vec![0u64];
    let mut exhaustive = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        if depth[i] == depth_limit {
            continue;
        }
        let (ns, ex) = fixed_neighbors(spec, g, &members[i].clone(), budget);
        exhaustive &= ex;
        for n in ns {
            if index.contains_key(&n) {
                continue;
            }
            let j = members.len();
            index.insert(n.clone(), j);
            members.push(n);
            parent.push(i);
            depth.push(depth[i] + 1);
            queue.push_back(j);
        }
    }
    Some(FixExplore {
        members,
        parent,
        exhaustive,
    })
}

fn bfs_tree_diameter(parent: &[usize]) -> u64 {
    let n = parent.len();
    let mut height = vec![0u64; n];
    let mut best = vec![0u64; n];
    let mut diam = 0;
    // BFS order: children always come after parents.
    for i in (0..n).rev() {
        diam = diam.max(height[i] + best[i]);
        if parent[i] != usize::MAX {
            let p = parent[i];
            let h = height[i] + 1;
            if h > height[p] {
                best[p] = height[p];
                height[p] = h;
            } else if h > best[p] {
                best[p] = h;
            }
        }
    }
    diam
}

pub fn fixed_set_with_budget(
    spec: &SplittingSpec,
    g: &NormalForm,
    base: &TreeVertex,
    radius: u64,
    budget: usize,
) -> VertexRegion {
    match explore_fix(spec, g, base, radius, budget) {
        None => VertexRegion::empty(base, radius),
        Some(f) => VertexRegion {
            center: base.clone(),
            radius,
            members: f.members,
            exhaustive_within_radius: f.exhaustive,
            power_exhaustive: true,
        },
    }
}

/// `Fix(g)` intersected with the ball of the given radius around `base`.
pub fn fixed_set(spec: &SplittingSpec, g: &NormalForm, base: &TreeVertex, radius: u64) -> VertexRegion {
    fixed_set_with_budget(spec, g, base, radius, DEFAULT_SLICE_BUDGET)
}

/// Diameter of the windowed fixed set, `None` when the window holds no fixed
/// vertex.
pub fn fix_diameter_lb(spec: &SplittingSpec, g: &NormalForm, base: &TreeVertex, radius: u64) -> Option<u64> {
    explore_fix(spec, g, base, radius, DEFAULT_SLICE_BUDGET).map(|f| bfs_tree_diameter(&f.parent))
}

/// Union of `Fix(g^n)` for `1 <= n <= max_power` with `g^n` nontrivial.
pub fn t_set(
    spec: &SplittingSpec,
    g: &NormalForm,
    base: &TreeVertex,
    radius: u64,
    max_power: u64,
) -> VertexRegion {
    let mut members: Vec<TreeVertex> = Vec::new();
    let mut seen = HashSet::new();
    let mut exhaustive = true;
    let hyperbolic = classify(spec, g, base).verdict == Verdict::Hyperbolic;
    let mut finite_order = false;
    let mut pw = spec.identity();
    for _ in 1..=max_power {
        pw = spec.multiply(&pw, g);
        if spec.is_trivial_nf(&pw) {
            finite_order = true;
            break;
        }
        let f = fixed_set(spec, &pw, base, radius);
        exhaustive &= f.exhaustive_within_radius;
        for v in f.members {
            if seen.insert(v.clone()) {
                members.push(v);
            }
        }
    }
    if !finite_order && !hyperbolic {
        finite_order = spec.is_trivial_nf(&spec.multiply(&pw, g));
    }
    VertexRegion {
        center: base.clone(),
        radius,
        members,
        exhaustive_within_radius: exhaustive,
        power_exhaustive: hyperbolic || finite_order,
    }
}

/// `(d(v, hv) - tau) / 2`, exact for hyperbolic `h`.
pub fn distance_to_axis(spec: &SplittingSpec, h: &NormalForm, tau: u64, v: &TreeVertex) -> u64 {
    (displacement(spec, h, v) - tau) / 2
}

/// Axis vertices within the ball, ordered along the axis in the direction
/// of translation.
pub fn axis_window(spec: &SplittingSpec, h: &NormalForm, base: &TreeVertex, radius: u64) -> Result<VertexRegion> {
    let class = classify(spec, h, base);
    if class.verdict != Verdict::Hyperbolic {
        return Err(Error::NotHyperbolic(spec.word_of(h).to_string()));
    }
    let tau = class.tau as i64;
    let hb = act(spec, h, base);
    let off = distance_to_axis(spec, h, class.tau, base);
    if off > radius {
        return Ok(VertexRegion::empty(base, radius));
    }
    let p = geodesic(base, &hb)[off as usize].clone();
    let reach = (radius - off) as i64;
    let seg = geodesic(&p, &act(spec, h, &p));
    let h_inv = spec.inverse(h);
    let mut pos: Vec<(i64, TreeVertex)> = Vec::new();
    let mut fwd = seg.clone();
    let mut j = 0i64;
    while j * tau <= reach {
        for (i, v) in fwd.iter().enumerate().take(tau as usize) {
            let t = j * tau + i as i64;
            if t <= reach {
                pos.push((t, v.clone()));
            }
        }
        fwd = fwd.iter().map(|v| act(spec, h, v)).collect();
        j += 1;
    }
    let mut back: Vec<TreeVertex> = seg.iter().map(|v| act(spec, &h_inv, v)).collect();
    let mut j = 1i64;
    while (j - 1) * tau < reach {
        for (i, v) in back.iter().enumerate().take(tau as usize) {
            let t = -j * tau + i as i64;
            if t >= -reach && t < 0 {
                pos.push((t, v.clone()));
            }
        }
        back = back.iter().map(|v| act(spec, &h_inv, v)).collect();
        j += 1;
    }
    pos.sort_by_key(|(t, _)| *t);
    Ok(VertexRegion {
        center: base.clone(),
        radius,
        members: pos.into_iter().map(|(_, v)| v).collect(),
        exhaustive_within_radius: true,
        power_exhaustive: true,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AcylindricityResult {
    Falsified { witness: Word, diameter: u64 },
    Consistent { elements_checked: usize, certified: bool },
}

/// Distinct elements of word length `1..=max_len` in the factor generators,
/// in breadth-first order, each with the first word that reached it.
pub fn enumerate_elements(spec: &SplittingSpec, max_len: usize) -> Vec<(Word, NormalForm)> {
    let letters: Vec<(Word, NormalForm)> = spec
        .letters()
        .into_iter()
        .map(|w| {
            let nf = spec.normal_form(&w).expect("own generators");
            (w, nf)
        })
        .collect();
    let mut seen: HashSet<NormalForm> = HashSet::from([spec.identity()]);
    let mut frontier = vec![(Word::identity(), spec.identity())];
    let mut out = Vec::new();
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (w, nf) in &frontier {
            for (lw, lnf) in &letters {
                let nf2 = spec.multiply(nf, lnf);
                if seen.insert(nf2.clone()) {
                    next.push((w.concat(lw), nf2));
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// One-sided check: falsifies `k`-acylindricity with an explicit elliptic
/// witness whose windowed fixed set is wider than `k`.
pub fn check_acylindricity(spec: &SplittingSpec, k: u64, max_len: usize, radius: u64) -> AcylindricityResult {
    let base = TreeVertex::base(Side::A);
    let elements = enumerate_elements(spec, max_len);
    for (w, nf) in &elements {
        if let Some(d) = fix_diameter_lb(spec, nf, &base, radius) {
            if d > k {
                return AcylindricityResult::Falsified {
                    witness: w.clone(),
                    diameter: d,
                };
            }
        }
    }
    AcylindricityResult::Consistent {
        elements_checked: elements.len(),
        // Trivial edge stabilizers: every nontrivial elliptic fixes one vertex.
        certified: spec.edge_is_trivial(),
    }
}

/// Convenience wrapper for words.
pub fn nf(spec: &SplittingSpec, w: &str) -> Result<NormalForm> {
    spec.normal_form(&w.parse()?)
}
