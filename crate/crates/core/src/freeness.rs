//! Explicit free-subgroup and free-semigroup witnesses built from pairs of
//! tree automorphisms, with bounded-depth ping-pong certificates.
//!
//! The powers are the smallest the theorem allows: `p = ceil((k+1)/2)` for
//! two elliptics, `p = k+1` for an elliptic and a hyperbolic, `q = 3k+1`
//! for hyperbolics whose axes overlap in at most `3k`, and `p = 3`
//! otherwise. Certificates check normal-form distinctness of all reduced
//! words up to a depth; they refute implementation errors, they do not
//! prove freeness.

use std::collections::HashSet;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::splitting::{syllable_length, NormalForm, Side, SplittingSpec};
use crate::tree::{
    act, classify, geodesic, stabilizer_element, t_set, tree_distance, TreeVertex, Verdict,
};
use crate::word::Word;

pub const DEFAULT_DEPTH: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessCase {
    EllipticElliptic,
    EllipticHyperbolic,
    HyperbolicSmallOverlap,
    HyperbolicLargeOverlap,
    Semigroup,
    /// Powers `(h1^n, h2^n)` justified directly by the overlap bound
    /// `diam(J) < n min(tau1, tau2)`.
    PingPongPowers,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    FreeProductRank2,
    FreeSubgroupRank2,
    FreeSemigroupRank2,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreenessWitness {
    pub case: WitnessCase,
    pub generators: [Word; 2],
    pub power_used: u64,
    pub claim: Claim,
    pub certificate_depth: usize,
    pub certified: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapBranch {
    Small,
    Large,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapReport {
    /// Length of `Axis(h1) ∩ Axis(h2)` in edges; `None` when the axes are
    /// disjoint.
    pub diameter: Option<u64>,
    pub exhaustive: bool,
    pub threshold: u64,
    pub branch: OverlapBranch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductTranslationReport {
    pub tau_product: u64,
    pub distance_of_fixed_sets: u64,
}

/// Window radius that keeps the orbit points of the given elements inside.
pub fn window_radius(elems: &[&NormalForm]) -> u64 {
    let m = elems.iter().map(|g| syllable_length(g)).max().unwrap_or(0);
    2 * m as u64 + 4
}

fn base() -> TreeVertex {
    TreeVertex::base(Side::A)
}

fn pow(spec: &SplittingSpec, g: &NormalForm, n: u64) -> NormalForm {
    spec.power(g, &BigInt::from(n))
}

/// Finite order of `g`, detected up to `limit`.
fn order_up_to(spec: &SplittingSpec, g: &NormalForm, limit: u64) -> Option<u64> {
    let mut p = g.clone();
    for n in 1..=limit {
        if spec.is_trivial_nf(&p) {
            return Some(n);
        }
        p = spec.multiply(&p, g);
    }
    None
}

/// Order of an element, `None` when infinite. Hyperbolic elements have
/// infinite order; elliptic ones are conjugate into a factor.
pub fn element_order(spec: &SplittingSpec, g: &NormalForm) -> Option<u64> {
    let b = base();
    if classify(spec, g, &b).verdict == Verdict::Hyperbolic {
        return None;
    }
    let v = fixed_point(spec, g);
    let x = stabilizer_element(spec, g, &v).expect("fixed");
    spec.factor(v.side).elem_order(&x)
}

/// A vertex fixed by the elliptic element `g`: the midpoint of `[v, gv]`.
pub fn fixed_point(spec: &SplittingSpec, g: &NormalForm) -> TreeVertex {
    let b = base();
    let path = geodesic(&b, &act(spec, g, &b));
    path[(path.len() - 1) / 2].clone()
}

/// Nearest point of `Fix(g)` to `v`.
fn project_to_fix(spec: &SplittingSpec, g: &NormalForm, v: &TreeVertex) -> TreeVertex {
    let path = geodesic(v, &act(spec, g, v));
    path[(path.len() - 1) / 2].clone()
}

/// Exponents of `u` that give pairwise distinct nontrivial powers, with
/// `|e| <= depth`, smallest absolute value first.
fn syllable_exponents(spec: &SplittingSpec, u: &NormalForm, depth: usize) -> Vec<i64> {
    let ord = order_up_to(spec, u, depth as u64 + 1);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for a in 1..=depth as i64 {
        for e in [a, -a] {
            let key = match ord {
                Some(m) => {
                    let r = e.rem_euclid(m as i64);
                    if r == 0 {
                        continue;
                    }
                    r
                }
                None => e,
            };
            if seen.insert(key) {
                out.push(e);
            }
        }
    }
    out
}

/// Checks that all reduced words of length at most `depth` in `u, v` give
/// distinct elements. For generators of finite order a word is reduced in
/// the free product sense: syllables `u^i`, `v^j` alternate and none is
/// trivial.
pub fn certify_free(spec: &SplittingSpec, u: &NormalForm, v: &NormalForm, depth: usize) -> bool {
    let gens = [u, v];
    let exps = [
        syllable_exponents(spec, u, depth),
        syllable_exponents(spec, v, depth),
    ];
    let powers: Vec<Vec<(usize, NormalForm)>> = (0..2)
        .map(|i| {
            exps[i]
                .iter()
                .map(|&e| (e.unsigned_abs() as usize, spec.power(gens[i], &BigInt::from(e))))
                .collect()
        })
        .collect();
    let mut seen: HashSet<NormalForm> = HashSet::from([spec.identity()]);
    // (element, length used, side of last syllable)
    let mut stack: Vec<(NormalForm, usize, Option<usize>)> = vec![(spec.identity(), 0, None)];
    while let Some((x, len, last)) = stack.pop() {
        for side in 0..2 {
            if last == Some(side) {
                continue;
            }
            for (l, p) in &powers[side] {
                if len + l > depth {
                    continue;
                }
                let y = spec.multiply(&x, p);
                if !seen.insert(y.clone()) {
                    return false;
                }
                stack.push((y, len + l, Some(side)));
            }
        }
    }
    true
}

/// Checks that all positive words of length at most `depth` in `u, v`,
/// the empty word included, are pairwise distinct.
pub fn certify_semigroup(spec: &SplittingSpec, u: &NormalForm, v: &NormalForm, depth: usize) -> bool {
    let mut seen: HashSet<NormalForm> = HashSet::from([spec.identity()]);
    let mut layer = vec![spec.identity()];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(layer.len() * 2);
        for x in &layer {
            for g in [u, v] {
                let y = spec.multiply(x, g);
                if !seen.insert(y.clone()) {
                    return false;
                }
                next.push(y);
            }
        }
        layer = next;
    }
    true
}

fn require(spec: &SplittingSpec, g: &NormalForm, want: Verdict) -> Result<u64> {
    let c = classify(spec, g, &base());
    if c.verdict != want {
        let w = spec.word_of(g).to_string();
        return Err(match want {
            Verdict::Elliptic => Error::NotElliptic(w),
            Verdict::Hyperbolic => Error::NotHyperbolic(w),
        });
    }
    Ok(c.tau)
}

fn witness(
    spec: &SplittingSpec,
    case: WitnessCase,
    claim: Claim,
    power: u64,
    u: &NormalForm,
    v: &NormalForm,
    depth: usize,
) -> FreenessWitness {
    let certified = match claim {
        Claim::FreeSemigroupRank2 => certify_semigroup(spec, u, v, depth),
        _ => certify_free(spec, u, v, depth),
    };
    FreenessWitness {
        case,
        generators: [spec.word_of(u), spec.word_of(v)],
        power_used: power,
        claim,
        certificate_depth: depth,
        certified,
    }
}

/// `d(Fix(g1), Fix(g2))` for elliptic elements, computed through the
/// bridge between the two subtrees. Errors when the fixed sets meet.
pub fn fixed_set_distance(spec: &SplittingSpec, g1: &NormalForm, g2: &NormalForm) -> Result<u64> {
    require(spec, g1, Verdict::Elliptic)?;
    require(spec, g2, Verdict::Elliptic)?;
    let m1 = fixed_point(spec, g1);
    let y0 = project_to_fix(spec, g2, &m1);
    let x0 = project_to_fix(spec, g1, &y0);
    let d = tree_distance(&x0, &y0);
    if d == 0 {
        return Err(Error::FixedSetsIntersect);
    }
    Ok(d)
}

/// Case (i): `(g1, h^p g1 h^-p)` with `h = g1 g2` and `p = ceil((k+1)/2)`.
pub fn witness_elliptic_pair(
    spec: &SplittingSpec,
    k: u64,
    g1: &NormalForm,
    g2: &NormalForm,
    depth: usize,
) -> Result<FreenessWitness> {
    fixed_set_distance(spec, g1, g2)?;
    let p = (k + 2) / 2;
    let h = spec.multiply(g1, g2);
    let conj = spec.conjugate(&pow(spec, &h, p), g1);
    Ok(witness(
        spec,
        WitnessCase::EllipticElliptic,
        Claim::FreeProductRank2,
        p,
        g1,
        &conj,
        depth,
    ))
}

/// Case (ii): `(g, h^p g h^-p)` with `p = k+1`.
pub fn witness_elliptic_hyperbolic(
    spec: &SplittingSpec,
    k: u64,
    g: &NormalForm,
    h: &NormalForm,
    depth: usize,
) -> Result<FreenessWitness> {
    require(spec, g, Verdict::Elliptic)?;
    require(spec, h, Verdict::Hyperbolic)?;
    let p = k + 1;
    let conj = spec.conjugate(&pow(spec, h, p), g);
    Ok(witness(
        spec,
        WitnessCase::EllipticHyperbolic,
        Claim::FreeProductRank2,
        p,
        g,
        &conj,
        depth,
    ))
}

/// Walks along `Axis(h1)` from `start` while the vertices stay on
/// `Axis(h2)`; returns the number of steps, or `None` past `cap`.
fn walk_overlap(
    spec: &SplittingSpec,
    h1: &NormalForm,
    tau1: u64,
    h2: &NormalForm,
    tau2: u64,
    start: &TreeVertex,
    cap: u64,
) -> Option<u64> {
    let on2 = |v: &TreeVertex| tree_distance(v, &act(spec, h2, v)) == tau2;
    let mut seg = geodesic(start, &act(spec, h1, start));
    let mut steps = 0u64;
    loop {
        for v in seg.iter().skip(1).take(tau1 as usize) {
            if !on2(v) {
                return Some(steps);
            }
            steps += 1;
            if steps > cap {
                return None;
            }
        }
        seg = seg.iter().map(|v| act(spec, h1, v)).collect();
    }
}

/// Overlap of the axes of two hyperbolic elements, and the branch of case
/// (iii) it selects. The intersection is found exactly: project a point of
/// `Axis(h2)` onto `Axis(h1)`; the axes meet iff that projection lies on
/// `Axis(h2)`. The walk along the common segment gives up past
/// `4 * radius + 2 * (tau1 + tau2)` edges and reports the axes as equal.
pub fn overlap_report(
    spec: &SplittingSpec,
    k: u64,
    h1: &NormalForm,
    h2: &NormalForm,
    radius: u64,
) -> Result<OverlapReport> {
    let tau1 = require(spec, h1, Verdict::Hyperbolic)?;
    let tau2 = require(spec, h2, Verdict::Hyperbolic)?;
    let b = base();
    let threshold = 3 * k;
    let axis_point = |h: &NormalForm, tau: u64, v: &TreeVertex| {
        let hv = act(spec, h, v);
        let off = (tree_distance(v, &hv) - tau) / 2;
        geodesic(v, &hv)[off as usize].clone()
    };
    let p2 = axis_point(h2, tau2, &b);
    let pi = axis_point(h1, tau1, &p2);
    if tree_distance(&pi, &act(spec, h2, &pi)) != tau2 {
        return Ok(OverlapReport {
            diameter: None,
            exhaustive: true,
            threshold,
            branch: OverlapBranch::Small,
        });
    }
    let cap = 4 * radius + 2 * (tau1 + tau2);
    let h1_inv = spec.inverse(h1);
    let fwd = walk_overlap(spec, h1, tau1, h2, tau2, &pi, cap);
    let bwd = walk_overlap(spec, &h1_inv, tau1, h2, tau2, &pi, cap);
    match (fwd, bwd) {
        (Some(f), Some(r)) => {
            let d = f + r;
            Ok(OverlapReport {
                diameter: Some(d),
                exhaustive: true,
                threshold,
                branch: if d <= threshold {
                    OverlapBranch::Small
                } else {
                    OverlapBranch::Large
                },
            })
        }
        _ => Err(Error::SameAxis),
    }
}

/// Case (iii): `(h1^q, h2^q)` with `q = 3k+1` when the axes overlap in at
/// most `3k`; otherwise `(h2, h1^3 h2 h1^-3)` or, failing that,
/// `(h1, h2^3 h1 h2^-3)`.
pub fn witness_hyperbolic_pair(
    spec: &SplittingSpec,
    k: u64,
    h1: &NormalForm,
    h2: &NormalForm,
    depth: usize,
) -> Result<FreenessWitness> {
    let r = window_radius(&[h1, h2]);
    let report = overlap_report(spec, k, h1, h2, r)?;
    match report.branch {
        OverlapBranch::Small => {
            let q = 3 * k + 1;
            Ok(witness(
                spec,
                WitnessCase::HyperbolicSmallOverlap,
                Claim::FreeSubgroupRank2,
                q,
                &pow(spec, h1, q),
                &pow(spec, h2, q),
                depth,
            ))
        }
        OverlapBranch::Large => {
            let p = 3;
            let first = witness(
                spec,
                WitnessCase::HyperbolicLargeOverlap,
                Claim::FreeSubgroupRank2,
                p,
                h2,
                &spec.conjugate(&pow(spec, h1, p), h2),
                depth,
            );
            if first.certified {
                return Ok(first);
            }
            let second = witness(
                spec,
                WitnessCase::HyperbolicLargeOverlap,
                Claim::FreeSubgroupRank2,
                p,
                h1,
                &spec.conjugate(&pow(spec, h2, p), h1),
                depth,
            );
            Ok(if second.certified { second } else { first })
        }
    }
}

/// `{h1, h2}` or `{h1^-1, h2}` as a free semigroup, whichever passes the
/// positive-word distinctness check first.
pub fn semigroup_witness(
    spec: &SplittingSpec,
    h1: &NormalForm,
    h2: &NormalForm,
    depth: usize,
) -> Result<FreenessWitness> {
    let r = window_radius(&[h1, h2]);
    overlap_report(spec, 0, h1, h2, r)?;
    let h1_inv = spec.inverse(h1);
    for u in [h1, &h1_inv] {
        let w = witness(
            spec,
            WitnessCase::Semigroup,
            Claim::FreeSemigroupRank2,
            1,
            u,
            h2,
            depth,
        );
        if w.certified {
            return Ok(w);
        }
    }
    Err(Error::CertificationFailed(format!(
        "neither {{h1, h2}} nor {{h1^-1, h2}} has distinct positive words up to length {depth}"
    )))
}

/// Both sides of `tau(g1 g2) = 2 d(Fix(g1), Fix(g2))`.
pub fn verify_product_translation(spec: &SplittingSpec, g1: &NormalForm, g2: &NormalForm) -> Result<ProductTranslationReport> {
    let d = fixed_set_distance(spec, g1, g2)?;
    let tau = classify(spec, &spec.multiply(g1, g2), &base()).tau;
    Ok(ProductTranslationReport {
        tau_product: tau,
        distance_of_fixed_sets: d,
    })
}

/// Whether the windowed T-sets of two elliptic elements are disjoint.
pub fn verify_disjoint_tsets(
    spec: &SplittingSpec,
    g1: &NormalForm,
    g2: &NormalForm,
    radius: u64,
    max_power: u64,
) -> bool {
    let b = base();
    let t1 = t_set(spec, g1, &b, radius, max_power);
    let t2 = t_set(spec, g2, &b, radius, max_power);
    let s: HashSet<&TreeVertex> = t1.members.iter().collect();
    !t2.members.iter().any(|v| s.contains(v))
}

/// `(h1^n, h2^n)` once `diam(Axis(h1) ∩ Axis(h2)) < n min(tau1, tau2)` is
/// verified.
pub fn verify_ping_pong_powers(
    spec: &SplittingSpec,
    h1: &NormalForm,
    h2: &NormalForm,
    n: u64,
    depth: usize,
) -> Result<FreenessWitness> {
    let tau = require(spec, h1, Verdict::Hyperbolic)?.min(require(spec, h2, Verdict::Hyperbolic)?);
    let r = window_radius(&[h1, h2]);
    let report = overlap_report(spec, 0, h1, h2, r)?;
    if let Some(d) = report.diameter {
        if d >= n * tau {
            return Err(Error::Hypothesis(format!(
                "axis overlap {d} is not below n * min tau = {}",
                n * tau
            )));
        }
    }
    Ok(witness(
        spec,
        WitnessCase::PingPongPowers,
        Claim::FreeSubgroupRank2,
        n,
        &pow(spec, h1, n),
        &pow(spec, h2, n),
        depth,
    ))
}

/// Length bookkeeping for the elliptic branch of the systole argument, in
/// units of `D`: with `|g1| <= 2D` and `|h| <= 4D`, the conjugate
/// `h^p g1 h^-p` has length at most `(8p + 2) D`, to be compared with
/// `(4k + 10) D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessLengthCheck {
    pub k: u64,
    pub p: u64,
    pub lhs_coeff: u64,
    pub rhs_coeff: u64,
    pub holds: bool,
}

pub fn witness_length_check(k: u64) -> WitnessLengthCheck {
    let p = (k + 2) / 2;
    let lhs = 2 * p * 4 + 2;
    let rhs = 4 * k + 10;
    WitnessLengthCheck {
        k,
        p,
        lhs_coeff: lhs,
        rhs_coeff: rhs,
        holds: lhs <= rhs,
    }
}

pub fn witness_to_json(w: &FreenessWitness) -> String {
    serde_json::to_string_pretty(w).expect("witness serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;
    use crate::tree::nf;

    #[test]
    fn elliptic_pair_examples() {
        let s = samples::z2_z3();
        let (a, b) = (nf(&s, "a").unwrap(), nf(&s, "b").unwrap());
        let w = witness_elliptic_pair(&s, 0, &a, &b, 6).unwrap();
        assert_eq!(w.power_used, 1);
        assert_eq!(w.generators[0].to_string(), "a");
        let expect = s.word_of(&nf(&s, "a b a b^-1 a^-1").unwrap());
        assert_eq!(w.generators[1], expect);
        assert!(w.certified);
        assert_eq!(w.claim, Claim::FreeProductRank2);
        let w4 = witness_elliptic_pair(&s, 4, &a, &b, 6).unwrap();
        assert_eq!(w4.power_used, 3);
        assert!(w4.certified);
        assert_eq!(
            witness_elliptic_pair(&s, 0, &a, &a, 6).unwrap_err(),
            Error::FixedSetsIntersect
        );
    }

    #[test]
    fn elliptic_hyperbolic_examples() {
        let s = samples::z2_z3();
        let (a, ab) = (nf(&s, "a").unwrap(), nf(&s, "a b").unwrap());
        let w = witness_elliptic_hyperbolic(&s, 0, &a, &ab, 6).unwrap();
        assert_eq!(w.power_used, 1);
        assert!(w.certified);
        assert_eq!(witness_elliptic_hyperbolic(&s, 4, &a, &ab, 6).unwrap().power_used, 5);
        assert!(matches!(
            witness_elliptic_hyperbolic(&s, 0, &ab, &ab, 6),
            Err(Error::NotElliptic(_))
        ));
    }

    #[test]
    fn negative_control() {
        let s = samples::z_z();
        let h = nf(&s, "x y").unwrap();
        let h2 = spec_pow(&s, &h, 2);
        for depth in 2..=6 {
            assert!(!certify_free(&s, &h, &h2, depth));
        }
        assert_eq!(overlap_report(&s, 0, &h, &h2, 8).unwrap_err(), Error::SameAxis);
    }

    fn spec_pow(s: &SplittingSpec, g: &NormalForm, n: u64) -> NormalForm {
        pow(s, g, n)
    }

    #[test]
    fn hyperbolic_pair_branches() {
        let s = samples::z_z();
        let (h1, h2) = (nf(&s, "x y").unwrap(), nf(&s, "x y^-1").unwrap());
        // Both axes run through B, A and xB, then split.
        let r = overlap_report(&s, 0, &h1, &h2, 8).unwrap();
        assert_eq!(r.diameter, Some(2));
        assert_eq!(r.branch, OverlapBranch::Large);
        let w = witness_hyperbolic_pair(&s, 0, &h1, &h2, 6).unwrap();
        assert_eq!((w.case, w.power_used, w.certified), (WitnessCase::HyperbolicLargeOverlap, 3, true));
        let w = witness_hyperbolic_pair(&s, 2, &h1, &h2, 5).unwrap();
        assert_eq!((w.case, w.power_used, w.certified), (WitnessCase::HyperbolicSmallOverlap, 7, true));
    }

    #[test]
    fn product_translation_examples() {
        let s = samples::z2_z3();
        let (a, b) = (nf(&s, "a").unwrap(), nf(&s, "b").unwrap());
        let r = verify_product_translation(&s, &a, &b).unwrap();
        assert_eq!((r.tau_product, r.distance_of_fixed_sets), (2, 1));
        // a and the conjugate of a by b: fixed vertices A and bA, two apart.
        let bab = nf(&s, "b a b^-1").unwrap();
        let r = verify_product_translation(&s, &a, &bab).unwrap();
        assert_eq!((r.tau_product, r.distance_of_fixed_sets), (4, 2));
        assert_eq!(verify_product_translation(&s, &a, &a).unwrap_err(), Error::FixedSetsIntersect);
    }

    #[test]
    fn tset_examples() {
        let s = samples::z2_z3();
        let (a, b) = (nf(&s, "a").unwrap(), nf(&s, "b").unwrap());
        assert!(verify_disjoint_tsets(&s, &a, &b, 6, 4));
        assert!(certify_free(&s, &a, &b, 6));
        assert!(!verify_disjoint_tsets(&s, &a, &a, 6, 4));
        let k = samples::klein();
        let (ka, kb) = (nf(&k, "a").unwrap(), nf(&k, "b").unwrap());
        assert!(!verify_disjoint_tsets(&k, &ka, &kb, 6, 4));
    }

    #[test]
    fn witness_length_bound() {
        for k in 0..=20 {
            assert!(witness_length_check(k).holds);
        }
    }

    #[test]
    fn witness_json_round_trip() {
        let s = samples::z2_z3();
        let w = witness_elliptic_pair(&s, 0, &nf(&s, "a").unwrap(), &nf(&s, "b").unwrap(), 6).unwrap();
        let back: FreenessWitness = serde_json::from_str(&witness_to_json(&w)).unwrap();
        assert_eq!(back, w);
    }
}
