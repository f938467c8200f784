//! Growth of weighted word metrics on the free group and the free semigroup
//! of rank 2.
//!
//! Ball counts are exact: an element is determined by its reduced word, and
//! its weighted length depends only on how many letters of each type it
//! uses, so counts are sums over the lattice points `(a, b)` with
//! `a*l1 + b*l2 <= R`. When the weights and the radius are (close to)
//! rationals with small denominators the comparison is done in integers.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_DENOM: i64 = 1_000_000;
const RATIONAL_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedGenSet {
    pub generators: Vec<String>,
    pub weights: Vec<f64>,
}

impl WeightedGenSet {
    pub fn new(generators: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if generators.len() != weights.len() {
            return Err(Error::InvalidInput("one weight per generator".into()));
        }
        check_weights(&weights)?;
        Ok(WeightedGenSet {
            generators,
            weights,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyMethod {
    DpExact,
    BfsWindow,
    AnalyticRoot,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallCountSeries {
    pub weights: (f64, f64),
    pub radii: Vec<f64>,
    pub counts: Vec<BigUint>,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub lower: f64,
    pub upper: f64,
    pub value: f64,
    pub method: EntropyMethod,
    pub radius_used: f64,
    /// Absolute residual of the defining equation, for analytic roots.
    pub residual: Option<f64>,
}

fn check_weights(ws: &[f64]) -> Result<()> {
    for &w in ws {
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::InvalidInput(format!("weights must be positive, got {w}")));
        }
    }
    Ok(())
}

fn check_radius(r: f64) -> Result<()> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::InvalidInput(format!("radius must be nonnegative, got {r}")));
    }
    Ok(())
}

fn rationalize(x: f64) -> Option<Ratio<i64>> {
    let r = Ratio::<i64>::approximate_float(x)?;
    if *r.denom() > MAX_DENOM {
        return None;
    }
    let back = *r.numer() as f64 / *r.denom() as f64;
    ((back - x).abs() <= RATIONAL_TOL * x.abs().max(1.0)).then_some(r)
}

/// Decides `a*l1 + b*l2 <= R`, exactly when all three values are rational.
enum Comparator {
    Exact { l1: i128, l2: i128, r: i128 },
    Float { l1: f64, l2: f64, r: f64 },
}

impl Comparator {
    fn new(l1: f64, l2: f64, r: f64) -> Self {
        match (rationalize(l1), rationalize(l2), rationalize(r)) {
            (Some(p), Some(q), Some(s)) => {
                let lcm = num_integer::lcm(num_integer::lcm(*p.denom(), *q.denom()), *s.denom()) as i128;
                let scale = |x: Ratio<i64>| *x.numer() as i128 * (lcm / *x.denom() as i128);
                Comparator::Exact {
                    l1: scale(p),
                    l2: scale(q),
                    r: scale(s),
                }
            }
            _ => Comparator::Float { l1, l2, r },
        }
    }

    fn within(&self, a: u64, b: u64) -> bool {
        match self {
            Comparator::Exact { l1, l2, r } => a as i128 * l1 + b as i128 * l2 <= *r,
            Comparator::Float { l1, l2, r } => a as f64 * l1 + b as f64 * l2 <= *r,
        }
    }

    fn is_exact(&self) -> bool {
        matches!(self, Comparator::Exact { .. })
    }
}

/// `n[a][b]`: reduced words of the free group with `a` letters `g1^±1` and
/// `b` letters `g2^±1`.
fn free_group_strata(amax: usize, bmax: usize) -> Vec<Vec<BigUint>> {
    // f[t][a][b]: words ending in a letter of type t.
    let zero = || vec![vec![BigUint::zero(); bmax + 1]; amax + 1];
    let mut f = [zero(), zero()];
    let two = BigUint::from(2u32);
    for a in 0..=amax {
        for b in 0..=bmax {
            if a >= 1 {
                let mut v = if a == 1 && b == 0 { two.clone() } else { BigUint::zero() };
                v += &f[0][a - 1][b];
                v += &f[1][a - 1][b] * &two;
                f[0][a][b] = v;
            }
            if b >= 1 {
                let mut v = if b == 1 && a == 0 { two.clone() } else { BigUint::zero() };
                v += &f[1][a][b - 1];
                v += &f[0][a][b - 1] * &two;
                f[1][a][b] = v;
            }
        }
    }
    let mut n = zero();
    for a in 0..=amax {
        for b in 0..=bmax {
            n[a][b] = if a == 0 && b == 0 {
                BigUint::one()
            } else {
                &f[0][a][b] + &f[1][a][b]
            };
        }
    }
    n
}

/// `C(a+b, a)`: positive words with `a` letters `g1` and `b` letters `g2`.
fn semigroup_strata(amax: usize, bmax: usize) -> Vec<Vec<BigUint>> {
    let mut n = vec![vec![BigUint::one(); bmax + 1]; amax + 1];
    for a in 1..=amax {
        for b in 1..=bmax {
            n[a][b] = &n[a - 1][b] + &n[a][b - 1];
        }
    }
    n
}

fn lattice_count(
    l1: f64,
    l2: f64,
    r: f64,
    strata: fn(usize, usize) -> Vec<Vec<BigUint>>,
) -> Result<(BigUint, bool)> {
    check_weights(&[l1, l2])?;
    check_radius(r)?;
    let cmp = Comparator::new(l1, l2, r);
    // One extra step absorbs float slack in the floor; the comparator decides.
    let amax = (r / l1).floor() as usize + 1;
    let bmax = (r / l2).floor() as usize + 1;
    let n = strata(amax, bmax);
    let mut total = BigUint::zero();
    for (a, row) in n.iter().enumerate() {
        if !cmp.within(a as u64, 0) {
            break;
        }
        for (b, x) in row.iter().enumerate() {
            if !cmp.within(a as u64, b as u64) {
                break;
            }
            total += x;
        }
    }
    Ok((total, cmp.is_exact()))
}

/// Elements of `F2 = <g1, g2>` of weighted length at most `r`.
pub fn ball_count_free_group(l1: f64, l2: f64, r: f64) -> Result<BigUint> {
    lattice_count(l1, l2, r, free_group_strata).map(|x| x.0)
}

/// Positive words in `g1, g2` of weighted length at most `r`.
pub fn ball_count_free_semigroup(l1: f64, l2: f64, r: f64) -> Result<BigUint> {
    lattice_count(l1, l2, r, semigroup_strata).map(|x| x.0)
}

fn series(
    l1: f64,
    l2: f64,
    radii: &[f64],
    strata: fn(usize, usize) -> Vec<Vec<BigUint>>,
) -> Result<BallCountSeries> {
    let mut counts = Vec::with_capacity(radii.len());
    let mut exact = true;
    for w in radii.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidInput("radii must be increasing".into()));
        }
    }
    for &r in radii {
        let (c, ex) = lattice_count(l1, l2, r, strata)?;
        exact &= ex;
        counts.push(c);
    }
    Ok(BallCountSeries {
        weights: (l1, l2),
        radii: radii.to_vec(),
        counts,
        exact,
    })
}

pub fn free_group_series(l1: f64, l2: f64, radii: &[f64]) -> Result<BallCountSeries> {
    series(l1, l2, radii, free_group_strata)
}

pub fn free_semigroup_series(l1: f64, l2: f64, radii: &[f64]) -> Result<BallCountSeries> {
    series(l1, l2, radii, semigroup_strata)
}

/// `step, 2*step, ..., n*step`.
pub fn radii_grid(step: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 * step).collect()
}

fn ln_big(x: &BigUint) -> f64 {
    match x.to_f64() {
        Some(f) if f.is_finite() => f.ln(),
        _ => {
            let bits = x.bits();
            let shifted = x >> (bits - 64);
            shifted.to_f64().unwrap().ln() + (bits - 64) as f64 * std::f64::consts::LN_2
        }
    }
}

/// Growth-rate bracket from a ball-count series: the global rate
/// `log N(R) / R` at the largest radius and the slope of `log N` over the
/// last third of the radii.
pub fn entropy_from_counts(s: &BallCountSeries) -> Result<EntropyEstimate> {
    let n = s.radii.len();
    if n < 3 || s.counts.len() != n {
        return Err(Error::InvalidInput("need at least 3 sampled radii".into()));
    }
    let method = if s.exact {
        EntropyMethod::DpExact
    } else {
        EntropyMethod::BfsWindow
    };
    let r_last = s.radii[n - 1];
    if s.counts[0] == s.counts[n - 1] {
        return Ok(EntropyEstimate {
            lower: 0.0,
            upper: 0.0,
            value: 0.0,
            method,
            radius_used: r_last,
            residual: None,
        });
    }
    let j = (2 * (n - 1)) / 3;
    let j = j.min(n - 2);
    let global = ln_big(&s.counts[n - 1]) / r_last;
    let tail = (ln_big(&s.counts[n - 1]) - ln_big(&s.counts[j])) / (r_last - s.radii[j]);
    Ok(EntropyEstimate {
        lower: global.min(tail),
        upper: global.max(tail),
        value: tail,
        method,
        radius_used: r_last,
        residual: None,
    })
}

/// Bisection for the root of an increasing function, bracket `[1e-9, hi]`
/// with `hi` grown geometrically from `1/min(l)`.
fn bisect_increasing(f: impl Fn(f64) -> f64, start: f64) -> f64 {
    let mut lo = 1e-9;
    let mut hi = start;
    while f(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-15 * hi {
            break;
        }
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if f(lo).abs() <= f(hi).abs() {
        lo
    } else {
        hi
    }
}

fn analytic(value: f64, residual: f64) -> EntropyEstimate {
    EntropyEstimate {
        lower: value,
        upper: value,
        value,
        method: EntropyMethod::AnalyticRoot,
        radius_used: f64::INFINITY,
        residual: Some(residual),
    }
}

/// Positive root of `(e^(E l1) - 1)(e^(E l2) - 1) = 4`.
pub fn free_group_entropy_root(l1: f64, l2: f64) -> Result<EntropyEstimate> {
    check_weights(&[l1, l2])?;
    let f = |e: f64| (e * l1).exp_m1() * (e * l2).exp_m1() - 4.0;
    let e = bisect_increasing(f, 1.0 / l1.min(l2));
    Ok(analytic(e, f(e).abs()))
}

/// Positive root of `e^(-E l1) + e^(-E l2) = 1`, the growth rate of the
/// weighted free semigroup.
pub fn semigroup_entropy_root(l1: f64, l2: f64) -> Result<EntropyEstimate> {
    check_weights(&[l1, l2])?;
    let g = |e: f64| 1.0 - (-e * l1).exp() - (-e * l2).exp();
    let e = bisect_increasing(g, 1.0 / l1.min(l2));
    Ok(analytic(e, g(e).abs()))
}

/// `((1+a) log(1+a) - a log a) / (l1 + a l2)`.
pub fn bcg_objective(a: f64, l1: f64, l2: f64) -> f64 {
    // (1+a) log(1+a) - a log a, rearranged to avoid cancellation at large a
    (a.ln_1p() + a * (1.0 / a).ln_1p()) / (l1 + a * l2)
}

const BCG_GRID: (f64, f64, f64) = (-40.0, 40.0, 0.25);

fn bcg_grid(l1: f64, l2: f64) -> Vec<(f64, f64)> {
    let (lo, hi, step) = BCG_GRID;
    let n = ((hi - lo) / step).round() as usize;
    (0..=n)
        .map(|i| {
            let u = lo + i as f64 * step;
            (u, bcg_objective(u.exp(), l1, l2))
        })
        .collect()
}

/// Whether the sampled objective rises then falls (no interior dip), the
/// property golden-section search relies on.
pub fn bcg_unimodal_on_grid(l1: f64, l2: f64) -> bool {
    let g = bcg_grid(l1, l2);
    let peak = g
        .iter()
        .enumerate()
        .max_by(|x, y| x.1 .1.total_cmp(&y.1 .1))
        .unwrap()
        .0;
    g[..=peak].windows(2).all(|w| w[1].1 >= w[0].1) && g[peak..].windows(2).all(|w| w[1].1 <= w[0].1)
}

/// The supremum over `a > 0` of [`bcg_objective`], by golden-section search
/// in `u = log a` around the best grid point.
pub fn bcg_lower_bound(l1: f64, l2: f64) -> Result<f64> {
    check_weights(&[l1, l2])?;
    let g = bcg_grid(l1, l2);
    let i = g
        .iter()
        .enumerate()
        .max_by(|x, y| x.1 .1.total_cmp(&y.1 .1))
        .unwrap()
        .0;
    let step = BCG_GRID.2;
    let (mut a, mut b) = (g[i].0 - step, g[i].0 + step);
    let phi = |u: f64| bcg_objective(u.exp(), l1, l2);
    let inv_gr = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_gr * (b - a);
    let mut d = a + inv_gr * (b - a);
    let (mut fc, mut fd) = (phi(c), phi(d));
    while b - a > 1e-12 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_gr * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_gr * (b - a);
            fd = phi(d);
        }
    }
    Ok(fc.max(fd).max(g[i].1))
}

/// The proof step that picks `a = E l1`: whenever `l1 < e^(-E l2) / E`,
/// the objective at that `a` exceeds `E`, contradicting `Ent <= E`.
/// Returns `(hypothesis holds, objective at a = E l1)`.
pub fn bcg_proof_step(e: f64, l1: f64, l2: f64) -> (bool, f64) {
    let hyp = l1 < (-e * l2).exp() / e;
    (hyp, bcg_objective(e * l1, l1, l2))
}

/// Ball nesting for two weightings of the same group: with pointwise
/// smaller weights the balls are larger.
pub fn monotonicity_check(s1: &BallCountSeries, s2: &BallCountSeries) -> Result<bool> {
    if s1.radii != s2.radii {
        return Err(Error::InvalidInput("series must share radii".into()));
    }
    let le = |x: (f64, f64), y: (f64, f64)| x.0 <= y.0 && x.1 <= y.1;
    let (small, large) = if le(s1.weights, s2.weights) {
        (s1, s2)
    } else if le(s2.weights, s1.weights) {
        (s2, s1)
    } else {
        return Err(Error::InvalidInput(format!(
            "weights {:?} and {:?} are not pointwise comparable",
            s1.weights, s2.weights
        )));
    };
    Ok(small.counts.iter().zip(&large.counts).all(|(a, b)| a >= b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    /// Brute-force oracle: enumerate reduced words letter by letter.
    fn enumerate_free(l1: f64, l2: f64, r: f64) -> u64 {
        // letters 0,1 = g1^±1, 2,3 = g2^±1
        let w = [l1, l1, l2, l2];
        let mut seen: HashSet<Vec<u8>> = HashSet::from([vec![]]);
        let mut frontier: Vec<(Vec<u8>, f64)> = vec![(vec![], 0.0)];
        while let Some((word, len)) = frontier.pop() {
            for l in 0..4u8 {
                if let Some(&last) = word.last() {
                    if last ^ 1 == l {
                        continue;
                    }
                }
                let nl = len + w[l as usize];
                if nl <= r + 1e-9 {
                    let mut nw = word.clone();
                    nw.push(l);
                    if seen.insert(nw.clone()) {
                        frontier.push((nw, nl));
                    }
                }
            }
        }
        seen.len() as u64
    }

    fn enumerate_semigroup(l1: f64, l2: f64, r: f64) -> u64 {
        fn go(len: f64, l1: f64, l2: f64, r: f64) -> u64 {
            let mut n = 1;
            if len + l1 <= r + 1e-9 {
                n += go(len + l1, l1, l2, r);
            }
            if len + l2 <= r + 1e-9 {
                n += go(len + l2, l1, l2, r);
            }
            n
        }
        go(0.0, l1, l2, r)
    }

    #[test]
    fn free_group_examples() {
        assert_eq!(ball_count_free_group(1.0, 1.0, 1.0).unwrap(), BigUint::from(5u32));
        for n in 0..=12u32 {
            let expect = BigUint::from(2u32) * BigUint::from(3u32).pow(n) - 1u32;
            assert_eq!(ball_count_free_group(1.0, 1.0, n as f64).unwrap(), expect);
        }
        for n in 0..=8 {
            assert_eq!(
                ball_count_free_group(1.0, 1.0, n as f64).unwrap(),
                BigUint::from(enumerate_free(1.0, 1.0, n as f64))
            );
        }
        // e, g1^±1, g1^±2, g2^±1.
        assert_eq!(enumerate_free(1.0, 2.0, 2.0), 7);
        assert_eq!(ball_count_free_group(1.0, 2.0, 2.0).unwrap(), BigUint::from(7u32));
    }

    #[test]
    fn semigroup_examples() {
        for n in 0..=10u32 {
            assert_eq!(
                ball_count_free_semigroup(1.0, 1.0, n as f64).unwrap(),
                BigUint::from(2u32).pow(n + 1) - 1u32
            );
        }
        // e, a, b, aa, ab, ba, aaa.
        assert_eq!(enumerate_semigroup(1.0, 2.0, 3.0), 7);
        assert_eq!(ball_count_free_semigroup(1.0, 2.0, 3.0).unwrap(), BigUint::from(7u32));
        assert_eq!(ball_count_free_semigroup(1.0, 2.0, 0.0).unwrap(), BigUint::one());
    }

    #[test]
    fn rational_lattice_is_exact() {
        // 3 * 0.1 + 0 * 0.7 = 0.3 must be inside the ball of radius 0.3
        // although 0.1 * 3.0 > 0.3 in floating point.
        assert!(0.1 * 3.0 > 0.3);
        let c = ball_count_free_semigroup(0.1, 0.7, 0.3).unwrap();
        assert_eq!(c, BigUint::from(4u32));
    }

    #[test]
    fn entropy_estimates() {
        let s = free_group_series(1.0, 1.0, &radii_grid(1.0, 15)).unwrap();
        let e = entropy_from_counts(&s).unwrap();
        assert!((e.value - 3f64.ln()).abs() < 5e-2);
        assert!(e.lower <= e.upper && s.exact);
        let s = free_semigroup_series(1.0, 1.0, &radii_grid(1.0, 20)).unwrap();
        assert!((entropy_from_counts(&s).unwrap().value - 2f64.ln()).abs() < 5e-2);
        let flat = BallCountSeries {
            weights: (1.0, 1.0),
            radii: vec![1.0, 2.0, 3.0, 4.0],
            counts: vec![BigUint::from(6u32); 4],
            exact: true,
        };
        assert_eq!(entropy_from_counts(&flat).unwrap().value, 0.0);
    }

    #[test]
    fn roots() {
        let r = free_group_entropy_root(1.0, 1.0).unwrap();
        assert!((r.value - 3f64.ln()).abs() < 1e-12);
        assert!(r.residual.unwrap() <= 1e-12);
        // (t-1)^2 (t+1) = 4 with t = e^E: the cubic t^3 - t^2 - t - 3 = 0.
        let t = free_group_entropy_root(1.0, 2.0).unwrap().value.exp();
        assert!((t * t * t - t * t - t - 3.0).abs() < 1e-11);
        let c = 2.5;
        assert!((free_group_entropy_root(c, c).unwrap().value - 3f64.ln() / c).abs() < 1e-12);
        let s = semigroup_entropy_root(1.0, 1.0).unwrap();
        assert!((s.value - 2f64.ln()).abs() < 1e-12);
        let golden = ((1.0 + 5f64.sqrt()) / 2.0).ln();
        assert!((semigroup_entropy_root(1.0, 2.0).unwrap().value - golden).abs() < 1e-12);
    }

    #[test]
    fn bcg() {
        assert!((bcg_lower_bound(1.0, 1.0).unwrap() - 2f64.ln()).abs() < 1e-10);
        let v = bcg_lower_bound(1.0, 2.0).unwrap();
        let s = semigroup_entropy_root(1.0, 2.0).unwrap().value;
        assert!(v > 0.0 && v <= s + 1e-9);
        assert!(bcg_unimodal_on_grid(1.0, 2.0));
    }

    #[test]
    fn monotonicity() {
        let r = radii_grid(1.0, 8);
        let a = free_group_series(1.0, 1.0, &r).unwrap();
        let b = free_group_series(1.0, 2.0, &r).unwrap();
        assert!(monotonicity_check(&a, &b).unwrap());
        assert!(monotonicity_check(&a, &a).unwrap());
        let c = free_group_series(1.0, 3.0, &r).unwrap();
        let d = free_group_series(2.0, 1.0, &r).unwrap();
        assert!(monotonicity_check(&c, &d).is_err());
    }

    const GRID: [f64; 3] = [0.5, 1.0, 2.0];

    #[test]
    fn analytic_and_empirical_agree() {
        for &l1 in &GRID {
            for &l2 in &GRID {
                let radii = radii_grid(l1.min(l2), 18);
                let e = entropy_from_counts(&free_group_series(l1, l2, &radii).unwrap()).unwrap();
                let root = free_group_entropy_root(l1, l2).unwrap().value;
                assert!((e.value - root).abs() <= 5e-2, "{l1} {l2}: {} vs {root}", e.value);
            }
        }
    }

    #[test]
    fn dp_matches_enumeration_on_grid() {
        for &l1 in &GRID {
            for &l2 in &GRID {
                let m = l1.min(l2);
                let mut r = 0.0;
                while r <= 8.0 * m {
                    assert_eq!(
                        ball_count_free_group(l1, l2, r).unwrap(),
                        BigUint::from(enumerate_free(l1, l2, r))
                    );
                    assert_eq!(
                        ball_count_free_semigroup(l1, l2, r).unwrap(),
                        BigUint::from(enumerate_semigroup(l1, l2, r))
                    );
                    r += 0.5;
                }
            }
        }
    }

    proptest! {
        #[test]
        fn root_monotone_and_scaling(l1 in 0.1f64..5.0, l2 in 0.1f64..5.0, c in 0.2f64..5.0) {
            let e = free_group_entropy_root(l1, l2).unwrap().value;
            prop_assert!(free_group_entropy_root(l1 * 1.1, l2).unwrap().value < e);
            prop_assert!(free_group_entropy_root(l1, l2 * 1.1).unwrap().value < e);
            let scaled = free_group_entropy_root(c * l1, c * l2).unwrap().value;
            prop_assert!((scaled - e / c).abs() <= 1e-10 * e / c);
            let s = semigroup_entropy_root(l1, l2).unwrap();
            prop_assert!(s.residual.unwrap() <= 1e-12);
            prop_assert!(bcg_lower_bound(l1, l2).unwrap() <= s.value + 1e-9);
            prop_assert!(bcg_unimodal_on_grid(l1, l2));
        }

        #[test]
        fn proof_step(e in 0.05f64..5.0, l2 in 0.05f64..5.0, frac in 0.01f64..0.999) {
            let l1 = frac * (-e * l2).exp() / e;
            let (hyp, value) = bcg_proof_step(e, l1, l2);
            prop_assert!(hyp);
            prop_assert!(value > e);
        }
    }
}
