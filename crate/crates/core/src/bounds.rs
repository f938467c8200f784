//! Closed-form systole, volume and Margulis-type bounds.
//!
//! All bounds share the shape `(1/E) log(1 + 4/(e^(c E D) - 1))` for a
//! coefficient `c`. For `c E D > 30` the double-precision route loses
//! meaning (the result is tiny and eventually underflows), so those inputs
//! are evaluated in 256-bit floating point.

use astro_float::{BigFloat, Consts, RoundingMode};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Working precision of the high-precision route, in bits (about 77 digits).
pub const HP_BITS: usize = 256;
/// `c E D` above which the high-precision route is used.
pub const HP_THRESHOLD: f64 = 30.0;
/// Upper bound on `E D` forced whenever the hyperbolic branch falls below
/// the general bound.
pub const THRESHOLD_X: f64 = 21.0 / 125.0;

const RM: RoundingMode = RoundingMode::ToEven;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsInput {
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub k: u32,
    pub n: u32,
    /// The systolic constant `C_n`. It is not known explicitly, so it is
    /// an input; the default 1 only normalises the volume bound.
    #[serde(rename = "C_n")]
    pub c_n: f64,
}

impl BoundsInput {
    pub fn new(e: f64, d: f64, k: u32) -> Self {
        BoundsInput {
            e,
            d,
            k,
            n: 3,
            c_n: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        positive(&[("E", self.e), ("D", self.d), ("C_n", self.c_n)])?;
        if self.n == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DominantBranch {
    HyperbolicBranch,
    FreeProduct,
    /// The hyperbolic branch bound is below the general one, but then
    /// `E D <= 21/125` and that case cannot occur at all.
    HyperbolicExcluded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub input: BoundsInput,
    pub s0_general: f64,
    /// `s0_general` in scientific notation from the high-precision route,
    /// meaningful even where the double underflows.
    pub s0_general_sci: String,
    pub s0_theorem1: f64,
    pub hyperbolic_branch: f64,
    pub free_product_k0: f64,
    pub effective_systole_lb: f64,
    pub volume_lb: f64,
    pub delta0: f64,
    pub dominant_branch: DominantBranch,
    pub high_precision: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseComparison {
    pub dominant_branch: DominantBranch,
    pub x: f64,
    pub hyperbolic_branch: f64,
    pub s0_general: f64,
    pub branch_dominates: bool,
    pub below_threshold: bool,
    /// `2x < e^(-6x)`.
    pub auxiliary_holds: bool,
}

/// A value from the high-precision route.
#[derive(Clone, Debug, PartialEq)]
pub struct HpValue {
    pub value: f64,
    pub sci: String,
}

fn positive(vals: &[(&str, f64)]) -> Result<()> {
    for (name, v) in vals {
        if !(*v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(())
}

thread_local! {
    static CONSTS: std::cell::RefCell<Consts> =
        std::cell::RefCell::new(Consts::new().expect("astro-float constants cache"));
}

fn hp_to_f64(x: &BigFloat, cc: &mut Consts) -> (f64, String) {
    let s = x
        .format(astro_float::Radix::Dec, RM, cc)
        .expect("finite value formats");
    let v = s.parse::<f64>().unwrap_or(f64::NAN);
    (v, s)
}

/// `(1/E) log(1 + 4/(e^(c E D) - 1))` in double precision.
pub fn systole_formula_f64(e: f64, d: f64, c: f64) -> f64 {
    (4.0 / (c * e * d).exp_m1()).ln_1p() / e
}

/// The same formula in [`HP_BITS`]-bit arithmetic.
pub fn systole_formula_hp(e: f64, d: f64, c: f64) -> HpValue {
    CONSTS.with(|cc| hp_eval(e, d, c, &mut cc.borrow_mut()))
}

fn hp_eval(e: f64, d: f64, c: f64, cc: &mut Consts) -> HpValue {
    let p = HP_BITS;
    let be = BigFloat::from_f64(e, p);
    let t = BigFloat::from_f64(c, p)
        .mul(&be, p, RM)
        .mul(&BigFloat::from_f64(d, p), p, RM);
    let one = BigFloat::from_f64(1.0, p);
    let denom = t.exp(p, RM, cc).sub(&one, p, RM);
    let y = BigFloat::from_f64(4.0, p).div(&denom, p, RM);
    // For tiny y, 1 + y is not representable even at this precision.
    let small = BigFloat::from_f64(1e-30, p);
    let l = if y.cmp(&small) == Some(-1) {
        let y2 = y.mul(&y, p, RM);
        let y3 = y2.mul(&y, p, RM);
        y.sub(&y2.div(&BigFloat::from_f64(2.0, p), p, RM), p, RM)
            .add(&y3.div(&BigFloat::from_f64(3.0, p), p, RM), p, RM)
    } else {
        one.add(&y, p, RM).ln(p, RM, cc)
    };
    let r = l.div(&be, p, RM);
    let (value, sci) = hp_to_f64(&r, cc);
    HpValue { value, sci }
}

fn systole_formula(e: f64, d: f64, c: f64) -> Result<f64> {
    positive(&[("E", e), ("D", d)])?;
    Ok(if c * e * d > HP_THRESHOLD {
        systole_formula_hp(e, d, c).value
    } else {
        systole_formula_f64(e, d, c)
    })
}

fn coefficient(k: u32) -> f64 {
    4.0 * k as f64 + 10.0
}

/// `(1/E) log(1 + 4/(e^((4k+10) E D) - 1))`.
pub fn s0_general(e: f64, d: f64, k: u32) -> Result<f64> {
    systole_formula(e, d, coefficient(k))
}

/// The `k = 4` case, `(1/E) log(1 + 4/(e^(26 E D) - 1))`.
pub fn s0_theorem1(e: f64, d: f64) -> Result<f64> {
    s0_general(e, d, 4)
}

/// `e^(-6 D E) / E`.
pub fn hyperbolic_branch_bound(e: f64, d: f64) -> Result<f64> {
    positive(&[("E", e), ("D", d)])?;
    Ok((-6.0 * d * e).exp() / e)
}

/// `(1/E) log(1 + 4/(e^(2 D E) - 1))`, valid for torsion-free free products.
pub fn free_product_bound(e: f64, d: f64) -> Result<f64> {
    systole_formula(e, d, 2.0)
}

/// `C_n * s0_general^n`.
pub fn volume_lower_bound(e: f64, d: f64, k: u32, n: u32, c_n: f64) -> Result<f64> {
    BoundsInput { e, d, k, n, c_n }.validate()?;
    Ok(c_n * s0_general(e, d, k)?.powi(n as i32))
}

/// `s0_theorem1 / 40`.
pub fn delta0(e: f64, d: f64) -> Result<f64> {
    Ok(s0_theorem1(e, d)? / 40.0)
}

/// `2x < e^(-6x)`.
pub fn auxiliary_inequality(x: f64) -> bool {
    2.0 * x < (-6.0 * x).exp()
}

/// If `e^(-6x) < log(1 + 4/(e^((4k+10)x) - 1))` then `x <= 21/125`.
/// Vacuously true when the premise fails.
pub fn threshold_implication(x: f64, k: u32) -> bool {
    let premise = (-6.0 * x).exp() < (4.0 / (coefficient(k) * x).exp_m1()).ln_1p();
    !premise || x <= THRESHOLD_X
}

pub fn compare_case_bounds(e: f64, d: f64, k: u32) -> Result<CaseComparison> {
    positive(&[("E", e), ("D", d)])?;
    let x = e * d;
    let hyp = hyperbolic_branch_bound(e, d)?;
    let s0 = s0_general(e, d, k)?;
    let branch_dominates = hyp >= s0;
    let below_threshold = x <= THRESHOLD_X;
    let auxiliary_holds = auxiliary_inequality(x);
    let dominant_branch = if k == 0 {
        DominantBranch::FreeProduct
    } else if branch_dominates {
        DominantBranch::HyperbolicBranch
    } else if below_threshold && auxiliary_holds {
        DominantBranch::HyperbolicExcluded
    } else {
        return Err(Error::Hypothesis(format!(
            "hyperbolic branch below s0 at ED = {x} above the threshold"
        )));
    };
    Ok(CaseComparison {
        dominant_branch,
        x,
        hyperbolic_branch: hyp,
        s0_general: s0,
        branch_dominates,
        below_threshold,
        auxiliary_holds,
    })
}

pub fn bounds_report(input: &BoundsInput) -> Result<BoundsReport> {
    input.validate()?;
    let (e, d, k) = (input.e, input.d, input.k);
    let s0 = s0_general(e, d, k)?;
    let cmp = compare_case_bounds(e, d, k)?;
    Ok(BoundsReport {
        input: *input,
        s0_general: s0,
        s0_general_sci: systole_formula_hp(e, d, coefficient(k)).sci,
        s0_theorem1: s0_theorem1(e, d)?,
        hyperbolic_branch: cmp.hyperbolic_branch,
        free_product_k0: free_product_bound(e, d)?,
        effective_systole_lb: s0,
        volume_lb: volume_lower_bound(e, d, k, input.n, input.c_n)?,
        delta0: delta0(e, d)?,
        dominant_branch: cmp.dominant_branch,
        high_precision: coefficient(k) * e * d > HP_THRESHOLD,
    })
}
