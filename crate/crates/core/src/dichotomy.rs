//! Geometric versus acylindrical classification of 3-manifolds given by
//! their prime and JSJ decompositions.
//!
//! Descriptions are trusted: nothing here checks that a JSJ graph is
//! realised by an actual manifold. The verdict follows the case analysis
//! on the decomposition, and non-geometric verdicts feed the systole bounds.

use serde::{Deserialize, Serialize};

use crate::bounds::{bounds_report, free_product_bound, BoundsInput, BoundsReport};
use crate::error::{Error, Result};

type Mat = [[i64; 2]; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Mat", into = "Mat")]
pub struct SL2Matrix {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl SL2Matrix {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let det = (a as i128) * (d as i128) - (b as i128) * (c as i128);
        if det != 1 {
            return Err(Error::NotSl2(det.clamp(i64::MIN as i128, i64::MAX as i128) as i64));
        }
        Ok(SL2Matrix { a, b, c, d })
    }

    pub fn identity() -> Self {
        SL2Matrix { a: 1, b: 0, c: 0, d: 1 }
    }

    fn rows(&self) -> Mat {
        [[self.a, self.b], [self.c, self.d]]
    }
}

impl TryFrom<Mat> for SL2Matrix {
    type Error = Error;
    fn try_from(m: Mat) -> Result<Self> {
        SL2Matrix::new(m[0][0], m[0][1], m[1][0], m[1][1])
    }
}

impl From<SL2Matrix> for Mat {
    fn from(m: SL2Matrix) -> Mat {
        m.rows()
    }
}

impl std::fmt::Display for SL2Matrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}

fn mat_mul(x: &Mat, y: &Mat) -> Result<Mat> {
    let mut out = [[0i64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = x[i][0]
                .checked_mul(y[0][j])
                .and_then(|p| x[i][1].checked_mul(y[1][j]).and_then(|q| p.checked_add(q)))
                .ok_or_else(|| Error::InvalidInput("matrix entries overflow".into()))?;
        }
    }
    Ok(out)
}

pub fn sl2_trace(m: &SL2Matrix) -> i64 {
    m.a + m.d
}

pub fn sl2_mul(x: &SL2Matrix, y: &SL2Matrix) -> Result<SL2Matrix> {
    SL2Matrix::try_from(mat_mul(&x.rows(), &y.rows())?)
}

pub fn sl2_inverse(m: &SL2Matrix) -> SL2Matrix {
    SL2Matrix {
        a: m.d,
        b: -m.b,
        c: -m.c,
        d: m.a,
    }
}

pub fn is_anosov(m: &SL2Matrix) -> bool {
    sl2_trace(m).unsigned_abs() > 2
}

/// The reflection `J(x, y) = (-x, y)`.
const J: Mat = [[-1, 0], [0, 1]];

/// `J A J A^-1`; the partial products have determinant -1.
pub fn twisted_commutator(m: &SL2Matrix) -> Result<SL2Matrix> {
    let ja = mat_mul(&J, &m.rows())?;
    let jaj = mat_mul(&ja, &J)?;
    SL2Matrix::try_from(mat_mul(&jaj, &sl2_inverse(m).rows())?)
}

pub fn twisted_double_check(m: &SL2Matrix) -> bool {
    twisted_commutator(m).map(|x| is_anosov(&x)).unwrap_or(false)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Empty,
    Toral,
    SphericalPresent,
    Other,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JsjVertexType {
    Seifert,
    Hyperbolic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsjVertex {
    #[serde(rename = "type")]
    pub kind: JsjVertexType,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsjGraph {
    pub vertices: Vec<JsjVertex>,
    #[serde(default)]
    pub edges: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum PieceKind {
    #[serde(rename = "irreducible_with_jsj")]
    IrreducibleWithJsj,
    #[serde(rename = "s2xs1")]
    S2xS1,
    #[serde(rename = "rp3")]
    Rp3,
    #[serde(rename = "torus_bundle")]
    TorusBundle { monodromy: SL2Matrix },
    #[serde(rename = "twisted_double")]
    TwistedDouble { gluing: SL2Matrix },
    #[serde(rename = "geometric_atom")]
    GeometricAtom { tag: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PieceDescription {
    #[serde(flatten)]
    pub kind: PieceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jsj: Option<JsjGraph>,
}

impl PieceDescription {
    pub fn new(kind: PieceKind) -> Self {
        PieceDescription { kind, jsj: None }
    }

    pub fn jsj(vertices: &[JsjVertexType], edges: &[[usize; 2]]) -> Self {
        PieceDescription {
            kind: PieceKind::IrreducibleWithJsj,
            jsj: Some(JsjGraph {
                vertices: vertices.iter().map(|&kind| JsjVertex { kind }).collect(),
                edges: edges.to_vec(),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifoldDescription {
    pub prime_pieces: Vec<PieceDescription>,
    pub torsionless: bool,
    pub boundary: Boundary,
    pub orientable: bool,
}

impl ManifoldDescription {
    pub fn closed(pieces: Vec<PieceDescription>, torsionless: bool) -> Self {
        ManifoldDescription {
            prime_pieces: pieces,
            torsionless,
            boundary: Boundary::Empty,
            orientable: true,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: ManifoldDescription = serde_json::from_str(s)
            .map_err(|e| Error::MalformedManifold(e.to_string()))?;
        d.validate()?;
        Ok(d)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("description serialises")
    }

    pub fn validate(&self) -> Result<()> {
        if self.prime_pieces.is_empty() {
            return Err(Error::MalformedManifold("no prime pieces".into()));
        }
        for (i, p) in self.prime_pieces.iter().enumerate() {
            if p.kind == PieceKind::IrreducibleWithJsj && p.jsj.is_none() {
                return Err(Error::MalformedManifold(format!("piece {i}: missing jsj graph")));
            }
            if let Some(g) = &p.jsj {
                if g.vertices.is_empty() {
                    return Err(Error::MalformedManifold(format!("piece {i}: empty jsj graph")));
                }
                if g.edges.iter().flatten().any(|&v| v >= g.vertices.len()) {
                    return Err(Error::MalformedManifold(format!(
                        "piece {i}: jsj edge endpoint out of range"
                    )));
                }
            }
        }
        Ok(())
    }
}

pub const RP3_RP3_REASON: &str = "unique orientable non-prime, Seifert fibered space";
pub const JSJ_REASON: &str = "contains a rank 2 free abelian subgroup";
pub const PRIME_REASON: &str = "free product with two nontrivial factors other than Z/2 * Z/2";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Geometric { reason: String },
    Acylindrical { k: u32, non_elementary_reason: String },
    NotApplicable { reason: String },
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Geometric { reason } => write!(f, "geometric ({reason})"),
            Verdict::Acylindrical {
                k,
                non_elementary_reason,
            } => write!(f, "acylindrical (k={k}; {non_elementary_reason})"),
            Verdict::NotApplicable { reason } => write!(f, "not applicable ({reason})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DichotomyVerdict {
    #[serde(flatten)]
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_report: Option<BoundsReport>,
    /// Declared data the verdict overrides, e.g. a JSJ graph on an
    /// Anosov torus bundle.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub conflicts: Vec<String>,
}

fn geometric(reason: impl Into<String>) -> Verdict {
    Verdict::Geometric {
        reason: reason.into(),
    }
}

fn classify_single(p: &PieceDescription, conflicts: &mut Vec<String>) -> Verdict {
    let declared_edges = p.jsj.as_ref().is_some_and(|g| !g.edges.is_empty());
    let mut monodromy_case = |anosov: bool, what: &str| {
        if declared_edges {
            conflicts.push(format!("{what}: declared JSJ graph ignored"));
        }
        if anosov {
            geometric("Sol")
        } else {
            geometric("Seifert fibered")
        }
    };
    match &p.kind {
        PieceKind::S2xS1 => geometric("S2xR"),
        PieceKind::Rp3 => geometric("spherical"),
        PieceKind::GeometricAtom { tag } => geometric(tag.clone()),
        PieceKind::TorusBundle { monodromy } => monodromy_case(is_anosov(monodromy), "torus bundle"),
        PieceKind::TwistedDouble { gluing } => monodromy_case(twisted_double_check(gluing), "twisted double"),
        PieceKind::IrreducibleWithJsj => {
            if declared_edges {
                Verdict::Acylindrical {
                    k: 4,
                    non_elementary_reason: JSJ_REASON.into(),
                }
            } else {
                geometric("trivial JSJ decomposition")
            }
        }
    }
}

pub fn classify_manifold(desc: &ManifoldDescription) -> Result<DichotomyVerdict> {
    desc.validate()?;
    let mut conflicts = Vec::new();
    let verdict = if desc.boundary == Boundary::SphericalPresent {
        Verdict::NotApplicable {
            reason: "spherical boundary component".into(),
        }
    } else if desc.boundary == Boundary::Other {
        Verdict::NotApplicable {
            reason: "boundary is neither empty nor toral".into(),
        }
    } else if !desc.orientable {
        Verdict::NotApplicable {
            reason: "non-orientable".into(),
        }
    } else if desc.prime_pieces.len() >= 2 {
        let rp3_pair = desc.prime_pieces.len() == 2
            && desc.prime_pieces.iter().all(|p| p.kind == PieceKind::Rp3);
        if rp3_pair {
            geometric(RP3_RP3_REASON)
        } else {
            Verdict::Acylindrical {
                k: 0,
                non_elementary_reason: PRIME_REASON.into(),
            }
        }
    } else {
        classify_single(&desc.prime_pieces[0], &mut conflicts)
    };
    Ok(DichotomyVerdict {
        verdict,
        bound_report: None,
        conflicts,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifoldBounds {
    pub k: u32,
    pub systole_lb: f64,
    pub report: BoundsReport,
    /// `None` when the volume bound does not apply.
    pub volume_lb: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume_suppressed: Option<String>,
}

pub fn systole_bound_for(desc: &ManifoldDescription, e: f64, d: f64, c_n: f64) -> Result<ManifoldBounds> {
    let v = classify_manifold(desc)?;
    let k = match v.verdict {
        Verdict::Acylindrical { k, .. } => k,
        other => return Err(Error::NotApplicable(format!("no systole bound: {other}"))),
    };
    if !desc.torsionless {
        return Err(Error::NotApplicable("fundamental group has torsion".into()));
    }
    let mut input = BoundsInput::new(e, d, k);
    input.c_n = c_n;
    let report = bounds_report(&input)?;
    let systole_lb = if k == 0 {
        free_product_bound(e, d)?
    } else {
        report.s0_general
    };
    let volume_suppressed = if desc.boundary != Boundary::Empty {
        Some("manifold is not closed".to_string())
    } else if desc.prime_pieces.iter().all(|p| p.kind == PieceKind::S2xS1) {
        Some("connected sum of copies of S2xS1".to_string())
    } else {
        None
    };
    Ok(ManifoldBounds {
        k,
        systole_lb,
        volume_lb: volume_suppressed.is_none().then_some(report.volume_lb),
        report,
        volume_suppressed,
    })
}
