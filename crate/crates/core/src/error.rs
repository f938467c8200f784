use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid generator name `{0}`")]
    InvalidGeneratorName(String),
    #[error("duplicate generator name `{0}`")]
    DuplicateGenerator(String),
    #[error("generator `{0}` does not belong to this group")]
    ForeignGenerator(String),
    #[error("cannot parse word token `{0}`")]
    WordSyntax(String),
    #[error("invalid group declaration: {0}")]
    InvalidOracle(String),
    #[error("invalid splitting: {0}")]
    InvalidSplitting(String),
    #[error("HNN extensions are not supported; only free and amalgamated products")]
    HnnUnsupported,
    #[error("unsupported edge subgroup: {0}")]
    UnsupportedSubgroup(String),
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("element `{0}` is not hyperbolic")]
    NotHyperbolic(String),
    #[error("element `{0}` is not elliptic")]
    NotElliptic(String),
    #[error("fixed sets intersect inside the window")]
    FixedSetsIntersect,
    #[error("axes coincide on the explored window")]
    SameAxis,
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),
    #[error("certification failed: {0}")]
    CertificationFailed(String),
    #[error("invalid numeric input: {0}")]
    InvalidInput(String),
    #[error("matrix determinant is {0}, expected 1")]
    NotSl2(i64),
    #[error("malformed manifold description: {0}")]
    MalformedManifold(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
