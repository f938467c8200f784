//! Bass–Serre trees of free and amalgamated products.
//!
//! The crate covers base-group oracles, splittings with normal forms, the
//! action on the Bass–Serre tree, explicit free-subgroup witnesses,
//! word-metric entropy, closed-form systolic bounds and the
//! geometric/acylindrical dichotomy for 3-manifold descriptions.

pub mod bounds;
pub mod dichotomy;
pub mod error;
pub mod freeness;
pub mod growth;
pub mod group;
pub mod samples;
pub mod splitting;
pub mod subgroup;
pub mod tree;
pub mod word;

pub use error::{Error, Result};
pub use group::{BaseGroup, Elem, OracleDecl, OracleKind};
pub use splitting::{
    syllable_length, Elementarity, ElementarityVerdict, NormalForm, Side, SplittingKind,
    SplittingSpec, Syllable,
};
pub use subgroup::{CWord, DesignatedSubgroup, FixedCosets};
pub use word::{Generator, Letter, Word};
pub use tree::{ElementClass, TreeVertex, Verdict, VertexRegion};
pub use freeness::{Claim, FreenessWitness, OverlapBranch, OverlapReport, WitnessCase};
pub use growth::{BallCountSeries, EntropyEstimate, EntropyMethod, WeightedGenSet};
pub use bounds::{BoundsInput, BoundsReport, DominantBranch};
pub use dichotomy::{DichotomyVerdict, ManifoldDescription, PieceDescription, PieceKind, SL2Matrix};
