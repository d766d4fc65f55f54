use thiserror::Error;

/// Errors surfaced by system construction and orbit computations.
///
/// Offending values are carried as strings so the enum stays independent of
/// the scalar type parameter threading through the rest of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("point {value} lies on a cut; the map is not defined there")]
    CutHit { value: String },

    #[error("point {value} lies outside the interval")]
    OutsideDomain { value: String },

    #[error(
        "value {value} is within snap tolerance of {nearest} but not equal to it; \
         cannot decide which side of the cut the orbit continues on"
    )]
    GermAmbiguity { value: String, nearest: String },

    #[error("germ orbit did not become periodic within {steps} steps")]
    OrbitNotPreperiodic { steps: usize },

    #[error("cylinder enumeration exceeded the budget of {cap} intervals")]
    CylinderBudget { cap: usize },

    #[error("series inversion needs a unit constant term, got {constant}")]
    NonUnitConstantTerm { constant: String },

    #[error("{0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
