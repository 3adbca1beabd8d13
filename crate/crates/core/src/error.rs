use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("group too large: closure exceeded order cap {cap}")]
    GroupTooLarge { cap: usize },
    #[error("bad descriptor: {0}")]
    BadDescriptor(String),
    #[error("group mismatch")]
    GroupMismatch,
    #[error("empty set not generic")]
    EmptySetNotGeneric,
    #[error("not a subgroup")]
    NotASubgroup,
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("polar undefined: smallest singular value {0:e}")]
    PolarUndefined(f64),
    #[error("family not abelian")]
    FamilyNotAbelian,
    #[error("radius out of range: {0}")]
    RadiusOutOfRange(f64),
    #[error("group not abelian")]
    GroupNotAbelian,
    #[error("no catalog entry for {0}")]
    NoCatalogEntry(String),
    #[error("degree extraction failed after {attempts} seeds")]
    DegreeExtractionFailed { attempts: usize },
    #[error("group order {order} exceeds cap {cap}")]
    OrderExceedsCap { order: usize, cap: usize },
    #[error("trivial group has no nontrivial representation")]
    TrivialGroup,
    #[error("input not a homomorphism: defect {0:e}")]
    NotAHomomorphism(f64),
    #[error("correction did not converge: defect {defect:e} after {iterations} iterations")]
    CorrectionDidNotConverge { iterations: usize, defect: f64 },
    #[error("averaging degenerate: smallest singular value {0:e}")]
    AveragingDegenerate(f64),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("correction bound violated: sup distance {sup} > {bound}")]
    CorrectionBoundViolated { sup: f64, bound: f64 },
    #[error("cover construction failed: {0}")]
    CoverFailed(String),
    #[error("image not abelian")]
    ImageNotAbelian,
    #[error("image exceeds search cap {0}")]
    ImageExceedsCap(usize),
    #[error("density hypothesis violated: density {density} < alpha {alpha}")]
    DensityViolated { density: f64, alpha: f64 },
    #[error("U,V not nested correctly: {0}")]
    NotNested(String),
    #[error("eps table has no entry for delta={delta}, n={n}")]
    EpsTableMiss { delta: f64, n: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invariant violated: {0}")]
    InvariantViolated(String),
}

impl Error {
    /// Stable short name, used by the CLI when reporting failures.
    pub fn name(&self) -> &'static str {
        match self {
            Error::GroupTooLarge { .. } => "group too large",
            Error::BadDescriptor(_) => "bad descriptor",
            Error::GroupMismatch => "group mismatch",
            Error::EmptySetNotGeneric => "empty set not generic",
            Error::NotASubgroup => "not a subgroup",
            Error::InvalidMatrix(_) => "invalid matrix",
            Error::DimensionMismatch { .. } => "dimension mismatch",
            Error::PolarUndefined(_) => "polar undefined",
            Error::FamilyNotAbelian => "family not abelian",
            Error::RadiusOutOfRange(_) => "radius out of range",
            Error::GroupNotAbelian => "group not abelian",
            Error::NoCatalogEntry(_) => "no catalog entry",
            Error::DegreeExtractionFailed { .. } => "degree extraction failed",
            Error::OrderExceedsCap { .. } => "order exceeds cap",
            Error::TrivialGroup => "trivial group",
            Error::NotAHomomorphism(_) => "input not a homomorphism",
            Error::CorrectionDidNotConverge { .. } => "correction did not converge",
            Error::AveragingDegenerate(_) => "averaging degenerate",
            Error::HypothesisViolated(_) => "hypothesis violated",
            Error::CorrectionBoundViolated { .. } => "correction bound violated",
            Error::CoverFailed(_) => "cover construction failed",
            Error::ImageNotAbelian => "image not abelian",
            Error::ImageExceedsCap(_) => "image exceeds search cap",
            Error::DensityViolated { .. } => "density hypothesis violated",
            Error::NotNested(_) => "U,V not nested correctly",
            Error::EpsTableMiss { .. } => "eps table miss",
            Error::InvalidParameter(_) => "invalid parameter",
            Error::InvariantViolated(_) => "invariant violated",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
