use thiserror::Error;

/// Every failure the library can report.
///
/// Variant names are stable: the CLI prints them on the diagnostic stream.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("DuplicateTarget: agents {0} and {1} share a target location")]
    DuplicateTarget(usize, usize),
    #[error("TooFewAgents: need at least {needed} agents, got {got}")]
    TooFewAgents { needed: usize, got: usize },
    #[error("DimensionMismatch: {0}")]
    DimensionMismatch(String),
    #[error("NonFinite: {0} contains a non-finite value")]
    NonFinite(&'static str),
    #[error("InvalidStep: dt must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("InvalidHorizon: t_end must be positive and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("InvalidStride: stride must be at least 1")]
    InvalidStride,
    #[error("InvalidGapFloor: gap floor must be nonnegative, got {0}")]
    InvalidGapFloor(f64),
    #[error("NegativeCoupling: {name} = {value} must be finite and nonnegative")]
    NegativeCoupling { name: &'static str, value: f64 },
    #[error("AsymmetricTarget: entry ({0},{1}) differs from ({1},{0})")]
    AsymmetricTarget(usize, usize),
    #[error("NonzeroTargetDiagonal: entry ({0},{0}) is not zero")]
    NonzeroTargetDiagonal(usize),
    #[error("NonpositiveTarget: entry ({0},{1}) must be positive")]
    NonpositiveTarget(usize, usize),
    #[error("MissingNaturalFrequencies: the first-order model needs nu")]
    MissingNaturalFrequencies,
    #[error("InvalidWeight: {0}")]
    InvalidWeight(String),
    #[error("OutsideInjectivityRadius: |theta_j - theta_i| = {0} is not below pi")]
    OutsideInjectivityRadius(f64),
    #[error("NegativeRadius: communication weight evaluated at r = {0}")]
    NegativeRadius(f64),
    #[error("CollisionSingularity: agents {0} and {1} coincide")]
    CollisionSingularity(usize, usize),
    #[error("TooFewSamples: need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("NonpositiveSamples: sample value {0} is not positive")]
    NonpositiveSamples(f64),
    #[error("InvalidWindow: [{0}, {1}] is empty")]
    InvalidWindow(f64, f64),
    #[error("ZeroKappa2: the bounds need kappa2 > 0")]
    ZeroKappa2,
    #[error("SingleAgent: pairwise quantities need at least two agents")]
    SingleAgent,
    #[error("GapViolation: gap between agents {i} and {j} fell to {gap} at t = {t}")]
    GapViolation {
        i: usize,
        j: usize,
        t: f64,
        gap: f64,
    },
    #[error("InvalidFilippovParams: {0}")]
    InvalidFilippovParams(String),
    #[error("RootFindFailure: {0}")]
    RootFindFailure(String),
    #[error("ParseError: line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("UnknownScenario: {0}")]
    UnknownScenario(String),
    #[error("SinkError: {0}")]
    SinkError(String),
}

impl Error {
    /// The bare variant name, e.g. `GapViolation`.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DuplicateTarget(..) => "DuplicateTarget",
            Error::TooFewAgents { .. } => "TooFewAgents",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::NonFinite(_) => "NonFinite",
            Error::InvalidStep(_) => "InvalidStep",
            Error::InvalidHorizon(_) => "InvalidHorizon",
            Error::InvalidStride => "InvalidStride",
            Error::InvalidGapFloor(_) => "InvalidGapFloor",
            Error::NegativeCoupling { .. } => "NegativeCoupling",
            Error::AsymmetricTarget(..) => "AsymmetricTarget",
            Error::NonzeroTargetDiagonal(_) => "NonzeroTargetDiagonal",
            Error::NonpositiveTarget(..) => "NonpositiveTarget",
            Error::MissingNaturalFrequencies => "MissingNaturalFrequencies",
            Error::InvalidWeight(_) => "InvalidWeight",
            Error::OutsideInjectivityRadius(_) => "OutsideInjectivityRadius",
            Error::NegativeRadius(_) => "NegativeRadius",
            Error::CollisionSingularity(..) => "CollisionSingularity",
            Error::TooFewSamples { .. } => "TooFewSamples",
            Error::NonpositiveSamples(_) => "NonpositiveSamples",
            Error::InvalidWindow(..) => "InvalidWindow",
            Error::ZeroKappa2 => "ZeroKappa2",
            Error::SingleAgent => "SingleAgent",
            Error::GapViolation { .. } => "GapViolation",
            Error::InvalidFilippovParams(_) => "InvalidFilippovParams",
            Error::RootFindFailure(_) => "RootFindFailure",
            Error::ParseError { .. } => "ParseError",
            Error::UnknownScenario(_) => "UnknownScenario",
            Error::SinkError(_) => "SinkError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
