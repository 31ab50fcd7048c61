use thiserror::Error;

/// Errors raised by state construction, element application and conditioning.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("unknown path `{0}` in mode registry")]
    UnknownPath(String),
    #[error("duplicate path `{0}` in mode registry")]
    DuplicatePath(String),
    #[error("states belong to different mode registries")]
    RegistryMismatch,
    #[error("occupied modes overlap in tensor product on path `{0}`")]
    OverlappingSupport(String),
    #[error("total photon number {found} exceeds truncation {n_max}")]
    TruncationExceeded { found: u32, n_max: u32 },
    #[error("cannot normalize the zero state")]
    ZeroNorm,
    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("negative probability {0} in mixture")]
    NegativeProbability(f64),
    #[error("mixture probabilities sum to {0}, expected 1")]
    ProbabilitySum(f64),
    #[error("empty keep set in partial trace")]
    EmptyKeep,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("detector efficiency {0} outside (0, 1]")]
    InvalidEfficiency(f64),
    #[error("invalid detector configuration: {0}")]
    InvalidDetectors(String),
    #[error("click pattern does not match the detector bank: {0}")]
    PatternMismatch(String),
    #[error("conditioning on an event of zero probability")]
    ZeroProbability,
    #[error("invalid element: {0}")]
    InvalidElement(String),
    #[error("output path `{0}` is already occupied")]
    OutputOccupied(String),
    #[error("expected a state at total photon number {expected}, found {found}")]
    PhotonNumber { expected: u32, found: u32 },
    #[error("fidelity {0} outside [0, 1] beyond tolerance")]
    FidelityOutOfRange(f64),
    #[error("malformed JSON: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, FockError>;

impl From<serde_json::Error> for FockError {
    fn from(e: serde_json::Error) -> Self {
        FockError::Json(e.to_string())
    }
}
