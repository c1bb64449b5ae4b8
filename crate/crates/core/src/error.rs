use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("ramification degree {degree} is divisible by p = {p}")]
    WildRamification { p: u64, degree: u32 },
    #[error("exp/log need p - 1 > e, got p = {p}, e = {e}")]
    ExpLogRadius { p: u64, e: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("precision loss: {0}")]
    PrecisionLoss(String),
    #[error("conductor {0} is too small for this operation")]
    ConductorTooSmall(u32),
    #[error("character is not admissible")]
    NotAdmissible,
    #[error("Gauss sum needs an odd conductor, got {0}")]
    EvenConductor(u32),
    #[error("capacity exceeded: {0}")]
    CapacityExceeded(String),
    #[error("conductor data mismatch: {0}")]
    ConductorMismatch(String),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),
    #[error("ambient field too small: {0}")]
    AmbientTooSmall(String),
    #[error("internal contradiction: {0}")]
    InternalContradiction(String),
    #[error("range violation: {0}")]
    RangeViolation(String),
    #[error("value is not invertible in the scaled cyclotomic ring")]
    NotInvertible,
    #[error("genericity for conductor 1 is only defined over unramified extensions")]
    RamifiedConductorOne,
    #[error("field mismatch: {0}")]
    FieldMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
