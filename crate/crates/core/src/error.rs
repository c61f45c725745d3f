use thiserror::Error;

/// Every failure the library can report.
///
/// `is_validation` splits them into input problems and computation outcomes;
/// the CLI maps the two groups to different exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDist(String),
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("absolute continuity violated at state {state}")]
    AbsoluteContinuityViolation { state: i64 },
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("zero mass at state {state}")]
    ZeroMassState { state: i64 },
    #[error("multi-start ascent did not agree: best {best}, runner-up {runner_up}")]
    ConvergenceFailure { best: f64, runner_up: f64 },
    #[error("kernel is not reversible with respect to its stationary law")]
    NotReversible,
    #[error("enumeration too large: {count} paths exceed the {limit} cap")]
    TooLarge { count: f64, limit: u64 },
    #[error("invalid Hoelder schedule: {0}")]
    ScheduleInvalid(String),
    #[error("unsupported process for this route: {0}")]
    UnsupportedProcess(String),
    #[error("marginal at step {step} has zero mass at state {state}")]
    ZeroMarginal { step: usize, state: i64 },
    #[error("Hellinger integral equals one; the quantity is degenerate")]
    DegenerateH,
    #[error("tail function is already below 1/2 at r = 0")]
    NoHalfPoint,
    #[error("chain is not contracting (a = 0)")]
    NotContracting,
    #[error("t = {t} is below the validity floor {floor}")]
    PreconditionT { t: f64, floor: f64 },
    #[error("no crossover: {0}")]
    NoCrossover(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("state {state} is outside the support at step {step}")]
    OutOfSupport { step: usize, state: i64 },
    #[error("invalid prefix: {0}")]
    InvalidPrefix(String),
    #[error("kernel has no unique stationary distribution")]
    NoStationary,
    #[error("target {target} is below the attainable floor {floor}")]
    Unreachable { target: f64, floor: f64 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by malformed input rather than by the mathematics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidDist(_)
                | Error::InvalidKernel(_)
                | Error::InvalidParam(_)
                | Error::Parse(_)
                | Error::ScheduleInvalid(_)
                | Error::InvalidPrefix(_)
                | Error::Json(_)
                | Error::Csv(_)
        )
    }

    /// Stable identifier used in structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidDist(_) => "InvalidDist",
            Error::InvalidKernel(_) => "InvalidKernel",
            Error::InvalidParam(_) => "InvalidParam",
            Error::Parse(_) => "Parse",
            Error::AbsoluteContinuityViolation { .. } => "AbsoluteContinuityViolation",
            Error::DomainMismatch(_) => "DomainMismatch",
            Error::ZeroMassState { .. } => "ZeroMassState",
            Error::ConvergenceFailure { .. } => "ConvergenceFailure",
            Error::NotReversible => "NotReversible",
            Error::TooLarge { .. } => "TooLarge",
            Error::ScheduleInvalid(_) => "ScheduleInvalid",
            Error::UnsupportedProcess(_) => "UnsupportedProcess",
            Error::ZeroMarginal { .. } => "ZeroMarginal",
            Error::DegenerateH => "DegenerateH",
            Error::NoHalfPoint => "NoHalfPoint",
            Error::NotContracting => "NotContracting",
            Error::PreconditionT { .. } => "PreconditionT",
            Error::NoCrossover(_) => "NoCrossover",
            Error::Unsupported(_) => "Unsupported",
            Error::OutOfSupport { .. } => "OutOfSupport",
            Error::InvalidPrefix(_) => "InvalidPrefix",
            Error::NoStationary => "NoStationary",
            Error::Unreachable { .. } => "Unreachable",
            Error::Io(_) => "IoError",
            Error::Csv(_) => "CsvError",
            Error::Json(_) => "JsonError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
