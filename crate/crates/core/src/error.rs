use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("link argument {u} outside the domain of the {family} family")]
    Domain { family: &'static str, u: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("T = {t} exceeds the supported maximum of {max}")]
    CapExceeded { t: usize, max: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed linear program: {0}")]
    MalformedLp(String),

    #[error("simplex iteration limit ({limit}) reached; phase-one objective {phase_one:e}")]
    IterationLimit { limit: usize, phase_one: f64 },

    #[error("no candidate value in the scan is feasible")]
    EmptySet,

    #[error("no observations with X1 = {x1}")]
    NoObservations { x1: u8 },

    #[error("moment does not change sign over [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("no observations in feedback cell (y1 = {y1}, x1 = {x1})")]
    EmptyCell { y1: u8, x1: u8 },

    #[error("no switchers with X1 != X2 in the sample")]
    NoSwitchers,

    #[error("estimated feedback probability {g} in cell (y1 = {y1}, x1 = {x1}) makes a weight infinite")]
    DegenerateWeight { y1: u8, x1: u8, g: f64 },

    #[error("dataset parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
