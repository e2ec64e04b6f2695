use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("SO({n}) weights have {expected} entries, got {got}")]
    WrongLength { n: u32, expected: usize, got: usize },

    #[error("entries {entries:?} violate the SO({n}) dominance ordering")]
    OrderingViolation { n: u32, entries: Vec<i64> },

    #[error("group mismatch: {0}")]
    GroupMismatch(String),

    #[error("enumeration bound {bound} is below the largest |entry| {needed}")]
    BoundTooSmall { bound: i64, needed: i64 },

    #[error("{sigma} is not contained in {tau}")]
    NotContained { tau: String, sigma: String },

    #[error("C-function has a pole at s = {s}")]
    Pole { s: f64 },

    #[error("log-magnitude {log_abs} is outside the f64 range")]
    OutOfRange { log_abs: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("support of the measure for {sigma} leaves the interval {interval}")]
    SupportOutsideInterval { sigma: String, interval: String },

    #[error("evaluation point {re}{im:+}i is on or too near the support")]
    SingularPoint { re: f64, im: f64 },

    #[error("grid point {0} collides with an atom")]
    GridHitsAtom(f64),

    #[error("Laplace integral diverges: need Re z > {min_re}, got {re}")]
    TailDiverges { re: f64, min_re: f64 },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),
}
