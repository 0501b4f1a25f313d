use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid arrival spec: {0}")]
    InvalidSpec(String),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(
        "lambda_L + lambda_H = {total} violates the stability requirement that the \
         input rate does not overwhelm the service rate (need lambda_L + lambda_H < 1)"
    )]
    Unstable { total: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("pmf is not normalized: sums to {sum}")]
    NotNormalized { sum: f64 },

    #[error("window too thin: {points} usable points (need {needed}), achieved depth {achieved_depth:e}")]
    WindowTooThin {
        points: usize,
        needed: usize,
        achieved_depth: f64,
    },

    #[error("exponent methods disagree: sup form {sup}, inf form {inf}")]
    MethodsDisagree { sup: f64, inf: f64 },

    #[error("queue counter overflow at slot {slot}")]
    CounterOverflow { slot: u64 },

    #[error("coupling dominance violated {count} times (first at slot {first_slot})")]
    DominanceViolated { count: u64, first_slot: u64 },

    #[error(
        "power iteration did not converge: residual {residual:e} after {iterations} iterations"
    )]
    NonConvergence { residual: f64, iterations: usize },

    #[error("folded mass {folded:e} at cap exceeds bound {bound:e}")]
    FoldedMass { folded: f64, bound: f64 },

    #[error("horizon {horizon} too short (need at least {needed})")]
    HorizonTooShort { horizon: u64, needed: u64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn spec(message: impl Into<String>) -> Self {
        Error::InvalidSpec(message.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
