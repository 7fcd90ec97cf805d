use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("time interval must be positive (from {from} to {to})")]
    NonPositiveInterval { from: f64, to: f64 },

    #[error("state mismatch: {0}")]
    Mismatch(String),

    #[error("post-selection overlap {overlap:.3e} is below the floor {floor:.3e}; weak value undefined")]
    NearOrthogonalPostSelection { overlap: f64, floor: f64 },

    #[error("{what} amplitude {amplitude:.3e} at the box wall exceeds {threshold:.1e}")]
    WallLeakage {
        what: &'static str,
        amplitude: f64,
        threshold: f64,
    },

    #[error("norm drift {drift:.3e} exceeds {tolerance:.1e} at t = {t:.6} (norm {norm:.15})")]
    NormDrift {
        drift: f64,
        tolerance: f64,
        t: f64,
        norm: f64,
    },

    #[error("empty support: {0}")]
    EmptySupport(String),

    #[error("config: {0}")]
    Config(String),

    #[error("unknown scenario `{name}`; valid scenarios: {valid}")]
    UnknownScenario { name: String, valid: String },

    #[error("scenario `{scenario}`: {source}")]
    Scenario {
        scenario: String,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
