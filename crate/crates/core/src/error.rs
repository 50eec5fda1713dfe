use thiserror::Error;

/// Errors raised anywhere in the pipeline, from gas-law evaluation to the time integrator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate shock: {0}")]
    DegenerateShock(String),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("inconsistent data: {0}")]
    InconsistentData(String),
    #[error("insufficient resolution: {0}")]
    Resolution(String),
    #[error("inadmissible initial data: {0}")]
    InadmissibleData(String),
    #[error("compatibility violated: {0}")]
    Compatibility(String),
    #[error("divergent integral: {0}")]
    Divergence(String),
    #[error("positivity lost at t = {t:.6e}: {detail}")]
    Positivity { t: f64, detail: String },
    #[error("blow-up at t = {t:.6e}: {detail}")]
    BlowUp { t: f64, detail: String },
    #[error("wall-clock budget exceeded at t = {t:.6e}")]
    Timeout { t: f64 },
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Process exit code for command-line front ends.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Positivity { .. } | Error::BlowUp { .. } => 4,
            Error::Timeout { .. } => 5,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
