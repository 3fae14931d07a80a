use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value produced at time-step {step}")]
    NumericOverflow { step: usize },

    #[error("non-finite gradient in {tensor}")]
    NonFiniteGradient { tensor: String },

    #[error("non-finite training loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("integration diverged at step {step}")]
    Divergence { step: usize },

    #[error("parameter {name} = {value} outside [{low}, {high}]")]
    ParameterRange {
        name: &'static str,
        value: f64,
        low: f64,
        high: f64,
    },

    #[error("day {day} is not covered by any window")]
    CoverageGap { day: usize },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("config parse error: {0}")]
    TomlDe(#[from] toml::de::Error),

    #[error(transparent)]
    TomlSer(#[from] toml::ser::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::TomlDe(_) | Error::TomlSer(_) | Error::ParameterRange { .. } => 1,
            Error::NumericOverflow { .. }
            | Error::NonFiniteGradient { .. }
            | Error::NonFiniteLoss { .. }
            | Error::Divergence { .. } => 3,
            _ => 2,
        }
    }
}
