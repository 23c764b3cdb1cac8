use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error in {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("density underflow at theta={theta:?}, x={x:?}")]
    Underflow { theta: Vec<f64>, x: Vec<f64> },

    #[error("Robbins-Monro iterate diverged at iteration {iteration}")]
    Diverged { iteration: usize },

    #[error("non-finite state at Euler step {step}")]
    Simulation { step: usize },

    #[error("non-positive slope estimate h'(theta*) = {0}")]
    NonPositiveSlope(f64),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            what,
            detail: detail.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
