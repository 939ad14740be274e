use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("axis {axis} out of range for a {order}-way tensor")]
    Axis { axis: usize, order: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("state is not normalized (norm^2 = {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown state `{0}`")]
    UnknownState(String),

    #[error("no closed form recorded for `{0}`")]
    NoClosedForm(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("state file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
