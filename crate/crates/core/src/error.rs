use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("azimuth is undefined for a state at a pole (rx^2 + ry^2 = {0:e})")]
    DegenerateAzimuth(f64),

    #[error("position {position} m is outside the profile coverage [0, {covered}) m")]
    OutOfRange { position: f64, covered: f64 },

    #[error("phase profile covers {covered} m but the fiber is {required} m long")]
    Coverage { covered: f64, required: f64 },

    #[error("signal ratio is undefined when theta_max is zero")]
    DegenerateRatio,

    #[error("detuning envelope is undefined at zero detuning")]
    UndefinedEnvelope,

    #[error("ensemble holds no realizations")]
    EmptyEnsemble,

    #[error("thread pool: {0}")]
    ThreadPool(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
