use thiserror::Error;

/// Errors raised by the geometry, numerics, slice, and foliation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{quantity} = {value} is outside the domain {domain}")]
    Domain {
        quantity: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("point (T = {t}, X = {x}) lies beyond the r = 0 singularity")]
    BeyondSingularity { t: f64, x: f64 },

    #[error("jet is not spacelike (spacelike margin {margin})")]
    NotSpacelike { margin: f64 },

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("quadrature missed tolerance {tol}: estimate {estimate} with error {error}")]
    Accuracy { estimate: f64, error: f64, tol: f64 },

    #[error("step size underflow at x = {x} after {accepted} accepted steps")]
    StepUnderflow { x: f64, accepted: usize },

    #[error("no TSS-CMC slice for H = {h}, c = {c}: {reason}")]
    NoSlice { h: f64, c: f64, reason: String },

    #[error("X = {x} is outside the sampled range [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },

    #[error("invalid foliation curve: {0}")]
    InvalidCurve(String),

    #[error("locate failed: {0}")]
    Locate(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(quantity: &'static str, value: f64, domain: &'static str) -> Error {
    Error::Domain {
        quantity,
        value,
        domain,
    }
}
