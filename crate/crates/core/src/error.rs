use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("degenerate polynomial: every shifted coefficient is below tolerance")]
    DegeneratePolynomial,

    #[error("constant polynomial has no quotient construction")]
    ConstantPolynomial,

    #[error("root finder did not converge after {iterations} iterations (max residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("argument undefined at origin")]
    ArgumentAtOrigin,

    #[error("outside A_{m}: f_m(z) = f_m(w) with z != w, or z = w = 0")]
    OutsideDomain { m: u32 },

    #[error("outer form out of domain: |z| = {modulus:e} < {threshold:e}")]
    OuterFormDomain { modulus: f64, threshold: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical overflow: {0}")]
    Overflow(String),

    #[error("round trip failed at {point}: error {error:e}")]
    RoundTrip { point: String, error: f64 },

    #[error("fiber residual {residual:e} exceeds tolerance at target {target}")]
    FiberResidual { target: String, residual: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
