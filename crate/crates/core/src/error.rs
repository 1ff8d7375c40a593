use num_complex::Complex64;
use thiserror::Error;

/// Errors shared by all numerical modules in this crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An iterative procedure (quadrature, Newton, fixed point) ran out of
    /// budget before reaching the requested tolerance.
    #[error("no convergence in {context}: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    NoConvergence {
        context: String,
        residual: f64,
        tolerance: f64,
    },

    /// A bracketed root search was handed endpoints with the same sign.
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo:.6e}, f(hi) = {f_hi:.6e}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    /// A NaN or infinity appeared where a finite value is required.
    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    /// The requested evaluation point lies on a branch-cut ray, where the
    /// continued function is two-valued.
    #[error("evaluation point {omega} lies on a branch cut")]
    OnCut { omega: Complex64 },

    /// The operation has no defined meaning for this model kind.
    #[error("unsupported for this model: {context}")]
    UnsupportedModel { context: String },

    /// The level does not couple to the band at its own energy, so the
    /// requested rate-based quantity is undefined.
    #[error("level is decoupled: coupling density vanishes at the level energy")]
    DecoupledLevel,

    /// Input data violates a structural precondition (ordering, counts,
    /// positivity).
    #[error("degenerate input: {context}")]
    DegenerateInput { context: String },

    /// Two discretization nodes coincide, so the secular equation cannot
    /// separate their eigenvalues.
    #[error("degenerate discretization nodes near energy {energy}")]
    DegenerateNodes { energy: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn non_finite(context: impl Into<String>) -> Self {
        Error::NonFinite { context: context.into() }
    }

    pub(crate) fn degenerate(context: impl Into<String>) -> Self {
        Error::DegenerateInput { context: context.into() }
    }

    pub(crate) fn unsupported(context: impl Into<String>) -> Self {
        Error::UnsupportedModel { context: context.into() }
    }
}
