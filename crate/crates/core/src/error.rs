use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    /// Adaptive quadrature ran out of refinements.
    #[error("quadrature did not converge: estimate {estimate:e}, error estimate {error_estimate:e}")]
    Quadrature { estimate: f64, error_estimate: f64 },

    /// A sum that is real in exact arithmetic kept a non-negligible imaginary part.
    #[error("imaginary residue {imag:e} exceeds tolerance for real part {real:e}")]
    ImaginaryResidue { real: f64, imag: f64 },

    #[error("moment accumulator overflow for m = {m}")]
    MomentOverflow { m: u32 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn params(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }

    /// `true` for failures of a numerical method rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. } | Error::ImaginaryResidue { .. } | Error::MomentOverflow { .. }
        )
    }
}
