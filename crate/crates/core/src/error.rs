use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two objects that must share a dimension do not.
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    /// An argument is outside the domain of the operation.
    InvalidInput(String),
    /// A NaN or infinite value was found where finite values are required.
    NonFinite(&'static str),
    /// The Jacobi eigenvalue iteration did not reach its tolerance.
    EigenNoConvergence {
        dim: usize,
        sweeps: usize,
        off_diagonal: f64,
        /// Diagonal estimate at the point of failure.
        partial_min: f64,
    },
    /// A sampled margin curve violates concavity beyond the allowed slack,
    /// which means the outer search missed a minimizer.
    NonConcave { t: f64, excess: f64 },
    /// Any other numerical breakdown.
    Numerical(String),
    /// Failure while processing one sample of a coefficient field.
    Sample { index: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Wraps the error with the index of the field sample that caused it.
    pub fn at_sample(self, index: usize) -> Self {
        Error::Sample {
            index,
            source: Box::new(self),
        }
    }

    /// True for errors caused by bad arguments rather than numerics.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Dimension { .. } | Error::InvalidInput(_) | Error::NonFinite(_) => true,
            Error::Sample { source, .. } => source.is_input_error(),
            _ => false,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension {
                what,
                expected,
                found,
            } => write!(f, "dimension mismatch in {what}: expected {expected}, found {found}"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::NonFinite(what) => write!(f, "non-finite value in {what}"),
            Error::EigenNoConvergence {
                dim,
                sweeps,
                off_diagonal,
                partial_min,
            } => write!(
                f,
                "eigenvalue iteration on a {dim}x{dim} matrix did not converge after {sweeps} sweeps \
                 (off-diagonal norm {off_diagonal:e}, partial minimum {partial_min})"
            ),
            Error::NonConcave { t, excess } => write!(
                f,
                "sampled margin is not concave near t = {t} (excess {excess:e}); outer search missed a minimizer"
            ),
            Error::Numerical(msg) => write!(f, "numerical failure: {msg}"),
            Error::Sample { index, source } => write!(f, "sample {index}: {source}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
