use thiserror::Error;

/// Errors reported by the simulation pipeline.
///
/// Unstable dynamics are only an error where a steady state is actually
/// required (the Lyapunov solve); everywhere else instability is data and is
/// reported through result flags.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("unstable dynamics: max Re eig(A) = {margin:.6e} rad/s, no steady state exists")]
    UnstableDynamics { margin: f64 },

    #[error("eigenvalue solver failed to converge")]
    EigenSolverFailure,

    #[error("dense linear solve failed (singular system)")]
    LinearSolveFailure,

    #[error("Lyapunov residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("covariance matrix is unphysical: min symplectic eigenvalue {nu_min:.9} < 1/2")]
    NonPhysicalCovariance { nu_min: f64 },

    #[error("singular covariance matrix (det = {det:.3e})")]
    SingularCovariance { det: f64 },

    #[error("invalid mode pair ({0}, {1}): need two distinct modes in 0..4")]
    InvalidModePair(usize, usize),

    #[error("unknown sweep parameter `{0}`")]
    UnknownParameter(String),

    #[error("sweep axes must share the same parameter and values")]
    MismatchedAxes,

    #[error("revival baseline never entangles (max E_N = {max_en:.3e})")]
    ZeroBaseline { max_en: f64 },

    #[error("fixed-point iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}
