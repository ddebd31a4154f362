use thiserror::Error;

/// Errors produced by kernel construction, fitting, selection and simulation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("infeasible annulus geometry (c1={c1}, c2={c2}): {reason}")]
    InfeasibleKernel { c1: f64, c2: f64, reason: String },

    #[error("simplex search did not converge after {iterations} iterations (objective spread {spread:e}, simplex size {size:e})")]
    NonConvergence {
        iterations: usize,
        spread: f64,
        size: f64,
    },

    #[error("kernel has unbounded support; moment functionals are not defined")]
    UnboundedSupport,

    #[error("singular local fit at x = {x:?}")]
    SingularFit { x: Vec<f64> },

    #[error("fit contains {count} singular points; residual sum of squares undefined")]
    SingularPoints { count: usize },

    #[error("every candidate bandwidth is infeasible (largest tried {largest}); increase the upper grid bound")]
    AllInfeasible { largest: f64 },

    #[error("no pairs inside the smoothing window at t={t}, b={b}")]
    NoPairs { t: f64, b: f64 },

    #[error("degenerate noise: sigma2 must be positive")]
    DegenerateNoise,

    #[error("no elbow found: relative change of C-bar never stays below {tolerance} for {run} consecutive steps")]
    NoElbow { tolerance: f64, run: usize },

    #[error("covariance factorization failed: {0}")]
    Factorization(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
