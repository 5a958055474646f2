use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("pole collision at s = {0}")]
    PoleCollision(String),
    #[error("unstable kernel: pole {0} has nonnegative real part")]
    UnstableKernel(String),
    #[error("tolerance {target:e} not reached with d <= {d_max} (best {achieved:e})")]
    ToleranceUnreachable {
        target: f64,
        achieved: f64,
        d_max: usize,
    },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("quadrature error estimate {estimate:e} exceeds tolerance {tol:e} at y = {y}")]
    Quadrature { y: f64, estimate: f64, tol: f64 },
    #[error("rank deficient least squares problem: {0}")]
    RankDeficient(String),
    #[error("CFL violation: dt = {dt} exceeds limit {limit}")]
    Cfl { dt: f64, limit: f64 },
    #[error("non-finite field value at step {0}")]
    NotFinite(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad input rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_) | Error::Domain(_) | Error::Parse { .. } | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
