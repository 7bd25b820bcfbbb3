use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every module. The label in brackets names the
/// module that raised it.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("[symbols] invalid symbol: {0}")]
    InvalidSymbol(String),
    #[error("[symbols] frequency {xi} outside tabulated range [0, {max}]")]
    OutOfRange { xi: f64, max: f64 },
    #[error("[symbols] degenerate symbol: Re Psi vanishes on the tail window")]
    DegenerateSymbol,
    #[error("[functionals] invalid test function: {0}")]
    InvalidTestFunction(String),
    #[error("[functionals] integral diverges (partial integrals grow like cutoff^{exponent:.3})")]
    DivergenceDetected { exponent: f64 },
    #[error("[functionals] tolerance not met: error estimate {error:.3e} for value {value:.6e}")]
    ToleranceNotMet { value: f64, error: f64 },
    #[error("[functionals] inconclusive: {0}")]
    Inconclusive(String),
    #[error("[functionals] point-mass test functions need a finite Hawkes integral")]
    DeltaNotAdmissible,
    #[error("[moments] symmetric exponent required")]
    SymmetryRequired,
    #[error("[moments] lower index {beta} does not exceed the dimension {dim}")]
    IndexTooSmall { beta: f64, dim: usize },
    #[error("[sampler] covariance not positive definite for mode {mode}")]
    NotPositiveDefinite { mode: i64 },
    #[error("[sampler] insufficient separations: {0}")]
    InsufficientSeparations(String),
    #[error("[markov] Euler step too coarse: {0}")]
    StepTooCoarse(String),
    #[error("[semilinear] clipped negative density mass {0:.3e} exceeds 1e-6")]
    RingingExcess(f64),
    #[error("[semilinear] no convergence after {iterations} iterations (last ratio {ratio:.3})")]
    NoConvergence { iterations: usize, ratio: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}
