use thiserror::Error;

/// Errors raised by the numerical and arithmetic routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ArwError {
    #[error("input must be a positive integer")]
    ZeroInput,

    #[error("{0} is not a sum of two squares")]
    NotSumOfTwoSquares(u64),

    #[error("{0} is not a prime congruent to 1 mod 4")]
    NotSplitPrime(u64),

    #[error("sequence exhausted: requested {requested} terms, found {found} below the search bound {bound}")]
    SequenceExhausted {
        requested: usize,
        found: usize,
        bound: u64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("multiplicity N = {n_points} exceeds the configured cap {cap}")]
    CapExceeded { n_points: usize, cap: usize },

    #[error("grid side {got} is below the required minimum {required}")]
    GridTooSmall { required: usize, got: usize },

    #[error("odd moment did not converge: grid {m} gives {coarse}, grid {m2} gives {fine}", m2 = .m * 2)]
    NonConvergence { m: usize, coarse: f64, fine: f64 },

    #[error("degenerate conditioning: 1 - r^2 = {0:e}")]
    DegenerateConditioning(f64),

    #[error("covariance matrix is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),

    #[error("quadrature did not reach tolerance {tol:e} with {nodes} nodes")]
    QuadratureFailed { nodes: usize, tol: f64 },

    #[error("field vanishes exactly at grid point ({j}, {k})")]
    ExactZero { j: usize, k: usize },

    #[error("{aborted} of {trials} trials aborted (more than 1%)")]
    TooManyAborts { aborted: usize, trials: usize },
}

pub type Result<T> = std::result::Result<T, ArwError>;
