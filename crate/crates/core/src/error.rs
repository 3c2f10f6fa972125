use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("singular region: {0}")]
    SingularRegion(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("hermiticity violated: max |ρ(Q,q) − conj ρ(q,Q)| = {deviation:.3e} (tolerance {tolerance:.1e})")]
    HermiticityViolation { deviation: f64, tolerance: f64 },

    #[error("input matrix is not Hermitian: max deviation {deviation:.3e}")]
    NonHermitianInput { deviation: f64 },

    #[error("assembled Hamiltonian is not Hermitian: {0}")]
    NonHermitianAssembly(String),

    #[error("dimension {dim} exceeds the dense limit {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("propagation time must be positive, got {0}")]
    NonpositiveTime(f64),

    #[error(
        "quadrature did not converge: error estimate {estimate:.3e} > tolerance {tolerance:.1e}"
    )]
    QuadratureNotConverged { estimate: f64, tolerance: f64 },

    #[error("Monte Carlo estimate not converged: stderr {stderr:.3e} > tolerance {tolerance:.1e}")]
    NotConverged { stderr: f64, tolerance: f64 },

    #[error("energy drift {drift:.3e} per unit time exceeds {tolerance:.1e}")]
    EnergyDriftExceeded { drift: f64, tolerance: f64 },

    #[error("initial state does not factorize: deviation {deviation:.3e}")]
    NotFactorized { deviation: f64 },

    #[error("Fock truncation leak: top-level population {population:.3e} exceeds {tolerance:.1e}")]
    TruncationLeak { population: f64, tolerance: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// Numerical guard aborts (as opposed to invalid input).
    pub fn is_numerical_guard(&self) -> bool {
        matches!(
            self,
            Error::TruncationLeak { .. }
                | Error::NotConverged { .. }
                | Error::EnergyDriftExceeded { .. }
                | Error::QuadratureNotConverged { .. }
        )
    }
}
