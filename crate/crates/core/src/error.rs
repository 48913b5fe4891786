use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("metric is not admissible: {0}")]
    InvalidMetric(String),
    #[error("point lies on a chart singularity: {0}")]
    ChartSingularity(String),
    #[error("tangent vector is not unit length (|v|_g = {0})")]
    NonUnitTangent(f64),
    #[error("ODE integration failed: {0}")]
    Integration(String),
    #[error("geodesic failed to close: defect {defect:.3e} exceeds {tolerance:.1e}")]
    NonClosingGeodesic { defect: f64, tolerance: f64 },
    #[error("grid size {0} must be a power of two >= 256")]
    InvalidGrid(usize),
    #[error("Poincare map is not elliptic: |trace| = {0}")]
    NonEllipticMonodromy(f64),
    #[error("symbol degree {degree} exceeds the cap {cap}")]
    DegreeOverflow { degree: usize, cap: usize },
    #[error("operator structure mismatch: {0}")]
    Structure(String),
    #[error("first homological equation is obstructed: mean {mean:.3e} on monomial z^{m} zbar^{n}")]
    FirstObstruction { m: usize, n: usize, mean: f64 },
    #[error("jet variable {0} is not available on this path")]
    MissingJet(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether the error reflects a numerical failure rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Integration(_)
                | Error::NonClosingGeodesic { .. }
                | Error::NonEllipticMonodromy(_)
                | Error::FirstObstruction { .. }
                | Error::DegreeOverflow { .. }
                | Error::Structure(_)
        )
    }
}
