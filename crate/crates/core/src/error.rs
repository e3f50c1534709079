use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("shift {z} is too close to the spectrum (pivot {pivot:e})")]
    SingularShift { z: Complex64, pivot: f64 },

    #[error("matrix is numerically singular (pivot {pivot:e})")]
    SingularMatrix { pivot: f64 },

    #[error("{routine} did not converge within {iterations} iterations")]
    ConvergenceFailure { routine: &'static str, iterations: usize },

    #[error("pole {pole} lies within {distance:e} of the spectrum")]
    PoleNearSpectrum { pole: Complex64, distance: f64 },

    #[error("branch continuation exceeded refinement depth near {z}")]
    BranchStepTooLarge { z: Complex64 },

    #[error("Richardson extrapolation diverged at lambda = {lambda}")]
    ExtrapolationDiverged { lambda: f64 },

    #[error("grid point {lambda} is within {gap:e} of spectral point {eigenvalue}")]
    GridTooClose { lambda: f64, eigenvalue: f64, gap: f64 },

    #[error("quadrature budget exhausted: estimate {estimate:e} after {evaluations} evaluations")]
    QuadratureBudgetExceeded { estimate: f64, evaluations: usize },

    #[error("representation residual {residual:e} at {z} exceeds tolerance")]
    RepresentationMismatch { z: Complex64, residual: f64 },

    #[error("evaluation point {z} hits a pole of the Blaschke product")]
    PoleHit { z: Complex64 },

    #[error("transform point {x} is not inside the grid interior")]
    EdgeTooClose { x: f64 },

    #[error("grid is not uniform (relative spacing deviation {deviation:e})")]
    NonUniformGrid { deviation: f64 },

    #[error("level sets at t = {t:e} extend beyond the grid and no tail model is attached")]
    TailModelRequired { t: f64 },

    #[error("function fails the o(1/t) level-set test at the {end} end (t*m(t) = {value:e})")]
    NotWeakL1Zero { end: &'static str, value: f64 },

    #[error("truncated integrals did not settle (last change {change:e})")]
    NoConvergence { change: f64 },

    #[error("sequence rule is not admissible: {reason}")]
    RuleNotAdmissible { reason: String },

    #[error("A-integral routes disagree: direct {direct}, via conjugate {conjugate}")]
    InconsistentDuality { direct: Complex64, conjugate: Complex64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
