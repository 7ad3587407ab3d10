use thiserror::Error;

use crate::frame::QcDiagnostics;
use crate::surface::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not symmetric (relative asymmetry {0:e})")]
    NonSymmetric(f64),
    #[error("form does not commute with the complex structures (relative residual {0:e})")]
    NotJInvariant(f64),
    #[error("matrix is singular or numerically rank deficient")]
    Singular,
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("division by zero while evaluating the defining function")]
    DivisionByZero,
    #[error("expression is not a polynomial: {0}")]
    NotPolynomial(String),
    #[error("projection onto the surface did not converge: {0}")]
    NoConvergence(String),
    #[error("could not draw {requested} surface points in {attempts} attempts")]
    SamplingExhausted { requested: usize, attempts: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("gradient of the defining function vanishes (|grad| = {0:e})")]
    VanishingGradient(f64),
    #[error("vector is not tangent to the surface (normal component {0:e})")]
    NotTangent(f64),
    #[error("not a qc-hypersurface at this point: {0}")]
    NotQcHypersurface(Box<QcDiagnostics>),
    #[error("linear solve failed: {0}")]
    LinearSolveFailure(&'static str),
    #[error("structures do not share a horizontal space (residual {0:e})")]
    NotSameHorizontal(f64),
    #[error("structures are not conformally related (residual {0:e})")]
    NotConformallyRelated(f64),
    #[error("calibration factor is not a positive real number: {0}")]
    NonPositiveMu(String),
    #[error("Pfaffian of the fundamental (2,0)-form vanishes")]
    PfaffianSingular,
    #[error("inconsistent calibration: {0}")]
    InconsistentCalibration(String),
    #[error("ambient vector projects off the tangent space (residual {0:e})")]
    ProjectionNotTangent(f64),
    #[error("parallel form is not constant over the sample (deviation {0:e})")]
    NotParallel(f64),
    #[error("eigenvalue multiplicities are not multiples of four (spread {0:e})")]
    QuadrupleViolation(f64),
    #[error("quadric fit is rank deficient")]
    RankDeficientFit,
    #[error("quadric fit residual {0:e} exceeds tolerance")]
    FitResidual(f64),
    #[error("inconsistent classification: {0}")]
    InconsistentClassification(String),
    #[error("degenerate linear part: kernel component of the linear term vanishes")]
    DegenerateLinearPart,
    #[error("parallel form is not degenerate")]
    NotDegenerate,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors that mean the input is well formed but geometrically rejected.
    pub fn is_rejection(&self) -> bool {
        !matches!(
            self,
            Error::Parse(_)
                | Error::Io(_)
                | Error::InvalidArgument(_)
                | Error::DimensionMismatch { .. }
                | Error::NotPolynomial(_)
        )
    }
}
