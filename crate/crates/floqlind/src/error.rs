//! Crate-wide error type.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong across the pipeline, from model
/// construction to dataset I/O. Variants that mark a grid point as
/// unlabelable (rather than the program as broken) are
/// [`Error::NearDefective`], [`Error::BranchCut`],
/// [`Error::UnpairedEigenvalue`], [`Error::SingularMap`], and
/// [`Error::NoiseBracketExceeded`]; sweeps turn those into skip records.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dissipation rate must be nonnegative, got {0}")]
    NegativeRate(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("integrator did not reach the step-halving gate: {steps} steps per period leave a defect of {defect:.3e}")]
    IntegrationAccuracy { steps: usize, defect: f64 },

    #[error("eigendecomposition did not converge")]
    EigendecompositionFailed,

    #[error("matrix is numerically singular")]
    SingularMatrix,

    #[error("eigenvector matrix is near defective (condition number {cond:.3e})")]
    NearDefective { cond: f64 },

    #[error("eigenvalue {re}{im:+}i lies too close to the logarithm branch cut")]
    BranchCut { re: f64, im: f64 },

    #[error("map is numerically singular: |eigenvalue| = {0:.3e}")]
    SingularMap(f64),

    #[error("complex eigenvalue {re}{im:+}i has no conjugate partner")]
    UnpairedEigenvalue { re: f64, im: f64 },

    #[error("superoperator is not Hermiticity-preserving (defect {0:.3e})")]
    NotHermiticityPreserving(f64),

    #[error("noise strength exceeded the bracket cap {0}")]
    NoiseBracketExceeded(f64),

    #[error("vector is not normalized: |v| = {0}")]
    NotNormalized(f64),

    #[error("degenerate training data: {0}")]
    DegenerateTrainingData(String),

    #[error("non-finite feature value in row {row}, column {col}")]
    NonFiniteFeature { row: usize, col: usize },

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("feature width {got} does not match expected {expected}")]
    FeatureWidth { got: usize, expected: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures that flag a single grid point as unlabelable
    /// while the surrounding computation stays sound.
    pub fn is_point_flag(&self) -> bool {
        matches!(
            self,
            Error::NearDefective { .. }
                | Error::BranchCut { .. }
                | Error::SingularMap(_)
                | Error::UnpairedEigenvalue { .. }
                | Error::NoiseBracketExceeded(_)
        )
    }
}
