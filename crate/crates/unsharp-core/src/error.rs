use thiserror::Error;

/// Errors reported by validation and construction routines.
///
/// Every variant carries the measured deviation so callers can report
/// which invariant failed and by how much.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("dimension {dim} exceeds the supported maximum {max}")]
    Capacity { dim: usize, max: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not Hermitian (max entrywise |M - M~| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("operator is not a projector (||P^2 - P|| = {deviation:.3e})")]
    NotProjector { deviation: f64 },

    #[error("operator is not an effect (spectrum [{min:.6}, {max:.6}] escapes [0, 1])")]
    NotEffect { min: f64, max: f64 },

    #[error("trace must be 1, got {trace:.12}")]
    TraceNotOne { trace: f64 },

    #[error("measure must contain at least one element")]
    EmptyMeasure,

    #[error("measure element {index}: {source}")]
    InvalidElement { index: usize, source: Box<Error> },

    #[error("measure elements do not sum to the identity (deviation {deviation:.3e})")]
    Incomplete { deviation: f64 },

    #[error("elements {i} and {j} are not orthogonal (||P_i P_j|| = {deviation:.3e})")]
    NotOrthogonal { i: usize, j: usize, deviation: f64 },

    #[error("outcome labels must be distinct")]
    DuplicateLabels,

    #[error("{labels} outcome labels but {values} values")]
    OutcomeShape { labels: usize, values: usize },

    #[error("outcome values are required for this operation")]
    MissingValues,

    #[error("kernel column {column} sums to {sum:.12}, expected 1")]
    KernelColumnSum { column: usize, sum: f64 },

    #[error("kernel weight at ({row}, {column}) is negative: {value}")]
    KernelNegativeWeight {
        row: usize,
        column: usize,
        value: f64,
    },

    #[error("kernel has {kernel_cols} input columns but the measure has {outcomes} outcomes")]
    KernelShape { kernel_cols: usize, outcomes: usize },

    #[error("projectors do not commute (||P1 P2 - P2 P1|| = {norm:.3e})")]
    NotCoexistent { norm: f64 },

    #[error("binary measure required, got {outcomes} outcomes")]
    NotBinary { outcomes: usize },

    #[error("parameter {name} = {value} out of range ({expected})")]
    ParameterRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("observable spectrum [{min:.6}, {max:.6}] escapes [-1, 1]")]
    SpectrumRange { min: f64, max: f64 },

    #[error("conditioning on an outcome of probability {probability:.3e}")]
    ZeroProbability { probability: f64 },

    #[error("outcome probabilities sum to {sum:.12}, expected 1")]
    ProbabilityNormalization { sum: f64 },

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

impl Error {
    /// Wraps an element-level failure with the index inside a measure.
    pub fn at_element(index: usize, source: Error) -> Self {
        Error::InvalidElement {
            index,
            source: Box::new(source),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
