use thiserror::Error;

/// Unified error type for the whole crate.
///
/// Construction APIs validate their inputs eagerly, so arithmetic deeper in
/// the call tree can assume well-formed operands; anything that can still go
/// wrong at that depth (mode mixing, dimension mismatch) is reported through
/// the same enum rather than a panic.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("arithmetic mode mismatch: exact and approximate values cannot be combined")]
    ModeMismatch,

    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("expected a base-variable polynomial (no fiber variables): {context}")]
    BaseOnlyExpected { context: String },

    #[error("expected a constant polynomial: {context}")]
    ConstantExpected { context: String },

    #[error("one-form is not closed: d(w{j})/dx{i} != d(w{i})/dx{j}")]
    NotClosed { i: usize, j: usize },

    #[error("the zero operator has no principal symbol")]
    ZeroOperator,

    #[error("requested symbol order {requested} is below the operator order {degree}")]
    OrderBelowDegree { requested: u32, degree: u32 },

    #[error("expected a vector field (fiber-linear data of order one): {context}")]
    NotAVectorField { context: String },

    #[error("polynomial is not homogeneous of the expected fiber degree: {context}")]
    NotFiberHomogeneous { context: String },

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("map is not affine: {context}")]
    NotAffine { context: String },

    #[error("exact evaluation unavailable: {reason}; rerun in approximate mode")]
    ExactnessUnavailable { reason: String },

    #[error("derivation does not integrate to a one-parameter group: {reason}")]
    NotIntegrable { reason: String },

    #[error("filtration constraint violated: {context}")]
    FiltrationViolated { context: String },

    #[error("search caps too large: {context}")]
    CapsTooLarge { context: String },

    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
}

impl Error {
    /// Whether this is a parse-level (syntax) failure, as opposed to a
    /// semantic one.  The CLI maps the two classes to different exit codes.
    pub fn is_syntax(&self) -> bool {
        matches!(self, Error::Syntax { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
