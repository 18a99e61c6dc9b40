//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by instance handling, transforms, distributions,
/// the SDP solver, and the test harnesses.
#[derive(Debug, Error)]
pub enum Error {
    #[error("assignment has {got} entries, instance has {expected} variables")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("instance has no constraints")]
    EmptyInstance,

    #[error("constraint indices {0:?} must be distinct, increasing and below n={1}")]
    InvalidConstraint([usize; 3], usize),

    #[error("signs must be +1 or -1, got {0}")]
    InvalidSign(i8),

    #[error("n={0} exceeds the exhaustive-search limit of {1} variables")]
    ExhaustiveLimit(usize, usize),

    #[error("need at least {need} variables, got {got}")]
    TooFewVariables { need: usize, got: usize },

    #[error("arity {0} exceeds the dense-table limit of {1}")]
    ArityLimit(usize, usize),

    #[error("table has {got} entries, arity {n} requires {expected}")]
    TableLength { n: usize, got: usize, expected: usize },

    #[error("table entry {value} at index {index} is outside [0,1]")]
    TableRange { index: usize, value: f64 },

    #[error("coordinate {0} out of range for arity {1}")]
    CoordinateRange(usize, usize),

    #[error("parameter {name}={value} outside its domain {domain}")]
    ParameterDomain {
        name: &'static str,
        value: String,
        domain: &'static str,
    },

    #[error("matrix is not symmetric: |A[{i}][{j}] - A[{j}][{i}]| = {diff:e}")]
    NotSymmetric { i: usize, j: usize, diff: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {0:e} below tolerance")]
    NotPsd(f64),

    #[error("correlation triple ({0}, {1}, {2}) is not a valid 3x3 correlation matrix")]
    InvalidCorrelationTriple(f64, f64, f64),

    #[error("diagonal entry {index} is {value}, expected 1")]
    NotCorrelation { index: usize, value: f64 },

    #[error("Gram factors do not reproduce a unit-diagonal Gram matrix (row {row} has squared norm {norm})")]
    FactorMismatch { row: usize, norm: f64 },

    #[error("solver did not reach tolerance {tol:e} in {iterations} iterations (residual {residual:e})")]
    NotConverged {
        tol: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("exact evaluation infeasible: function depends on {junta} coordinates (limit {limit})")]
    JuntaTooLarge { junta: usize, limit: usize },

    #[error("exact evaluation infeasible: {atoms} joint atoms exceed the budget of {budget}")]
    ExactBudget { atoms: u128, budget: u128 },

    #[error("probability mass {0} does not fit a 64-bit rational")]
    MassOverflow(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
