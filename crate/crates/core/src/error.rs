use thiserror::Error;

use crate::exterior::MultiIndex;
use crate::ops::DomMembership;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("grid too coarse: need {needed} normal nodes, have {available}")]
    GridTooCoarse { needed: usize, available: usize },

    #[error("invalid multi-index {indices:?} for N = {dim}")]
    InvalidMultiIndex { indices: Vec<usize>, dim: usize },

    #[error("degree {degree} cannot be raised past N + 1 = {max}")]
    DegreeOverflow { degree: usize, max: usize },

    #[error("operation needs a form of degree >= 1, got degree 0")]
    DegreeUnderflow,

    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },

    #[error("Neumann mode kernel is singular at beta = 0")]
    ZeroModeSingular,

    #[error("form is not in dom d*: max trace violation {:.3e} on {:?}", .0.max_violation, .0.offending_components)]
    NotInDomain(DomMembership),

    #[error("prerequisite violated: {0}")]
    PrereqViolated(String),

    #[error("zero tangential mode incompatible: {condition} = {value:.3e} exceeds tolerance {tol:.3e}")]
    ZeroModeIncompatible {
        condition: &'static str,
        value: f64,
        tol: f64,
    },

    #[error("non-finite value in {0}")]
    NonFiniteInput(&'static str),

    #[error("linear system is numerically singular ({0})")]
    SingularSystem(String),

    #[error("component {index}: {source}")]
    Component {
        index: MultiIndex,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed field dump: {0}")]
    Dump(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Strips [`Error::Component`] wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Component { source, .. } => source.root(),
            other => other,
        }
    }
}
