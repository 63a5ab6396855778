//! Error type shared by every solver in the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("{op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// Operand shapes do not agree.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A (shifted) banded system broke down at the given pivot.
    #[error("singular system: zero pivot at index {index}")]
    SingularPivot { index: usize },

    /// A dense system was numerically singular.
    #[error("singular dense system: {0}")]
    Singular(String),

    /// A shifted solve failed inside the ADI loop.
    #[error("ADI iteration {iteration} failed: {source}")]
    Adi {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    /// A failure inside one level of the nested cube iteration.
    #[error("nested ADI level {level} failed: {source}")]
    Nested {
        level: &'static str,
        #[source]
        source: Box<Error>,
    },

    /// Problem size exceeds a documented guard.
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    /// Dirichlet edge data disagrees at a corner.
    #[error("incompatible Dirichlet data: worst corner defect {defect:e} at {corner}")]
    CornerMismatch { corner: &'static str, defect: f64 },

    /// Malformed input file.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    /// True for failures of the numerical method itself, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularPivot { .. }
                | Error::Singular(_)
                | Error::Adi { .. }
                | Error::Nested { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
