use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A point fell outside the unit square. `index` is the offending
    /// position in the input list when one is known.
    #[error("point ({x}, {y}){} lies outside the unit square", index.map(|i| format!(" at index {i}")).unwrap_or_default())]
    OutOfDomain { index: Option<usize>, x: f64, y: f64 },

    #[error("points {first} and {second} coincide; the interpolation matrix would be singular")]
    DuplicatePoints { first: usize, second: usize },

    #[error("subdomain{} contains no nodes", fmt_subdomain(*subdomain))]
    EmptySubdomain { subdomain: Option<usize> },

    #[error("every subdomain is empty; no local interpolant could be fitted")]
    AllSubdomainsEmpty,

    #[error("ill-conditioned interpolation system in subdomain{}: {reason}", fmt_subdomain(*subdomain))]
    IllConditioned {
        subdomain: Option<usize>,
        reason: String,
    },

    #[error("evaluation point ({x}, {y}) is not covered by any subdomain")]
    Uncovered { x: f64, y: f64 },

    #[error("I/O error: {0}")]
    Io(String),

    #[error("malformed model file at line {line}: {message}")]
    ModelFormat { line: usize, message: String },
}

fn fmt_subdomain(subdomain: Option<usize>) -> String {
    subdomain.map(|j| format!(" {j}")).unwrap_or_default()
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Attaches a subdomain index to errors raised by a single local solve.
    pub(crate) fn in_subdomain(self, j: usize) -> Self {
        match self {
            Error::EmptySubdomain { .. } => Error::EmptySubdomain { subdomain: Some(j) },
            Error::IllConditioned { reason, .. } => Error::IllConditioned {
                subdomain: Some(j),
                reason,
            },
            other => other,
        }
    }

    /// True for failures of the numerical method itself rather than of the
    /// input data.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IllConditioned { .. } | Error::AllSubdomainsEmpty | Error::Uncovered { .. }
        )
    }
}
