use thiserror::Error;

/// Errors raised by the cosine series library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CsrError {
    #[error("basis index {index} out of range: valid indices are {first}..={last}")]
    IndexOutOfRange { index: usize, first: usize, last: usize },

    #[error("{what} = {value} is outside the unit interval [0, 1]")]
    Domain { what: &'static str, value: f64 },

    #[error("non-finite value encountered in {what} at position {position}")]
    NonFinite { what: &'static str, position: usize },

    #[error("under-resolved: {nodes} sample nodes supplied, at least {required} required")]
    Resolution { nodes: usize, required: usize },

    #[error("grid too small: {len} points, at least 2 required")]
    GridSize { len: usize },

    #[error("degenerate grid: duplicate timestamp {value} at sorted position {index}")]
    DegenerateGrid { index: usize, value: f64 },

    #[error("underdetermined fit: {n} samples for {m} basis functions (need n >= {m})")]
    Underdetermined { n: usize, m: usize },

    #[error("design matrix is rank deficient: column {column} is collinear with earlier columns")]
    Collinear { column: usize },

    #[error("shape mismatch in {what}: expected {expected}, found {found}")]
    Shape {
        what: &'static str,
        expected: String,
        found: String,
    },

    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },
}

impl CsrError {
    /// True for failures of the numerical method itself (as opposed to bad
    /// input data): rank deficiency, underdetermined systems and
    /// under-resolved quadrature or grids.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            CsrError::Underdetermined { .. } | CsrError::Collinear { .. } | CsrError::Resolution { .. }
        )
    }

    pub(crate) fn shape(what: &'static str, expected: impl ToString, found: impl ToString) -> Self {
        CsrError::Shape {
            what,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        CsrError::Invalid {
            what,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CsrError>;
