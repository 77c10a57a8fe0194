use thiserror::Error;

/// Location of a token in a source document.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    /// 1-based line.
    pub line: usize,
    /// 1-based column.
    pub column: usize,
    /// Byte offset of the first byte.
    pub start: usize,
    /// Byte offset one past the last byte.
    pub end: usize,
}

impl std::fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{span}: {message}")]
    Parse { span: SourceSpan, message: String },

    #[error("platform document: {0}")]
    PlatformFormat(String),

    #[error("invalid {field}: {reason}")]
    Invariant { field: String, reason: String },

    #[error("gate {kind} has no unitary matrix")]
    NoUnitary { kind: String },

    #[error("circuit has {n} qubits, oracle is capped at {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("circuit needs {needed} qubits but platform {platform} has {available}")]
    CircuitTooWide { needed: usize, available: usize, platform: String },

    #[error("qubits {a} and {b} are not connected in the coupling graph")]
    Disconnected { a: usize, b: usize },

    #[error("gate {kind} is not native")]
    NotNative { kind: String },

    #[error("{kind} cannot be exported to OpenQASM 2.0")]
    Unexportable { kind: String },

    #[error("step size underflow at t = {time} ns (h = {step:e} ns)")]
    StepUnderflow { time: f64, step: f64 },

    #[error("{invariant} violated at t = {time} ns: {detail}")]
    StateInvariant { invariant: &'static str, time: f64, detail: String },

    #[error("state has no support on the computational subspace (Tr(PρP) = {0:e})")]
    NoComputationalSupport(f64),

    #[error("input is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invariant(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invariant { field: field.into(), reason: reason.into() }
    }
}
