use thiserror::Error;

/// Errors raised while parsing or validating input files.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid topology: {0}")]
    Topology(String),
    #[error("invalid traffic: {0}")]
    Traffic(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl ParseError {
    pub(crate) fn syntax(line: usize, message: impl Into<String>) -> Self {
        ParseError::Syntax { line, message: message.into() }
    }
}

impl From<std::io::Error> for ParseError {
    fn from(err: std::io::Error) -> Self {
        ParseError::Io(err.to_string())
    }
}

/// Errors raised by model construction and the solvers.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RwaError {
    #[error("unknown node {0}")]
    UnknownNode(usize),
    #[error("capacity mismatch: design uses {design} wavelengths but topology has {topology}")]
    CapacityMismatch { design: usize, topology: usize },
    #[error("malformed design config: {0}")]
    MalformedConfig(String),
    #[error("demand {demand} is protected but design {design} provides no protection")]
    UnexpectedProtection { demand: usize, design: String },
    #[error("demand {demand} references node {node} outside the topology")]
    DemandEndpoint { demand: usize, node: usize },
    #[error("instance too large for exhaustive enumeration: {0}")]
    InstanceTooLarge(String),
    #[error("unsupported export format `{0}` (expected lp or mps)")]
    UnsupportedFormat(String),
    #[error("invalid assignment: {0}")]
    Assignment(String),
    #[error("invalid variable name `{0}`")]
    VariableName(String),
}
