use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Violations raised while reading or constructing a [`crate::StorageGraph`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing `{0}` header")]
    MissingHeader(&'static str),
    #[error("line {line}: duplicate `{name}` header")]
    DuplicateHeader { line: usize, name: &'static str },
    #[error("line {line}: header `{name}` must appear before the first edge")]
    LateHeader { line: usize, name: &'static str },
    #[error("{name} must be at least 1")]
    ZeroParameter { name: &'static str },
    #[error("K = {0} exceeds the supported maximum of {max} sources", max = crate::source::MAX_SOURCES)]
    TooManySources(usize),
    #[error("M = {m} exceeds K = {k}")]
    PerEdgeExceedsSources { m: usize, k: usize },
    #[error("line {line}: self-loop on node {node}")]
    SelfLoop { line: usize, node: String },
    #[error("line {line}: duplicate edge {{{a},{b}}}")]
    DuplicateEdge { line: usize, a: String, b: String },
    #[error("line {line}: label cardinality {size} not in {{0, {m}}}")]
    LabelSize { line: usize, size: usize, m: usize },
    #[error("line {line}: source index {index} outside 1..={k}")]
    SourceOutOfRange { line: usize, index: usize, k: usize },
    #[error("line {line}: repeated source index {index} in label")]
    RepeatedSource { line: usize, index: usize },
    #[error("line {line}: invalid node identifier `{token}`")]
    BadNodeName { line: usize, token: String },
    #[error("graph has no edges")]
    Empty,
}

impl GraphError {
    /// Syntax problems map to exit code 2, invariant violations to 1.
    pub fn is_syntax(&self) -> bool {
        matches!(self, GraphError::Syntax { .. } | GraphError::BadNodeName { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {q} exceeds the supported bound {max}", max = crate::field::MAX_MODULUS)]
    ModulusTooLarge { q: u64 },
    #[error("source index {k} outside 1..={sources}")]
    SourceIndex { k: usize, sources: usize },
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("no edge between `{0}` and `{1}`")]
    UnknownEdge(String, String),
    #[error("component analysis does not belong to this graph")]
    InconsistentAnalysis,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("field size {q} below the required bound {required}")]
    FieldTooSmall { q: u64, required: u64 },
    #[error("no acceptable draw after {attempts} attempts (seed {seed}, final q {q})")]
    RetriesExhausted { seed: u64, q: u64, attempts: u32 },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("edge {{{0},{1}}} is unqualified")]
    UnqualifiedEdge(String, String),
    #[error("enumeration needs {required} steps, budget is {budget}")]
    BudgetExceeded { required: String, budget: u64 },
    #[error("code file line {line}: {msg}")]
    CodeFormat { line: usize, msg: String },
    #[error("code does not match graph: {0}")]
    CodeMismatch(String),
}

impl Error {
    /// Process exit status for this error: 2 for unreadable input, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Graph(g) if g.is_syntax() => 2,
            Error::CodeFormat { .. } => 2,
            _ => 1,
        }
    }
}
