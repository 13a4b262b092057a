use thiserror::Error;

/// Errors raised while reading or normalizing an instance.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("precedence ({s}, {root}) targets the root; the instance is infeasible")]
    PrecedenceOnRoot { s: usize, root: usize },
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate arc ({0}, {1})")]
    DuplicateArc(usize, usize),
    #[error("arc ({i}, {j}) has negative cost {cost}")]
    NegativeCost { i: usize, j: usize, cost: i64 },
    #[error("{0}")]
    Domain(String),
}

impl InstanceError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        InstanceError::Parse {
            line,
            message: message.into(),
        }
    }
}

/// Errors from solvers and oracles.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("instance has {n} vertices, above the brute-force cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("unsupported formulation for this operation: {0}")]
    Unsupported(String),
    #[error("LP solve failed: {0}")]
    Lp(String),
}

/// Domain error for arithmetic helpers such as gaps and densities.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct DomainError(pub String);
