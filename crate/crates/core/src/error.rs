use thiserror::Error;

/// Errors raised by graph, query, estimand and oracle operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("directed cycle through `{0}`")]
    Cycle(String),
    #[error("undeclared vertex `{0}`")]
    UnknownVertex(String),
    #[error("duplicate declaration of `{0}`")]
    Duplicate(String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("bidirected edge `{0} <-> {1}` is not allowed when hidden variables are declared")]
    BidirectedWithHidden(String, String),
    #[error("`{0}` is a hidden variable")]
    HiddenVertex(String),
    #[error("{what} exceeds guard ({size} > {limit})")]
    Guard {
        what: &'static str,
        size: u128,
        limit: u128,
    },
    #[error("graph: {0}")]
    Graph(String),
    #[error("query: {0}")]
    Query(String),
    #[error("separation: {0}")]
    Separation(String),
    #[error("intervention: {0}")]
    Intervention(String),
    #[error("context: {0}")]
    Context(String),
    #[error("estimand: {0}")]
    Estimand(String),
    #[error("positivity violation: {0} has probability zero")]
    Positivity(String),
    #[error("model: {0}")]
    Model(String),
}

pub type Result<T> = std::result::Result<T, Error>;
