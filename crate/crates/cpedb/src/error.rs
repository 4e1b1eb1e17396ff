use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("constraints leave no maximum matching of cardinality {required}")]
    InfeasibleConstraints { required: usize },

    #[error("instance has {edges} edges, above the enumeration cap of {cap}")]
    InstanceTooLarge { edges: usize, cap: usize },

    #[error("no unique winner: best score {best} and runner-up {runner_up} differ by less than {tolerance}")]
    NonUniqueWinner {
        best: f64,
        runner_up: f64,
        tolerance: f64,
    },

    #[error("edges {0} and {1} do not share a position (or are the same edge)")]
    IncomparablePair(usize, usize),

    #[error("sample budget of {cap} exhausted")]
    BudgetExceeded { cap: u64 },

    #[error("minimax oracle: min-side constraints admit no matching")]
    InfeasibleMinSide,

    #[error("oracle failed to certify accuracy {eps} within {iterations} iterations; try a larger eps")]
    OracleBudget { eps: f64, iterations: usize },

    #[error("chain failed to reach a perfect matching within {steps} transitions")]
    NotMixed { steps: u64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
