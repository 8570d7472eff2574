use thiserror::Error;

use crate::coin::CoinId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unbalanced pans: {left} coins on the left, {right} on the right")]
    UnbalancedPans { left: u32, right: u32 },

    #[error("coin {0} appears on both pans")]
    OverlappingPans(CoinId),

    #[error("coin {coin} outside the universe 1..={universe}")]
    CoinOutOfRange { coin: CoinId, universe: u32 },

    #[error("fake set {bits:#x} does not fit a universe of {universe} coins")]
    FakeSetOutOfRange { bits: u64, universe: u32 },

    #[error("universe of {0} coins is not supported (1..=64)")]
    UniverseTooLarge(u32),

    #[error("invalid outcome digit {0}")]
    InvalidOutcome(u8),

    #[error("malformed tree: no child at {}", fmt_path(.0))]
    MalformedTree(Vec<u8>),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("strategy table has no classification rows")]
    EmptyTable,

    #[error("missing weighing at {}", fmt_path(.0))]
    MissingWeighing(Vec<u8>),

    #[error("no subtree within the depth budget resolves the node at {}", fmt_path(.0))]
    IrreparableNode(Vec<u8>),

    #[error("search budget exceeded after {nodes} nodes ({elapsed_ms} ms)")]
    BudgetExceeded { nodes: u64, elapsed_ms: u128 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("no three-weighing finisher exists for the node at {}", fmt_path(.0))]
    FinisherInfeasible(Vec<u8>),

    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),

    #[error("contradictory outcome history: no hypothesis is consistent with {0}")]
    Contradiction(char),

    #[error("{0}")]
    Io(String),
}

pub(crate) fn fmt_path(path: &[u8]) -> String {
    let digits: Vec<String> = path.iter().map(|d| d.to_string()).collect();
    format!("({})", digits.join(","))
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
