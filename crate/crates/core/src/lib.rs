//! Adaptive balance strategies for finding heavy coins.
//!
//! Coins are numbered from 1. A [`FakeSet`] is the bitmask of heavy coins,
//! bit `i - 1` for coin `i`. Outcomes use the digits 0 (`=`), 1 (`<`, left
//! lighter) and 2 (`>`, left heavier).

pub mod bounds;
pub mod coin;
pub mod composition;
pub mod error;
pub mod hypothesis;
pub mod search;
pub mod session;
pub mod strategies;
pub mod tree;
pub mod weighing;

pub use coin::{decode_subset, encode_subset, CoinId, FakeSet};
pub use error::{Error, Result};
pub use hypothesis::{refine, HypothesisSet, Semantics};
pub use search::{g_exact, gbar_early_uniform, gbar_exact, solve, synthesize_base, SearchOutcome, SearchProblem, Solver};
pub use strategies::{load_table, repair_tree, table_to_tree, verify_tree, StrategyTable, VerificationReport};
pub use tree::{run_strategy, DecisionTree, Leaf, Node, Run};
pub use weighing::{weigh, Outcome, Pan, Weighing};
