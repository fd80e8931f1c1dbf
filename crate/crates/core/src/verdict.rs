use serde::{Deserialize, Serialize};

/// Outcome of a search or check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Success,
    Failure,
    /// The search budget ran out before a conclusion.
    Inconclusive,
}

/// How a cover was found or ruled out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMethod {
    /// Every candidate of each size was examined in order; the answer is
    /// the least one.
    Exhaustive,
    /// Greedy cover; valid but not necessarily least.
    Greedy,
}

/// Default node budget for combinatorial searches.
pub const DEFAULT_SEARCH_BUDGET: u64 = 2_000_000;
