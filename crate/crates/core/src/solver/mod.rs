//! Exact solvers: branch-and-bound over arborescences for both problem
//! variants, and exhaustive oracles for small instances.

mod bnb;
mod brute;
mod heuristic;

pub use bnb::{solve_pcmca, solve_pcmcawt};
pub use brute::{brute_force_pcmca, brute_force_pcmcawt};

use std::fmt;
use std::time::Duration;

use crate::error::SolveError;

/// Resource limits shared by the solvers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverLimits {
    pub time_limit: Duration,
    pub node_limit: usize,
    /// Largest vertex count the brute-force oracles accept.
    pub brute_force_cap: usize,
    /// Largest vertex count for which nodes are also bounded by an LP.
    pub lp_bound_max_n: usize,
    /// Record `(lower, upper)` after every node in [`SolveStats::trace`].
    pub record_trace: bool,
}

impl Default for SolverLimits {
    fn default() -> Self {
        SolverLimits {
            time_limit: Duration::from_secs(3600),
            node_limit: 10_000_000,
            brute_force_cap: 8,
            lp_bound_max_n: 60,
            record_trace: false,
        }
    }
}

impl SolverLimits {
    pub fn validate(&self) -> Result<(), SolveError> {
        if self.time_limit.is_zero() || self.node_limit == 0 || self.brute_force_cap == 0 {
            return Err(SolveError::Unsupported("solver limits must be positive".into()));
        }
        Ok(())
    }

    pub fn without_lp(mut self) -> Self {
        self.lp_bound_max_n = 0;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// A limit stopped the search with an incumbent in hand.
    Feasible { lower: i64, upper: i64 },
    Infeasible,
    /// A limit stopped the search before any solution was found.
    Limit { lower: i64 },
}

impl SolveStatus {
    pub fn tag(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible { .. } => "feasible",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Limit { .. } => "limit",
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveStatus::Feasible { lower, upper } => write!(f, "feasible [{lower}, {upper}]"),
            SolveStatus::Limit { lower } => write!(f, "limit [{lower}, -]"),
            other => f.write_str(other.tag()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveStats {
    pub nodes: usize,
    /// Connectivity cuts added to the LP pool.
    pub cuts: usize,
    pub lp_solves: usize,
    pub time: Duration,
    pub status: SolveStatus,
    /// Objective of the best solution found.
    pub incumbent: Option<i64>,
    /// Proven lower bound; equals the incumbent when optimal.
    pub bound: i64,
    /// `(lower, upper)` after each node when tracing is enabled.
    pub trace: Vec<(i64, Option<i64>)>,
}
