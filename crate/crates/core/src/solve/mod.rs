//! Inner minimum-delay solve for a fixed cancellation set.

mod propagate;
pub mod simplex;

pub use propagate::solve_min_delay;
pub use simplex::lp_reference_solve;

use crate::rational::Rational;
use crate::schedule::{Minutes, Schedule};
use crate::system::ChainSystem;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    Feasible,
    /// Per offending chain, the first flight that cannot meet its upper bound.
    Infeasible { witnesses: Vec<usize> },
}

impl Status {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Status::Feasible)
    }
}

/// Result of one inner solve. When infeasible, `departures` is the least
/// point satisfying the lower bounds and links with the upper bounds dropped,
/// and the objectives are evaluated there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub departures: Vec<Minutes>,
    pub delays: Vec<Minutes>,
    pub delay_objective: Rational,
    pub penalty_total: Rational,
    pub objective: Rational,
    pub status: Status,
}

impl SolveResult {
    pub(crate) fn assemble(
        schedule: &Schedule,
        departures: Vec<Minutes>,
        delay_objective: Rational,
        penalty_total: Rational,
        status: Status,
    ) -> Self {
        let delays = schedule
            .flights()
            .iter()
            .zip(&departures)
            .map(|(f, x)| x - f.departure)
            .collect();
        SolveResult {
            departures,
            delays,
            objective: delay_objective + penalty_total,
            delay_objective,
            penalty_total,
            status,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.status.is_feasible()
    }

    /// Unweighted delay minutes.
    pub fn delay_minutes(&self) -> Minutes {
        self.delays.iter().sum()
    }
}

/// A method for the inner LP. Implementations must return the same
/// objective on the same input; `departures` may differ only where the
/// optimum is not unique.
pub trait DelaySolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn solve(&self, system: &ChainSystem, schedule: &Schedule, penalty_total: Rational) -> SolveResult;
}

/// Forward propagation along each aircraft chain.
#[derive(Debug, Default, Clone, Copy)]
pub struct ChainPropagation;

impl DelaySolver for ChainPropagation {
    fn name(&self) -> &'static str {
        "propagate"
    }

    fn description(&self) -> &'static str {
        "forward propagation along aircraft chains, O(n)"
    }

    fn solve(&self, system: &ChainSystem, schedule: &Schedule, penalty_total: Rational) -> SolveResult {
        solve_min_delay(system, schedule, penalty_total)
    }
}

/// Two-phase simplex over exact rationals on the same LP.
#[derive(Debug, Default, Clone, Copy)]
pub struct SimplexReference;

impl DelaySolver for SimplexReference {
    fn name(&self) -> &'static str {
        "simplex"
    }

    fn description(&self) -> &'static str {
        "exact two-phase simplex with Bland's rule; reference for small instances"
    }

    fn solve(&self, system: &ChainSystem, schedule: &Schedule, penalty_total: Rational) -> SolveResult {
        lp_reference_solve(system, schedule, penalty_total)
    }
}
