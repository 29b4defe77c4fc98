//! Outer optimisation over cancellation sets.
//!
//! [`optimize`] screens each candidate on its own: one LP without
//! cancellations, one per candidate, and a final LP for the chosen set.
//! [`exhaustive_oracle`] enumerates every subset and is the reference the
//! screening rule is checked against.

use crate::candidates::{CandidateSet, PenaltyClass};
use crate::problem::Problem;
use crate::rational::Rational;
use crate::solve::{DelaySolver, SolveResult};
use crate::system::CancellationSet;
use rayon::prelude::*;
use std::cmp::Ordering;

/// Largest candidate set [`exhaustive_oracle`] accepts.
pub const EXHAUSTIVE_LIMIT: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CancelError {
    #[error("exhaustive search over {size} candidates exceeds the limit of {limit}")]
    CandidateSetTooLarge { size: usize, limit: usize },
}

/// Screening data for one candidate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateOutcome {
    pub flight: usize,
    pub class: PenaltyClass,
    pub penalty: Rational,
    /// Objective with only this flight cancelled, penalty included.
    pub singleton_objective: Rational,
    pub singleton_delay: Rational,
    /// Baseline delay objective minus `singleton_delay`.
    pub improvement: Rational,
    pub feasible: bool,
    /// Whether cancelling this flight alone changes any departure.
    pub moves_departures: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CancellationPlan {
    pub candidates: CandidateSet,
    pub chosen: CancellationSet,
    /// One entry per candidate, in candidate order.
    pub outcomes: Vec<CandidateOutcome>,
}

impl CancellationPlan {
    pub fn outcome(&self, flight: usize) -> Option<&CandidateOutcome> {
        self.outcomes.iter().find(|o| o.flight == flight)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimizeReport {
    pub strategy: &'static str,
    pub solver: &'static str,
    pub baseline: SolveResult,
    pub final_result: SolveResult,
    pub plan: CancellationPlan,
    /// Inner solves performed.
    pub lp_count: usize,
}

/// `delay + sum of penalties over gamma`.
pub fn objective_of(delay_objective: Rational, gamma: &CancellationSet, candidates: &CandidateSet) -> Rational {
    delay_objective + gamma.penalty(candidates)
}

fn screen(problem: &Problem, solver: &dyn DelaySolver, baseline: &SolveResult) -> Vec<CandidateOutcome> {
    problem
        .candidates
        .as_slice()
        .par_iter()
        .map(|c| {
            let gamma = CancellationSet::new([c.flight], &problem.candidates).expect("candidate is in its own set");
            let single = problem.solve(solver, &gamma);
            CandidateOutcome {
                flight: c.flight,
                class: c.class,
                penalty: c.penalty,
                singleton_objective: single.objective,
                singleton_delay: single.delay_objective,
                improvement: baseline.delay_objective - single.delay_objective,
                feasible: single.is_feasible(),
                moves_departures: single.departures != baseline.departures,
            }
        })
        .collect()
}

fn select(outcomes: &[CandidateOutcome], baseline: &SolveResult, candidates: &CandidateSet) -> CancellationSet {
    let chosen = outcomes
        .iter()
        .filter(|o| o.feasible && o.singleton_objective < baseline.objective)
        .map(|o| o.flight);
    CancellationSet::new(chosen, candidates).expect("outcomes are candidates")
}

/// Keeps every candidate whose lone cancellation strictly lowers the
/// objective, then re-solves with all of them. An infeasible baseline is
/// compared through its relaxed objective; only feasible singletons qualify.
pub fn optimize(problem: &Problem, solver: &dyn DelaySolver) -> OptimizeReport {
    let baseline = problem.solve(solver, &CancellationSet::empty());
    let outcomes = screen(problem, solver, &baseline);
    let chosen = select(&outcomes, &baseline, &problem.candidates);
    let final_result = problem.solve(solver, &chosen);
    OptimizeReport {
        strategy: "singleton",
        solver: solver.name(),
        lp_count: problem.candidates.len() + 2,
        baseline,
        final_result,
        plan: CancellationPlan {
            candidates: problem.candidates.clone(),
            chosen,
            outcomes,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleOutcome {
    pub chosen: CancellationSet,
    pub objective: Rational,
    /// False when no subset is feasible; `chosen` is then empty and
    /// `objective` is the relaxed baseline objective.
    pub feasible: bool,
    pub lp_count: usize,
}

/// Minimises over all `2^c` subsets. Ties go to the lexicographically
/// smallest index list.
pub fn exhaustive_oracle(problem: &Problem, solver: &dyn DelaySolver) -> Result<OracleOutcome, CancelError> {
    let flights: Vec<usize> = problem.candidates.flights().collect();
    let c = flights.len();
    if c > EXHAUSTIVE_LIMIT {
        return Err(CancelError::CandidateSetTooLarge {
            size: c,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let subsets = 1usize << c;
    let best = (0..subsets)
        .into_par_iter()
        .filter_map(|mask| {
            let members: Vec<usize> = (0..c).filter(|k| mask & (1 << k) != 0).map(|k| flights[k]).collect();
            let gamma = CancellationSet::new(members.iter().copied(), &problem.candidates).expect("subset of candidates");
            let result = problem.solve(solver, &gamma);
            result.is_feasible().then_some((result.objective, members))
        })
        .min_by(|a, b| match a.0.cmp(&b.0) {
            Ordering::Equal => a.1.cmp(&b.1),
            other => other,
        });
    Ok(match best {
        Some((objective, members)) => OracleOutcome {
            chosen: CancellationSet::new(members, &problem.candidates).expect("subset of candidates"),
            objective,
            feasible: true,
            lp_count: subsets,
        },
        None => OracleOutcome {
            chosen: CancellationSet::empty(),
            objective: problem.solve(solver, &CancellationSet::empty()).objective,
            feasible: false,
            lp_count: subsets + 1,
        },
    })
}

/// A way of choosing the cancellation set.
pub trait CancelStrategy: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn run(&self, problem: &Problem, solver: &dyn DelaySolver) -> Result<OptimizeReport, CancelError>;
}

/// Per-candidate screening, `c + 2` inner solves.
#[derive(Debug, Default, Clone, Copy)]
pub struct SingletonScreening;

impl CancelStrategy for SingletonScreening {
    fn name(&self) -> &'static str {
        "singleton"
    }

    fn description(&self) -> &'static str {
        "cancel every candidate whose lone cancellation lowers the objective (c + 2 LPs)"
    }

    fn run(&self, problem: &Problem, solver: &dyn DelaySolver) -> Result<OptimizeReport, CancelError> {
        Ok(optimize(problem, solver))
    }
}

/// Full enumeration; the screening data is still reported.
#[derive(Debug, Default, Clone, Copy)]
pub struct ExhaustiveSearch;

impl CancelStrategy for ExhaustiveSearch {
    fn name(&self) -> &'static str {
        "exhaustive"
    }

    fn description(&self) -> &'static str {
        "enumerate all 2^c cancellation sets (at most 14 candidates)"
    }

    fn run(&self, problem: &Problem, solver: &dyn DelaySolver) -> Result<OptimizeReport, CancelError> {
        let oracle = exhaustive_oracle(problem, solver)?;
        let baseline = problem.solve(solver, &CancellationSet::empty());
        let outcomes = screen(problem, solver, &baseline);
        let final_result = problem.solve(solver, &oracle.chosen);
        Ok(OptimizeReport {
            strategy: self.name(),
            solver: solver.name(),
            lp_count: oracle.lp_count + problem.candidates.len() + 2,
            baseline,
            final_result,
            plan: CancellationPlan {
                candidates: problem.candidates.clone(),
                chosen: oracle.chosen,
                outcomes,
            },
        })
    }
}
