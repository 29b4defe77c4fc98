//! Assembled inputs of one optimisation run.

use crate::candidates::{build_candidates, CandidateSet};
use crate::io::config::{ScenarioConfig, WeightPolicy};
use crate::io::csv::{parse_schedule_csv, ParseError};
use crate::rational::Rational;
use crate::schedule::{assign_deice, build_schedule, BuildOptions, Minutes, RawLeg, Schedule, ScheduleError};
use crate::solve::{DelaySolver, SolveResult};
use crate::system::{build_chain_system, CancellationSet, ChainSystem};

/// A schedule with de-ice applied, its constraint system and its candidates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub schedule: Schedule,
    pub system: ChainSystem,
    pub candidates: CandidateSet,
}

impl Problem {
    pub fn new(schedule: Schedule, candidates: CandidateSet) -> Self {
        let system = build_chain_system(&schedule);
        Problem {
            schedule,
            system,
            candidates,
        }
    }

    /// Inner solve with `gamma` cancelled; the penalty total is `gamma`'s.
    pub fn solve(&self, solver: &dyn DelaySolver, gamma: &CancellationSet) -> SolveResult {
        let system = self.system.with_cancellations(&self.schedule, gamma);
        solver.solve(&system, &self.schedule, gamma.penalty(&self.candidates))
    }

    pub fn with_penalties(&self, paired: Rational, reroute: Rational) -> Problem {
        Problem {
            schedule: self.schedule.clone(),
            system: self.system.clone(),
            candidates: self.candidates.with_penalties(paired, reroute),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

/// Published legs plus configuration; rebuilds a [`Problem`] for any
/// parameter change.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub legs: Vec<RawLeg>,
}

impl Scenario {
    pub fn new(config: ScenarioConfig, legs: Vec<RawLeg>) -> Self {
        Scenario { config, legs }
    }

    pub fn from_csv(bytes: &[u8], config: ScenarioConfig) -> Result<Self, ScenarioError> {
        let legs = parse_schedule_csv(bytes, &config)?;
        Ok(Scenario { config, legs })
    }

    /// Published schedule without de-ice.
    pub fn base_schedule(&self) -> Result<Schedule, ScheduleError> {
        let cfg = &self.config;
        let options = BuildOptions {
            day_start: cfg.day_start,
            turnaround: cfg.turnaround,
            day_end: cfg.end_of_day,
            leg_weights: cfg.weights == WeightPolicy::Column,
        };
        build_schedule(&self.legs, &cfg.airport_table()?, &options)
    }

    /// Earliest snow-on across airports; candidates must depart at or after
    /// it. `None` when no button has been pressed.
    pub fn snow_on(&self) -> Option<Minutes> {
        self.config.snow.iter().map(|s| s.snow_on).min()
    }

    pub fn problem(&self) -> Result<Problem, ScheduleError> {
        let base = self.base_schedule()?;
        Ok(self.problem_from(&base))
    }

    /// Builds from an already-validated published schedule.
    pub fn problem_from(&self, base: &Schedule) -> Problem {
        let cfg = &self.config;
        let schedule = assign_deice(base, &cfg.snow_events());
        let candidates = match self.snow_on() {
            Some(snow_on) => build_candidates(&schedule, &cfg.hub_pairs(), snow_on, cfg.p_alpha, cfg.p_beta),
            None => CandidateSet::default(),
        };
        Problem::new(schedule, candidates)
    }
}
