//! Re-timing of an airline's remaining day of operations after a snow-on
//! event, with selection of hub-to-hub cancellations.
//!
//! The pipeline is:
//!
//! 1. [`schedule::build_schedule`] groups published legs into per-aircraft
//!    chains and [`schedule::assign_deice`] adds de-ice time after snow-on.
//! 2. [`candidates::build_candidates`] collects the cancellable hub-to-hub legs
//!    and their penalties, and [`system::build_chain_system`] assembles the
//!    bound and chain-link constraints.
//! 3. A [`solve::DelaySolver`] computes minimum-delay departures for a fixed
//!    cancellation set; a [`cancel::CancelStrategy`] picks the set.
//! 4. [`sensitivity`] sweeps snow-on time and penalties and ranks flights.
//!
//! Solvers and strategies are looked up by name in a [`registry::Registry`].

pub mod cancel;
pub mod candidates;
pub mod clock;
pub mod io;
pub mod problem;
pub mod rational;
pub mod registry;
pub mod schedule;
pub mod sensitivity;
pub mod solve;
pub mod system;
pub mod verify;

pub use cancel::{
    exhaustive_oracle, objective_of, optimize, CancelError, CancelStrategy, CancellationPlan,
    CandidateOutcome, OptimizeReport, OracleOutcome,
};
pub use candidates::{build_candidates, Candidate, CandidateSet, PenaltyClass};
pub use io::{ReportFormat, ScenarioConfig};
pub use problem::{Problem, Scenario, ScenarioError};
pub use rational::Rational;
pub use registry::{Engine, Registry, RegistryError};
pub use schedule::{
    assign_deice, build_schedule, Airport, AirportCode, Flight, Minutes, RawLeg, Schedule,
    ScheduleError, SnowEvent,
};
pub use sensitivity::{rank_candidates, sweep_penalty, sweep_snow_on, RankEntry, SweepError, SweepPoint};
pub use solve::{lp_reference_solve, solve_min_delay, DelaySolver, SolveResult, Status};
pub use system::{build_chain_system, CancellationSet, ChainSystem, Link};
