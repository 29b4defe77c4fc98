//! Snow-on and penalty sweeps, and the ranked list of flights to cancel.

use crate::cancel::{CancelError, CancellationPlan, OptimizeReport};
use crate::candidates::PenaltyClass;
use crate::problem::{Problem, Scenario};
use crate::rational::{int, Rational};
use crate::registry::Engine;
use crate::schedule::{Minutes, ScheduleError};
use crate::io::config::SnowSetting;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Cancel(#[from] CancelError),
    #[error("beta_ratio must be at least 2")]
    BetaRatio,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepPoint {
    #[serde(with = "crate::rational::serde_str")]
    pub parameter: Rational,
    pub cancels: Vec<usize>,
    pub candidate_count: usize,
    /// Weighted delay objective of the final schedule.
    #[serde(with = "crate::rational::serde_str")]
    pub total_delay: Rational,
    pub delay_minutes: Minutes,
    #[serde(with = "crate::rational::serde_str")]
    pub objective: Rational,
    pub feasible: bool,
}

impl SweepPoint {
    fn from_report(parameter: Rational, report: &OptimizeReport) -> Self {
        SweepPoint {
            parameter,
            cancels: report.plan.chosen.to_vec(),
            candidate_count: report.plan.candidates.len(),
            total_delay: report.final_result.delay_objective,
            delay_minutes: report.final_result.delay_minutes(),
            objective: report.final_result.objective,
            feasible: report.final_result.is_feasible(),
        }
    }
}

/// Re-solves with every snow event moved to each time. A scenario without
/// snow events sweeps all hub airports with the default de-ice minutes.
pub fn sweep_snow_on(scenario: &Scenario, times: &[Minutes], engine: &Engine) -> Result<Vec<SweepPoint>, SweepError> {
    let base = scenario.base_schedule()?;
    let mut template = scenario.clone();
    if template.config.snow.is_empty() {
        template.config.snow = template
            .config
            .airports
            .iter()
            .filter(|a| a.is_hub)
            .map(|a| SnowSetting {
                airport: a.code,
                snow_on: 0,
                deice: None,
            })
            .collect();
    }
    times
        .par_iter()
        .map(|&t| {
            let at = Scenario::new(template.config.with_uniform_snow_on(t), Vec::new());
            let problem = at.problem_from(&base);
            let report = engine.run(&problem)?;
            Ok(SweepPoint::from_report(int(t), &report))
        })
        .collect()
}

/// Re-solves with `p_alpha` for paired candidates and `beta_ratio * p_alpha`
/// for the rest.
pub fn sweep_penalty(
    problem: &Problem,
    p_alpha_values: &[Rational],
    beta_ratio: Rational,
    engine: &Engine,
) -> Result<Vec<SweepPoint>, SweepError> {
    if beta_ratio < int(2) {
        return Err(SweepError::BetaRatio);
    }
    p_alpha_values
        .par_iter()
        .map(|&p| {
            let priced = problem.with_penalties(p, beta_ratio * p);
            let report = engine.run(&priced)?;
            Ok(SweepPoint::from_report(p, &report))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankEntry {
    pub rank: usize,
    pub flight: usize,
    /// `p_alpha` below which cancelling this flight is chosen.
    #[serde(with = "crate::rational::serde_str")]
    pub max_p_alpha: Rational,
    pub class: PenaltyClass,
    #[serde(with = "crate::rational::serde_str")]
    pub improvement: Rational,
}

/// Closed-form thresholds from the screening data: a paired candidate is
/// chosen while `p_alpha < improvement`, a re-route candidate while
/// `beta_ratio * p_alpha < improvement`. Candidates that never help are
/// left out.
pub fn rank_candidates(plan: &CancellationPlan, beta_ratio: Rational) -> Vec<RankEntry> {
    let mut entries: Vec<RankEntry> = plan
        .outcomes
        .iter()
        .filter(|o| o.feasible)
        .filter_map(|o| {
            let threshold = match o.class {
                PenaltyClass::Paired => o.improvement,
                PenaltyClass::Reroute if beta_ratio.is_zero() => return None,
                PenaltyClass::Reroute => o.improvement / beta_ratio,
            };
            threshold.is_positive().then_some(RankEntry {
                rank: 0,
                flight: o.flight,
                max_p_alpha: threshold,
                class: o.class,
                improvement: o.improvement,
            })
        })
        .collect();
    entries.sort_by(|a, b| b.max_p_alpha.cmp(&a.max_p_alpha).then(a.flight.cmp(&b.flight)));
    for (k, e) in entries.iter_mut().enumerate() {
        e.rank = k + 1;
    }
    entries
}
