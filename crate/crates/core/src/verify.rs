//! Random hub-and-spoke instances and the screening-versus-enumeration
//! comparison harness.

use crate::cancel::{exhaustive_oracle, optimize, CancelError, EXHAUSTIVE_LIMIT};
use crate::candidates::{build_candidates, PenaltyClass};
use crate::problem::Problem;
use crate::rational::{self, int, Rational};
use crate::schedule::{assign_deice, Airport, AirportCode, Flight, Minutes, Schedule, SnowEvent};
use crate::solve::DelaySolver;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

const HUBS: [(&str, Minutes); 2] = [("SEA", 0), ("PDX", 0)];
const SPOKES: [(&str, Minutes); 8] = [
    ("GEG", 0),
    ("BOI", 60),
    ("MFR", 0),
    ("EUG", 0),
    ("RDM", 0),
    ("PSC", 0),
    ("MSO", 60),
    ("BZN", 60),
];

fn airport((code, offset): (&str, Minutes), hub: bool) -> Airport {
    Airport::new(code.parse().expect("static code"), offset, hub).expect("static airport")
}

/// Knobs of the random instance generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceShape {
    pub max_flights: usize,
    pub max_chains: usize,
    pub min_candidates: usize,
    pub max_candidates: Option<usize>,
    /// Draw per-flight end-of-day bounds close to the published times, so a
    /// good share of instances is infeasible.
    pub tight_day_end: bool,
    pub random_weights: bool,
}

impl Default for InstanceShape {
    fn default() -> Self {
        InstanceShape {
            max_flights: 50,
            max_chains: 8,
            min_candidates: 0,
            max_candidates: None,
            tight_day_end: false,
            random_weights: false,
        }
    }
}

impl InstanceShape {
    /// Shape used by the comparison harness.
    pub fn harness(max_candidates: usize) -> Self {
        InstanceShape {
            min_candidates: 1,
            max_candidates: Some(max_candidates),
            random_weights: true,
            ..InstanceShape::default()
        }
    }
}

/// Draws until the candidate count fits the shape.
pub fn random_problem<R: Rng>(rng: &mut R, shape: &InstanceShape) -> Problem {
    loop {
        let problem = draw(rng, shape);
        let c = problem.candidates.len();
        if c >= shape.min_candidates && shape.max_candidates.is_none_or(|m| c <= m) {
            return problem;
        }
    }
}

pub fn instance_from_seed(seed: u64, shape: &InstanceShape) -> Problem {
    random_problem(&mut ChaCha8Rng::seed_from_u64(seed), shape)
}

/// Published schedule only, no de-ice or candidates.
pub fn random_schedule<R: Rng>(rng: &mut R, shape: &InstanceShape) -> Schedule {
    let hubs: Vec<Airport> = HUBS.iter().map(|&h| airport(h, true)).collect();
    let spokes: Vec<Airport> = SPOKES.iter().map(|&s| airport(s, false)).collect();
    let chains = rng.gen_range(1..=shape.max_chains.max(1));
    let per_chain = (shape.max_flights / chains).clamp(1, 12);
    let mut flights = Vec::new();
    for k in 0..chains {
        let legs = rng.gen_range(1..=per_chain);
        let mut at = if rng.gen_bool(0.6) {
            *hubs.choose(rng).unwrap()
        } else {
            *spokes.choose(rng).unwrap()
        };
        let mut departure: Minutes = rng.gen_range(0..=180);
        for _ in 0..legs {
            let to = if at.is_hub {
                if rng.gen_bool(0.4) {
                    *hubs.iter().find(|h| h.code != at.code).unwrap()
                } else {
                    *spokes.choose(rng).unwrap()
                }
            } else {
                *hubs.choose(rng).unwrap()
            };
            let duration = rng.gen_range(30..=240);
            let number = 2000 + flights.len();
            let mut f = Flight::leg(number.to_string(), format!("N{k:02}"), at, to, departure, duration);
            f.turnaround = rng.gen_range(20..=90);
            if shape.random_weights {
                f.weight = Rational::new(rng.gen_range(1..=6), 2);
            }
            if shape.tight_day_end {
                let slack: Minutes = rng.gen_range(-30..=300);
                f.day_end = departure + duration + f.turnaround + 20 + to.tz_offset_minutes + slack;
            }
            let ground = rng.gen_range(-(f.turnaround / 2)..=60);
            departure += duration + f.turnaround + ground;
            at = to;
            flights.push(f);
            if departure > 1100 {
                break;
            }
        }
    }
    Schedule::new(flights, 300).expect("generator builds valid chains")
}

fn draw<R: Rng>(rng: &mut R, shape: &InstanceShape) -> Problem {
    let base = random_schedule(rng, shape);
    let snow_on: Minutes = rng.gen_range(0..=480);
    let events: Vec<SnowEvent> = HUBS
        .iter()
        .map(|h| SnowEvent {
            airport: h.0.parse().unwrap(),
            snow_on,
            deice_minutes: 20,
        })
        .collect();
    let schedule = assign_deice(&base, &events);
    let p_alpha = int(rng.gen_range(0..=120));
    let pair: (AirportCode, AirportCode) = (HUBS[0].0.parse().unwrap(), HUBS[1].0.parse().unwrap());
    let candidates = build_candidates(&schedule, &[pair], snow_on, p_alpha, p_alpha * int(3));
    Problem::new(schedule, candidates)
}

/// Per-instance seeds derived from one master seed.
pub fn instance_seeds(master: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    (0..count).map(|_| rng.gen()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlightDump {
    pub index: usize,
    pub flight_number: String,
    pub tail: String,
    pub origin: AirportCode,
    pub destination: AirportCode,
    pub departure: Minutes,
    pub duration: Minutes,
    pub turnaround: Minutes,
    pub deice: Minutes,
    #[serde(with = "rational::serde_str")]
    pub weight: Rational,
    pub day_end: Minutes,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CandidateDump {
    pub flight: usize,
    pub class: PenaltyClass,
    #[serde(with = "rational::serde_str")]
    pub penalty: Rational,
}

/// Everything needed to rebuild an instance by hand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InstanceDump {
    pub flights: Vec<FlightDump>,
    pub candidates: Vec<CandidateDump>,
}

impl InstanceDump {
    pub fn of(problem: &Problem) -> Self {
        InstanceDump {
            flights: problem
                .schedule
                .flights()
                .iter()
                .map(|f| FlightDump {
                    index: f.index,
                    flight_number: f.flight_number.clone(),
                    tail: f.tail.clone(),
                    origin: f.origin.code,
                    destination: f.destination.code,
                    departure: f.departure,
                    duration: f.duration,
                    turnaround: f.turnaround,
                    deice: f.deice,
                    weight: f.weight,
                    day_end: f.day_end,
                })
                .collect(),
            candidates: problem
                .candidates
                .iter()
                .map(|c| CandidateDump {
                    flight: c.flight,
                    class: c.class,
                    penalty: c.penalty,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub instance: usize,
    pub seed: u64,
    pub candidate_count: usize,
    pub screening_cancels: Vec<usize>,
    #[serde(with = "rational::serde_str")]
    pub screening_objective: Rational,
    pub screening_feasible: bool,
    pub exhaustive_cancels: Vec<usize>,
    #[serde(with = "rational::serde_str")]
    pub exhaustive_objective: Rational,
    pub exhaustive_feasible: bool,
    pub instance_dump: InstanceDump,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MembershipViolation {
    pub instance: usize,
    pub seed: u64,
    pub flight: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub instances: usize,
    pub max_candidates: usize,
    pub solver: String,
    pub agreements: usize,
    pub agreement_rate: f64,
    pub screening_lps: usize,
    pub exhaustive_lps: usize,
    pub counterexamples: Vec<Counterexample>,
    pub membership_violations: Vec<MembershipViolation>,
}

/// Outcome of one harness instance.
#[derive(Debug, Clone)]
pub struct InstanceCheck {
    pub agrees: bool,
    pub counterexample: Option<Counterexample>,
    pub membership_violations: Vec<usize>,
    pub screening_lps: usize,
    pub exhaustive_lps: usize,
}

/// Screening against enumeration on one instance, plus the rule that a
/// candidate is kept exactly when its penalty is below its delay saving.
pub fn check_instance(
    instance: usize,
    seed: u64,
    problem: &Problem,
    solver: &dyn DelaySolver,
) -> Result<InstanceCheck, CancelError> {
    let screened = optimize(problem, solver);
    let oracle = exhaustive_oracle(problem, solver)?;
    let result = &screened.final_result;
    let agrees = result.is_feasible() == oracle.feasible && (!oracle.feasible || result.objective == oracle.objective);
    let membership_violations = screened
        .plan
        .outcomes
        .iter()
        .filter(|o| screened.plan.chosen.contains(o.flight) != (o.feasible && o.penalty < o.improvement))
        .map(|o| o.flight)
        .collect();
    let counterexample = (!agrees).then(|| Counterexample {
        instance,
        seed,
        candidate_count: problem.candidates.len(),
        screening_cancels: screened.plan.chosen.to_vec(),
        screening_objective: result.objective,
        screening_feasible: result.is_feasible(),
        exhaustive_cancels: oracle.chosen.to_vec(),
        exhaustive_objective: oracle.objective,
        exhaustive_feasible: oracle.feasible,
        instance_dump: InstanceDump::of(problem),
    });
    Ok(InstanceCheck {
        agrees,
        counterexample,
        membership_violations,
        screening_lps: screened.lp_count,
        exhaustive_lps: oracle.lp_count,
    })
}

/// Runs the comparison on `instances` random instances with at most
/// `max_candidates` candidates each.
pub fn run_verify(
    seed: u64,
    instances: usize,
    max_candidates: usize,
    solver: &dyn DelaySolver,
) -> Result<VerifyReport, CancelError> {
    if max_candidates > EXHAUSTIVE_LIMIT {
        return Err(CancelError::CandidateSetTooLarge {
            size: max_candidates,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let shape = InstanceShape::harness(max_candidates);
    let seeds = instance_seeds(seed, instances);
    let checks: Vec<(usize, u64, InstanceCheck)> = seeds
        .par_iter()
        .enumerate()
        .map(|(k, &s)| {
            let problem = instance_from_seed(s, &shape);
            check_instance(k, s, &problem, solver).map(|c| (k, s, c))
        })
        .collect::<Result<_, _>>()?;
    let agreements = checks.iter().filter(|c| c.2.agrees).count();
    Ok(VerifyReport {
        seed,
        instances,
        max_candidates,
        solver: solver.name().to_string(),
        agreements,
        agreement_rate: if instances == 0 {
            1.0
        } else {
            agreements as f64 / instances as f64
        },
        screening_lps: checks.iter().map(|c| c.2.screening_lps).sum(),
        exhaustive_lps: checks.iter().map(|c| c.2.exhaustive_lps).sum(),
        membership_violations: checks
            .iter()
            .flat_map(|(k, s, c)| {
                c.membership_violations.iter().map(move |&flight| MembershipViolation {
                    instance: *k,
                    seed: *s,
                    flight,
                })
            })
            .collect(),
        counterexamples: checks.into_iter().filter_map(|c| c.2.counterexample).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solve::ChainPropagation;

    #[test]
    fn seeds_reproduce_instances() {
        let shape = InstanceShape::harness(10);
        let seeds = instance_seeds(7, 3);
        assert_eq!(seeds, instance_seeds(7, 3));
        let a = instance_from_seed(seeds[1], &shape);
        let b = instance_from_seed(seeds[1], &shape);
        assert_eq!(a, b);
        assert!(a.schedule.len() <= 50);
        assert!((1..=10).contains(&a.candidates.len()));
    }

    #[test]
    fn small_harness_run_is_deterministic() {
        let one = run_verify(3, 8, 6, &ChainPropagation).unwrap();
        let two = run_verify(3, 8, 6, &ChainPropagation).unwrap();
        assert_eq!(one, two);
        assert!(one.membership_violations.is_empty());
    }

    #[test]
    fn guard_rejects_large_candidate_limit() {
        assert!(run_verify(1, 1, 15, &ChainPropagation).is_err());
    }
}
