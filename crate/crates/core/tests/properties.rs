use deice_core::io::reroute::{flown_legs, is_connected};
use deice_core::io::synthesize_reroutes;
use deice_core::rational::int;
use deice_core::schedule::Flight;
use deice_core::solve::{ChainPropagation, SimplexReference};
use deice_core::verify::{instance_from_seed, InstanceShape};
use deice_core::{
    build_candidates, exhaustive_oracle, lp_reference_solve, optimize, rank_candidates, solve_min_delay, Airport,
    CancellationSet, DelaySolver, Minutes, Problem, Schedule,
};
use proptest::prelude::*;

fn hub(code: &str) -> Airport {
    Airport::new(code.parse().unwrap(), 0, true).unwrap()
}

/// One aircraft shuttling between two hubs with arbitrary timings.
fn shuttle() -> impl Strategy<Value = Problem> {
    let leg = (30..=240i64, 20..=90i64, -40..=80i64, 0..=1i64, 1..=4i64);
    (prop::collection::vec(leg, 1..10), 0..=300i64, 0..=120i64).prop_map(|(legs, snow_on, p)| {
        let (sea, pdx) = (hub("SEA"), hub("PDX"));
        let mut departure = 0;
        let mut flights = Vec::new();
        for (k, (r, t, ground, d, w)) in legs.into_iter().enumerate() {
            let (o, dst) = if k % 2 == 0 { (sea, pdx) } else { (pdx, sea) };
            let mut f = Flight::leg(format!("{}", 100 + k), "N1", o, dst, departure, r);
            f.turnaround = t;
            f.deice = 20 * d;
            f.weight = int(w);
            departure += r + t + ground.max(-t);
            flights.push(f);
        }
        let schedule = Schedule::new(flights, 300).unwrap();
        let pairs = [("SEA".parse().unwrap(), "PDX".parse().unwrap())];
        let candidates = build_candidates(&schedule, &pairs, snow_on, int(p), int(3 * p));
        Problem::new(schedule, candidates)
    })
}

fn subset(problem: &Problem, mask: u32) -> CancellationSet {
    let members = problem.candidates.flights().enumerate().filter(|(k, _)| mask & (1 << k) != 0).map(|(_, f)| f);
    CancellationSet::new(members, &problem.candidates).unwrap()
}

proptest! {
    #[test]
    fn propagation_matches_simplex(problem in shuttle(), mask in any::<u32>()) {
        let gamma = subset(&problem, mask);
        let system = problem.system.with_cancellations(&problem.schedule, &gamma);
        let fast = solve_min_delay(&system, &problem.schedule, int(0));
        let lp = lp_reference_solve(&system, &problem.schedule, int(0));
        prop_assert_eq!(fast.is_feasible(), lp.is_feasible());
        if fast.is_feasible() {
            prop_assert_eq!(fast.delay_objective, lp.delay_objective);
            prop_assert!(system.admits(&fast.departures));
        }
        prop_assert!(fast.delays.iter().all(|&d| d >= 0));
    }

    #[test]
    fn cancelling_more_never_adds_delay(problem in shuttle(), mask in any::<u32>(), extra in any::<u32>()) {
        let small = subset(&problem, mask);
        let large = subset(&problem, mask | extra);
        let a = problem.solve(&ChainPropagation, &small);
        let b = problem.solve(&ChainPropagation, &large);
        prop_assert!(b.delay_objective <= a.delay_objective);
        prop_assert!(b.departures.iter().zip(&a.departures).all(|(x, y)| x <= y));
    }

    #[test]
    fn enumeration_bounds_screening(problem in shuttle()) {
        let screened = optimize(&problem, &ChainPropagation);
        let oracle = exhaustive_oracle(&problem, &ChainPropagation).unwrap();
        if screened.final_result.is_feasible() {
            prop_assert!(oracle.feasible);
            prop_assert!(oracle.objective <= screened.final_result.objective);
        }
        prop_assert_eq!(screened.lp_count, problem.candidates.len() + 2);
        prop_assert_eq!(&optimize(&problem, &ChainPropagation), &screened);
    }

    #[test]
    fn ranking_is_sorted_and_positive(problem in shuttle()) {
        let report = optimize(&problem, &ChainPropagation);
        let ranks = rank_candidates(&report.plan, int(3));
        prop_assert!(ranks.iter().all(|e| e.max_p_alpha > int(0)));
        prop_assert!(ranks.windows(2).all(|w| w[0].max_p_alpha > w[1].max_p_alpha
            || (w[0].max_p_alpha == w[1].max_p_alpha && w[0].flight < w[1].flight)));
        prop_assert!(ranks.iter().enumerate().all(|(k, e)| e.rank == k + 1));
    }

    #[test]
    fn reroutes_restore_continuity(seed in any::<u64>(), mask in any::<u32>()) {
        let problem = instance_from_seed(seed, &InstanceShape { max_flights: 30, ..InstanceShape::default() });
        let gamma = subset(&problem, mask);
        if let Ok(reroutes) = synthesize_reroutes(&gamma, &problem.schedule) {
            for legs in flown_legs(&problem.schedule, &gamma, &reroutes) {
                prop_assert!(is_connected(&legs));
            }
        }
    }

    #[test]
    fn solvers_agree_through_the_trait(seed in any::<u64>()) {
        let shape = InstanceShape { tight_day_end: seed % 2 == 0, random_weights: true, ..InstanceShape::default() };
        let problem = instance_from_seed(seed, &shape);
        let empty = CancellationSet::empty();
        let solvers: [&dyn DelaySolver; 2] = [&ChainPropagation, &SimplexReference];
        let results: Vec<_> = solvers.iter().map(|s| problem.solve(*s, &empty)).collect();
        prop_assert_eq!(results[0].is_feasible(), results[1].is_feasible());
        if results[0].is_feasible() {
            prop_assert_eq!(results[0].objective, results[1].objective);
        }
    }
}

fn spoke(code: &str) -> Airport {
    Airport::new(code.parse().unwrap(), 0, false).unwrap()
}

/// Legs `(tail, origin, destination, departure, deice)` with 60-minute flights and
/// 40-minute turns; consecutive entries with the same tail form a chain.
fn problem(legs: &[(&str, &str, &str, Minutes, Minutes)], paired: i64, reroute: i64) -> Problem {
    let airport = |c: &str| if c == "SEA" || c == "PDX" { hub(c) } else { spoke(c) };
    let flights = legs
        .iter()
        .enumerate()
        .map(|(k, &(tail, o, d, s, deice))| {
            let mut f = Flight::leg(format!("{}", 10 + k), tail, airport(o), airport(d), s, 60);
            f.turnaround = 40;
            f.deice = deice;
            f
        })
        .collect();
    let schedule = Schedule::new(flights, 300).unwrap();
    let pairs = [("SEA".parse().unwrap(), "PDX".parse().unwrap())];
    let candidates = build_candidates(&schedule, &pairs, 0, int(paired), int(reroute));
    Problem::new(schedule, candidates)
}

#[test]
fn candidate_saving_two_hundred_minutes_is_cancelled() {
    let problem = problem(
        &[
            ("N1", "GEG", "SEA", 0, 0),
            ("N1", "SEA", "PDX", 100, 200),
            ("N1", "PDX", "GEG", 200, 0),
            ("N2", "GEG", "SEA", 0, 0),
            ("N2", "SEA", "GEG", 200, 0),
            ("N2", "GEG", "SEA", 400, 0),
        ],
        60,
        60,
    );
    assert_eq!(problem.candidates.flights().collect::<Vec<_>>(), vec![1]);
    let report = optimize(&problem, &ChainPropagation);
    assert_eq!(report.plan.chosen.to_vec(), vec![1]);
    assert_eq!(report.baseline.objective, int(200));
    assert_eq!(report.final_result.objective, int(60));
    assert_eq!(report.baseline.objective - report.final_result.objective, int(140));
    let oracle = exhaustive_oracle(&problem, &ChainPropagation).unwrap();
    assert_eq!((oracle.chosen.to_vec(), oracle.objective), (vec![1], int(60)));

    let reroutes = synthesize_reroutes(&report.plan.chosen, &problem.schedule).unwrap();
    assert_eq!(reroutes.len(), 1);
    assert_eq!(reroutes[0].companion, 2);
    assert_eq!(reroutes[0].new_origin, Some("SEA".parse().unwrap()));
}

#[test]
fn closed_form_thresholds_match_a_literal_sweep() {
    let problem = problem(
        &[
            ("N1", "SEA", "PDX", 0, 150),
            ("N1", "PDX", "SEA", 100, 0),
            ("N1", "SEA", "GEG", 200, 0),
            ("N2", "GEG", "SEA", 0, 0),
            ("N2", "SEA", "PDX", 100, 90),
            ("N2", "PDX", "GEG", 200, 0),
        ],
        60,
        180,
    );
    let report = optimize(&problem, &ChainPropagation);
    let improvement = |f: usize| report.plan.outcome(f).unwrap().improvement;
    assert_eq!((improvement(0), improvement(1), improvement(4)), (int(300), int(100), int(90)));
    let ranks = rank_candidates(&report.plan, int(3));
    let listed: Vec<_> = ranks.iter().map(|e| (e.flight, e.max_p_alpha)).collect();
    assert_eq!(listed, vec![(0, int(300)), (1, int(100)), (4, int(30))]);
    for entry in &ranks {
        for (p, kept) in [(entry.max_p_alpha - int(1), true), (entry.max_p_alpha + int(1), false)] {
            let priced = problem.with_penalties(p, int(3) * p);
            assert_eq!(optimize(&priced, &SimplexReference).plan.chosen.contains(entry.flight), kept);
        }
    }
}
