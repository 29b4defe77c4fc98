use super::{SolveResult, Status};
use crate::rational::Rational;
use crate::schedule::{weighted_delay, Schedule};
use crate::system::ChainSystem;

/// Componentwise-least departures: `x[i] = max(lower[i], x[prev] + gap)`
/// along each chain. The feasible set is closed under componentwise minimum,
/// so this point minimises `w . (x - s)` for every non-negative `w`.
pub fn solve_min_delay(system: &ChainSystem, schedule: &Schedule, penalty_total: Rational) -> SolveResult {
    debug_assert_eq!(system.len(), schedule.len());
    let mut x = system.lower.clone();
    let mut witnesses = Vec::new();
    for chain in schedule.chains() {
        let mut violated = false;
        for i in chain.clone() {
            if let Some(link) = system.incoming(i) {
                x[i] = x[i].max(x[link.prev] + link.gap);
            }
            if !violated && x[i] > system.upper[i] {
                witnesses.push(i);
                violated = true;
            }
        }
    }
    let status = if witnesses.is_empty() {
        Status::Feasible
    } else {
        Status::Infeasible { witnesses }
    };
    let delay = weighted_delay(schedule, &x);
    SolveResult::assemble(schedule, x, delay, penalty_total, status)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use crate::schedule::tests::airport;
    use crate::schedule::Flight;
    use crate::system::build_chain_system;
    use num_traits::Zero;

    fn schedule(legs: &[(&str, i64, i64)]) -> Schedule {
        let a = airport("AAA", 0, true);
        let b = airport("BBB", 0, true);
        let flights = legs
            .iter()
            .enumerate()
            .map(|(k, (tail, dep, dur))| {
                let (o, d) = if k % 2 == 0 { (a, b) } else { (b, a) };
                Flight::leg(k.to_string(), *tail, o, d, *dep, *dur)
            })
            .collect();
        Schedule::new(flights, 300).unwrap()
    }

    #[test]
    fn single_flight_no_propagation() {
        let s = schedule(&[("A", 100, 60)]);
        let mut sys = build_chain_system(&s);
        sys.upper[0] = 1315;
        let r = solve_min_delay(&sys, &s, Rational::zero());
        assert_eq!(r.departures, vec![100]);
        assert_eq!(r.objective, int(0));
        assert!(r.is_feasible());
    }

    #[test]
    fn chain_of_two() {
        let s = schedule(&[("A", 0, 60), ("A", 100, 60)]);
        let mut sys = build_chain_system(&s);
        sys.links[0].gap = 125;
        let r = solve_min_delay(&sys, &s, Rational::zero());
        assert_eq!(r.departures, vec![0, 125]);
        assert_eq!(r.delays, vec![0, 25]);
        assert_eq!(r.delay_objective, int(25));
    }

    #[test]
    fn contradictory_bounds() {
        let s = schedule(&[("A", 1400, 30)]);
        let mut sys = build_chain_system(&s);
        sys.upper[0] = 1315;
        let r = solve_min_delay(&sys, &s, int(7));
        assert_eq!(r.status, Status::Infeasible { witnesses: vec![0] });
        assert_eq!(r.objective, int(7));
    }

    #[test]
    fn one_witness_per_chain() {
        let s = schedule(&[("A", 0, 60), ("A", 100, 60), ("A", 200, 60), ("B", 0, 60)]);
        let mut sys = build_chain_system(&s);
        sys.upper = vec![2000, 50, 10, 2000];
        let r = solve_min_delay(&sys, &s, int(0));
        assert_eq!(r.status, Status::Infeasible { witnesses: vec![1] });
    }
}
