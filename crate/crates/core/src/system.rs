//! Bound and chain-link constraints of the inner re-timing LP.
//!
//! Every flight carries `lower <= x <= upper`; every non-sunrise flight has
//! one link `x[next] >= x[prev] + gap` to its predecessor on the aircraft.

use crate::candidates::CandidateSet;
use crate::schedule::{Minutes, Schedule};
use serde::Serialize;
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Link {
    pub prev: usize,
    pub next: usize,
    pub gap: Minutes,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainSystem {
    pub lower: Vec<Minutes>,
    pub upper: Vec<Minutes>,
    /// Ordered by `next`.
    pub links: Vec<Link>,
    incoming: Vec<Option<usize>>,
}

impl ChainSystem {
    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    /// Link into `index` from its chain predecessor.
    pub fn incoming(&self, index: usize) -> Option<&Link> {
        self.incoming[index].map(|k| &self.links[k])
    }

    /// System with the cancelled legs' duration, turnaround and de-ice zeroed:
    /// their own upper bound loosens and the link out of each becomes 0.
    pub fn with_cancellations(&self, schedule: &Schedule, gamma: &CancellationSet) -> ChainSystem {
        let mut next = self.clone();
        for &i in gamma.iter() {
            let f = schedule.flight(i);
            next.upper[i] = f.day_end - f.destination_offset();
            if let Some(k) = schedule.next(i).and_then(|j| next.incoming[j]) {
                next.links[k].gap = 0;
            }
        }
        next
    }

    /// Whether `x` satisfies every bound and link.
    pub fn admits(&self, x: &[Minutes]) -> bool {
        x.len() == self.len()
            && x.iter().zip(&self.lower).all(|(x, l)| x >= l)
            && x.iter().zip(&self.upper).all(|(x, u)| x <= u)
            && self.links.iter().all(|l| x[l.next] >= x[l.prev] + l.gap)
    }
}

pub fn build_chain_system(schedule: &Schedule) -> ChainSystem {
    let flights = schedule.flights();
    let lower = flights.iter().map(|f| f.departure.max(-f.origin_offset())).collect();
    let upper = flights
        .iter()
        .map(|f| f.day_end - f.destination_offset() - f.duration - f.turnaround - f.deice)
        .collect();
    let mut links = Vec::with_capacity(flights.len());
    let mut incoming = vec![None; flights.len()];
    for f in flights {
        if let Some(p) = schedule.previous(f.index) {
            let prev = &flights[p];
            incoming[f.index] = Some(links.len());
            links.push(Link {
                prev: p,
                next: f.index,
                gap: prev.duration + prev.turnaround + prev.deice,
            });
        }
    }
    ChainSystem {
        lower,
        upper,
        links,
        incoming,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("flight {flight} is not a cancellation candidate")]
pub struct CancelOutsideCandidates {
    pub flight: usize,
}

/// A set of cancelled legs, guaranteed to be a subset of the candidates.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct CancellationSet {
    members: BTreeSet<usize>,
}

impl CancellationSet {
    pub fn new(
        members: impl IntoIterator<Item = usize>,
        candidates: &CandidateSet,
    ) -> Result<Self, CancelOutsideCandidates> {
        let members: BTreeSet<usize> = members.into_iter().collect();
        if let Some(&flight) = members.iter().find(|i| !candidates.contains(**i)) {
            return Err(CancelOutsideCandidates { flight });
        }
        Ok(CancellationSet { members })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn iter(&self) -> impl Iterator<Item = &usize> {
        self.members.iter()
    }

    pub fn contains(&self, flight: usize) -> bool {
        self.members.contains(&flight)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.members.iter().copied().collect()
    }

    /// 0/1 indicator over the candidates, in candidate order.
    pub fn indicator(&self, candidates: &CandidateSet) -> Vec<bool> {
        candidates.flights().map(|f| self.contains(f)).collect()
    }

    /// Sum of the members' penalties.
    pub fn penalty(&self, candidates: &CandidateSet) -> crate::Rational {
        crate::rational::sum(self.members.iter().filter_map(|&i| candidates.get(i)).map(|c| &c.penalty))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::build_candidates;
    use crate::rational::int;
    use crate::schedule::tests::airport;
    use crate::schedule::Flight;

    fn two_leg() -> Schedule {
        let sea = airport("SEA", 0, true);
        let pdx = airport("PDX", 0, true);
        let mut a = Flight::leg("1", "A", sea, pdx, 0, 60);
        a.deice = 20;
        let b = Flight::leg("2", "A", pdx, sea, 100, 60);
        Schedule::new(vec![a, b], 300).unwrap()
    }

    #[test]
    fn direct_substitution() {
        let sea = airport("SEA", 0, true);
        let mfr = airport("MFR", 0, false);
        let mut f = Flight::leg("1", "A", sea, mfr, 100, 60);
        f.deice = 20;
        let s = Schedule::new(vec![f], 300).unwrap();
        let sys = build_chain_system(&s);
        assert_eq!((sys.lower[0], sys.upper[0]), (100, 1315));
        assert!(sys.links.is_empty());

        let sys = build_chain_system(&two_leg());
        assert_eq!(sys.links, vec![Link { prev: 0, next: 1, gap: 125 }]);
    }

    #[test]
    fn east_offset_lower_bound() {
        let jfk = airport("JFK", 180, false);
        let sea = airport("SEA", 0, true);
        let s = Schedule::new(vec![Flight::leg("1", "A", jfk, sea, -180, 360)], 300).unwrap();
        let sys = build_chain_system(&s);
        assert_eq!(sys.lower[0], -180);
        // Destination offset enters the arrival bound.
        assert_eq!(sys.upper[0], 1440 - 360 - 45);
    }

    #[test]
    fn cancellation_zeroes_outgoing_gap() {
        let s = two_leg();
        let sys = build_chain_system(&s);
        let hubs = [("SEA".parse().unwrap(), "PDX".parse().unwrap())];
        let cands = build_candidates(&s, &hubs, 0, int(60), int(180));
        assert_eq!(sys.with_cancellations(&s, &CancellationSet::empty()), sys);

        let gamma = CancellationSet::new([0], &cands).unwrap();
        let cancelled = sys.with_cancellations(&s, &gamma);
        assert_eq!(cancelled.links[0].gap, 0);
        assert_eq!(cancelled.upper[0], 1440);
        assert_eq!(cancelled.upper[1], sys.upper[1]);
        assert_eq!(cancelled.lower, sys.lower);

        // The last leg has no outgoing link; only its bound moves.
        let gamma = CancellationSet::new([1], &cands).unwrap();
        let cancelled = sys.with_cancellations(&s, &gamma);
        assert_eq!(cancelled.links, sys.links);
        assert_eq!(cancelled.upper[1], 1440);
    }

    #[test]
    fn sunrise_cancellation_only_moves_own_bound() {
        let s = two_leg();
        let sys = build_chain_system(&s);
        let hubs = [("SEA".parse().unwrap(), "PDX".parse().unwrap())];
        let cands = build_candidates(&s, &hubs, 0, int(60), int(180));
        let cancelled = sys.with_cancellations(&s, &CancellationSet::new([0], &cands).unwrap());
        assert!(sys.incoming(0).is_none());
        assert_eq!(cancelled.lower[0], sys.lower[0]);
    }

    #[test]
    fn rejects_non_candidates() {
        let s = two_leg();
        let cands = build_candidates(&s, &[], 0, int(60), int(180));
        assert_eq!(CancellationSet::new([1], &cands), Err(CancelOutsideCandidates { flight: 1 }));
    }
}
