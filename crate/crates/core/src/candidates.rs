//! Candidate set of cancellable hub-to-hub legs and their penalties.

use crate::rational::Rational;
use crate::schedule::{AirportCode, Minutes, Schedule};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// How a candidate's penalty is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyClass {
    /// A chain-adjacent leg is also a candidate, so the pair can be dropped
    /// together without re-routing.
    Paired,
    /// Cancelling requires re-routing a neighbouring leg.
    Reroute,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub flight: usize,
    pub class: PenaltyClass,
    pub penalty: Rational,
    /// Chain-adjacent legs that are also candidates.
    pub paired_with: Vec<usize>,
    /// Chain-adjacent legs that could absorb a re-route.
    pub companions: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CandidateSet {
    candidates: Vec<Candidate>,
    position: BTreeMap<usize, usize>,
}

impl CandidateSet {
    pub fn new(mut candidates: Vec<Candidate>) -> Self {
        candidates.sort_by_key(|c| c.flight);
        candidates.dedup_by_key(|c| c.flight);
        let position = candidates.iter().enumerate().map(|(k, c)| (c.flight, k)).collect();
        CandidateSet { candidates, position }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Candidate> {
        self.candidates.iter()
    }

    pub fn as_slice(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn contains(&self, flight: usize) -> bool {
        self.position.contains_key(&flight)
    }

    pub fn get(&self, flight: usize) -> Option<&Candidate> {
        self.position.get(&flight).map(|&k| &self.candidates[k])
    }

    pub fn flights(&self) -> impl Iterator<Item = usize> + '_ {
        self.candidates.iter().map(|c| c.flight)
    }

    /// Re-prices every candidate for the given class penalties.
    pub fn with_penalties(&self, paired: Rational, reroute: Rational) -> CandidateSet {
        let mut next = self.clone();
        for c in &mut next.candidates {
            c.penalty = match c.class {
                PenaltyClass::Paired => paired,
                PenaltyClass::Reroute => reroute,
            };
        }
        next
    }
}

/// Hub pairs are unordered.
pub fn is_hub_pair(pairs: &BTreeSet<(AirportCode, AirportCode)>, a: AirportCode, b: AirportCode) -> bool {
    pairs.contains(&(a, b)) || pairs.contains(&(b, a))
}

/// Collects legs between a listed hub pair (either direction) departing at
/// or after `snow_on`. A candidate with a chain-adjacent candidate gets
/// `paired_penalty`, any other gets `reroute_penalty`.
pub fn build_candidates(
    schedule: &Schedule,
    hub_pairs: &[(AirportCode, AirportCode)],
    snow_on: Minutes,
    paired_penalty: Rational,
    reroute_penalty: Rational,
) -> CandidateSet {
    let pairs: BTreeSet<_> = hub_pairs.iter().copied().collect();
    let eligible: BTreeSet<usize> = schedule
        .flights()
        .iter()
        .filter(|f| f.departure >= snow_on && is_hub_pair(&pairs, f.origin.code, f.destination.code))
        .map(|f| f.index)
        .collect();
    let candidates = eligible
        .iter()
        .map(|&i| {
            let neighbours: Vec<usize> = schedule.previous(i).into_iter().chain(schedule.next(i)).collect();
            let (paired_with, companions): (Vec<usize>, Vec<usize>) =
                neighbours.into_iter().partition(|j| eligible.contains(j));
            let class = if paired_with.is_empty() {
                PenaltyClass::Reroute
            } else {
                PenaltyClass::Paired
            };
            let penalty = match class {
                PenaltyClass::Paired => paired_penalty,
                PenaltyClass::Reroute => reroute_penalty,
            };
            Candidate {
                flight: i,
                class,
                penalty,
                paired_with,
                companions,
            }
        })
        .collect();
    CandidateSet::new(candidates)
}
