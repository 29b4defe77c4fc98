//! Re-route legs that keep each aircraft's chain connected after
//! cancellations.
//!
//! A run of consecutive cancelled legs that ends where it started needs
//! nothing. Otherwise a neighbouring leg absorbs the gap: the following leg
//! takes the run's origin as its new origin, or the preceding leg takes the
//! run's destination as its new destination. The following leg is preferred
//! and the other recorded as the alternative.

use crate::schedule::{AirportCode, Schedule};
use crate::system::CancellationSet;
use serde::Serialize;
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RerouteError {
    #[error("no neighbour of cancelled flight {flight} can be re-routed")]
    NoEligibleCompanion { flight: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RerouteLeg {
    /// First leg of the cancelled run this re-route covers.
    pub cancelled: usize,
    pub companion: usize,
    pub new_origin: Option<AirportCode>,
    pub new_destination: Option<AirportCode>,
    pub flight_number: String,
    /// The other neighbour, when it could have been used instead.
    pub alternative: Option<usize>,
}

#[derive(Clone, Copy)]
enum Side {
    Before,
    After,
}

pub fn synthesize_reroutes(chosen: &CancellationSet, schedule: &Schedule) -> Result<Vec<RerouteLeg>, RerouteError> {
    let used_numbers: BTreeSet<&str> = schedule.flights().iter().map(|f| f.flight_number.as_str()).collect();
    let mut numbers = (9001..=9999u32).map(|n| n.to_string()).filter(|n| !used_numbers.contains(n.as_str()));
    let mut taken: BTreeSet<usize> = BTreeSet::new();
    let mut out = Vec::new();
    for chain in schedule.chains() {
        let mut i = chain.start;
        while i < chain.end {
            if !chosen.contains(i) {
                i += 1;
                continue;
            }
            let start = i;
            while i + 1 < chain.end && chosen.contains(i + 1) {
                i += 1;
            }
            let end = i;
            i += 1;
            let from = schedule.flight(start).origin.code;
            let to = schedule.flight(end).destination.code;
            if from == to {
                continue;
            }
            let eligible = |side: Side| -> Option<usize> {
                let (k, ok) = match side {
                    Side::Before => {
                        let k = schedule.previous(start)?;
                        (k, schedule.flight(k).origin.code != to)
                    }
                    Side::After => {
                        let k = schedule.next(end)?;
                        (k, schedule.flight(k).destination.code != from)
                    }
                };
                (ok && !taken.contains(&k)).then_some(k)
            };
            let (after, before) = (eligible(Side::After), eligible(Side::Before));
            let (companion, side, alternative) = match (after, before) {
                (Some(a), b) => (a, Side::After, b),
                (None, Some(b)) => (b, Side::Before, None),
                (None, None) => {
                    if schedule.previous(start).is_none() && schedule.next(end).is_none() {
                        // The aircraft does not fly at all.
                        continue;
                    }
                    return Err(RerouteError::NoEligibleCompanion { flight: start });
                }
            };
            taken.insert(companion);
            let (new_origin, new_destination) = match side {
                Side::After => (Some(from), None),
                Side::Before => (None, Some(to)),
            };
            out.push(RerouteLeg {
                cancelled: start,
                companion,
                new_origin,
                new_destination,
                flight_number: numbers.next().unwrap_or_else(|| format!("R{companion}")),
                alternative,
            });
        }
    }
    Ok(out)
}

/// Origin/destination sequence each aircraft flies once `chosen` is dropped
/// and `reroutes` applied.
pub fn flown_legs(
    schedule: &Schedule,
    chosen: &CancellationSet,
    reroutes: &[RerouteLeg],
) -> Vec<Vec<(AirportCode, AirportCode)>> {
    schedule
        .chains()
        .iter()
        .map(|chain| {
            chain
                .clone()
                .filter(|i| !chosen.contains(*i))
                .map(|i| {
                    let f = schedule.flight(i);
                    let r = reroutes.iter().find(|r| r.companion == i);
                    let origin = r.and_then(|r| r.new_origin).unwrap_or(f.origin.code);
                    let dest = r.and_then(|r| r.new_destination).unwrap_or(f.destination.code);
                    (origin, dest)
                })
                .collect()
        })
        .collect()
}

pub fn is_connected(legs: &[(AirportCode, AirportCode)]) -> bool {
    legs.windows(2).all(|w| w[0].1 == w[1].0)
}
