//! Day-of-operations domain model: airports, flights, per-aircraft chains and
//! de-ice assignment.

use crate::clock::MINUTES_PER_DAY;
use crate::rational::{int, Rational};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

/// Integer minutes. Schedule times are minutes after the start of the
/// operational day in the reference time zone.
pub type Minutes = i64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScheduleError {
    #[error("invalid airport code `{0}` (expected three uppercase letters)")]
    BadAirportCode(String),
    #[error("airport {code}: time-zone offset {offset} must be a multiple of 15 within +/-840 minutes")]
    BadTimeZone { code: String, offset: Minutes },
    #[error("row {row}: unknown airport `{code}`")]
    UnknownAirport { row: usize, code: String },
    #[error("tail {tail}: flight {second} departs {found} but flight {first} arrived at {expected}")]
    BrokenChain {
        tail: String,
        first: usize,
        second: usize,
        expected: AirportCode,
        found: AirportCode,
    },
    #[error("tail {tail}: flight {second} departs before flight {first} arrives")]
    OverlappingLegs { tail: String, first: usize, second: usize },
    #[error("tail {tail} appears in more than one chain (flight {index})")]
    NonContiguousTail { tail: String, index: usize },
    #[error("flight {index}: {reason}")]
    InvalidFlight { index: usize, reason: String },
    #[error("row {row}: {reason}")]
    InvalidLeg { row: usize, reason: String },
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AirportCode([u8; 3]);

impl AirportCode {
    pub fn as_str(&self) -> &str {
        // Only ASCII uppercase bytes are ever stored.
        std::str::from_utf8(&self.0).unwrap_or("???")
    }
}

impl FromStr for AirportCode {
    type Err = ScheduleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bytes = s.as_bytes();
        if bytes.len() != 3 || !bytes.iter().all(u8::is_ascii_uppercase) {
            return Err(ScheduleError::BadAirportCode(s.to_string()));
        }
        Ok(AirportCode([bytes[0], bytes[1], bytes[2]]))
    }
}

impl fmt::Display for AirportCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for AirportCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_str())
    }
}

impl Serialize for AirportCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for AirportCode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Airport {
    pub code: AirportCode,
    /// Offset from the reference time zone; positive is east of it.
    pub tz_offset_minutes: Minutes,
    pub is_hub: bool,
}

impl Airport {
    pub fn new(code: AirportCode, tz_offset_minutes: Minutes, is_hub: bool) -> Result<Self, ScheduleError> {
        if tz_offset_minutes.abs() > 840 || tz_offset_minutes % 15 != 0 {
            return Err(ScheduleError::BadTimeZone {
                code: code.to_string(),
                offset: tz_offset_minutes,
            });
        }
        Ok(Airport { code, tz_offset_minutes, is_hub })
    }
}

pub type AirportTable = BTreeMap<AirportCode, Airport>;

/// One scheduled leg.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flight {
    pub index: usize,
    pub flight_number: String,
    pub tail: String,
    pub origin: Airport,
    pub destination: Airport,
    /// Published departure.
    pub departure: Minutes,
    pub duration: Minutes,
    /// Minimum ground time after this leg arrives.
    pub turnaround: Minutes,
    /// De-ice time before this leg departs.
    pub deice: Minutes,
    pub weight: Rational,
    /// End of operations, in minutes after day start local to the destination.
    pub day_end: Minutes,
}

impl Flight {
    /// A leg with a 45-minute turnaround, no de-ice, unit weight and a
    /// 1440-minute day.
    pub fn leg(
        flight_number: impl Into<String>,
        tail: impl Into<String>,
        origin: Airport,
        destination: Airport,
        departure: Minutes,
        duration: Minutes,
    ) -> Self {
        Flight {
            index: 0,
            flight_number: flight_number.into(),
            tail: tail.into(),
            origin,
            destination,
            departure,
            duration,
            turnaround: 45,
            deice: 0,
            weight: int(1),
            day_end: MINUTES_PER_DAY,
        }
    }

    pub fn origin_offset(&self) -> Minutes {
        self.origin.tz_offset_minutes
    }

    pub fn destination_offset(&self) -> Minutes {
        self.destination.tz_offset_minutes
    }

    pub fn arrival(&self) -> Minutes {
        self.departure + self.duration
    }

    fn check(&self) -> Result<(), ScheduleError> {
        let fail = |reason: &str| {
            Err(ScheduleError::InvalidFlight {
                index: self.index,
                reason: reason.to_string(),
            })
        };
        if self.duration <= 0 {
            return fail("duration must be positive");
        }
        if self.turnaround <= 0 {
            return fail("turnaround must be positive");
        }
        if self.deice < 0 {
            return fail("de-ice time must be non-negative");
        }
        if self.weight.is_negative() {
            return fail("weight must be non-negative");
        }
        if self.departure < -self.origin_offset() {
            return fail("published departure is before the local start of day");
        }
        Ok(())
    }
}

/// Flights ordered by aircraft, each aircraft's legs in flying order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    flights: Vec<Flight>,
    chains: Vec<Range<usize>>,
    chain_of: Vec<usize>,
    sunrise: BTreeSet<usize>,
    day_start: Minutes,
}

impl Schedule {
    /// Validates flights that are already ordered by aircraft. Consecutive
    /// flights with the same tail form a chain; indices are reassigned.
    pub fn new(mut flights: Vec<Flight>, day_start: Minutes) -> Result<Self, ScheduleError> {
        let mut chains: Vec<Range<usize>> = Vec::new();
        let mut seen_tails = BTreeSet::new();
        for i in 0..flights.len() {
            flights[i].index = i;
            flights[i].check()?;
            let continues = i > 0 && flights[i - 1].tail == flights[i].tail;
            if continues {
                let (prev, next) = (&flights[i - 1], &flights[i]);
                if prev.destination.code != next.origin.code {
                    return Err(ScheduleError::BrokenChain {
                        tail: next.tail.clone(),
                        first: i - 1,
                        second: i,
                        expected: prev.destination.code,
                        found: next.origin.code,
                    });
                }
                if next.departure < prev.arrival() {
                    return Err(ScheduleError::OverlappingLegs {
                        tail: next.tail.clone(),
                        first: i - 1,
                        second: i,
                    });
                }
                if let Some(chain) = chains.last_mut() {
                    chain.end = i + 1;
                }
            } else {
                if !seen_tails.insert(flights[i].tail.clone()) {
                    return Err(ScheduleError::NonContiguousTail {
                        tail: flights[i].tail.clone(),
                        index: i,
                    });
                }
                chains.push(i..i + 1);
            }
        }
        let mut chain_of = vec![0; flights.len()];
        for (c, range) in chains.iter().enumerate() {
            for slot in &mut chain_of[range.clone()] {
                *slot = c;
            }
        }
        let sunrise = chains.iter().map(|r| r.start).collect();
        Ok(Schedule {
            flights,
            chains,
            chain_of,
            sunrise,
            day_start,
        })
    }

    pub fn flights(&self) -> &[Flight] {
        &self.flights
    }

    pub fn flight(&self, index: usize) -> &Flight {
        &self.flights[index]
    }

    pub fn len(&self) -> usize {
        self.flights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flights.is_empty()
    }

    pub fn chains(&self) -> &[Range<usize>] {
        &self.chains
    }

    pub fn sunrise(&self) -> &BTreeSet<usize> {
        &self.sunrise
    }

    pub fn is_sunrise(&self, index: usize) -> bool {
        self.chains[self.chain_of[index]].start == index
    }

    pub fn chain_of(&self, index: usize) -> usize {
        self.chain_of[index]
    }

    /// Local clock time (minutes after midnight) at which the operational day starts.
    pub fn day_start(&self) -> Minutes {
        self.day_start
    }

    pub fn previous(&self, index: usize) -> Option<usize> {
        (!self.is_sunrise(index)).then(|| index - 1)
    }

    pub fn next(&self, index: usize) -> Option<usize> {
        let chain = &self.chains[self.chain_of[index]];
        (index + 1 < chain.end).then_some(index + 1)
    }

    /// Local clock minutes (after midnight, possibly past 1440) of a
    /// reference-zone schedule minute observed at an airport.
    pub fn local_clock(&self, minute: Minutes, airport: &Airport) -> Minutes {
        minute + airport.tz_offset_minutes + self.day_start
    }

    /// Same schedule with each flight edited by `f`. Chain structure is kept,
    /// so `f` must not touch tails, airports or times.
    pub(crate) fn map_flights(&self, mut f: impl FnMut(&mut Flight)) -> Schedule {
        let mut next = self.clone();
        next.flights.iter_mut().for_each(&mut f);
        next
    }
}

/// A snow-on button press at one airport.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnowEvent {
    pub airport: AirportCode,
    /// Minutes after day start (reference zone).
    pub snow_on: Minutes,
    pub deice_minutes: Minutes,
}

/// Sets de-ice time on every flight departing an airport with a snow event at
/// or after its snow-on minute, and clears it elsewhere. When an airport has
/// several events the earliest one applies.
pub fn assign_deice(schedule: &Schedule, events: &[SnowEvent]) -> Schedule {
    let earliest = earliest_events(events);
    schedule.map_flights(|flight| {
        flight.deice = match earliest.get(&flight.origin.code) {
            Some(event) if flight.departure >= event.snow_on => event.deice_minutes.max(0),
            _ => 0,
        };
    })
}

pub(crate) fn earliest_events(events: &[SnowEvent]) -> BTreeMap<AirportCode, SnowEvent> {
    let mut earliest: BTreeMap<AirportCode, SnowEvent> = BTreeMap::new();
    for event in events {
        earliest
            .entry(event.airport)
            .and_modify(|e| {
                if event.snow_on < e.snow_on {
                    *e = *event;
                }
            })
            .or_insert(*event);
    }
    earliest
}

/// A published leg as read from a schedule file, times still local clock.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawLeg {
    /// 1-based data row in the source file, for error messages.
    pub row: usize,
    pub flight_number: String,
    pub tail: String,
    pub origin: String,
    pub destination: String,
    /// Origin-local clock minutes after midnight, `0..1440`.
    pub departure_local: Minutes,
    /// Destination-local clock minutes after midnight; `+1440` when the
    /// arrival clock reads earlier than the departure clock.
    pub arrival_local: Minutes,
    pub weight: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildOptions {
    /// Local clock minute after midnight at which the operational day starts.
    pub day_start: Minutes,
    pub turnaround: Minutes,
    pub day_end: Minutes,
    /// Use each leg's weight column; otherwise every weight is one.
    pub leg_weights: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            day_start: 5 * 60,
            turnaround: 45,
            day_end: MINUTES_PER_DAY,
            leg_weights: false,
        }
    }
}

/// Groups legs into per-tail chains (tails in code order), orders each chain
/// by departure and converts local clock times to reference minutes after
/// day start.
pub fn build_schedule(
    legs: &[RawLeg],
    airports: &AirportTable,
    options: &BuildOptions,
) -> Result<Schedule, ScheduleError> {
    let lookup = |row: usize, code: &str| -> Result<Airport, ScheduleError> {
        code.parse::<AirportCode>()
            .ok()
            .and_then(|c| airports.get(&c).copied())
            .ok_or_else(|| ScheduleError::UnknownAirport {
                row,
                code: code.to_string(),
            })
    };
    let mut by_tail: BTreeMap<&str, Vec<(usize, Flight)>> = BTreeMap::new();
    for leg in legs {
        if leg.tail.trim().is_empty() {
            return Err(ScheduleError::InvalidLeg {
                row: leg.row,
                reason: "missing tail number".into(),
            });
        }
        let origin = lookup(leg.row, &leg.origin)?;
        let destination = lookup(leg.row, &leg.destination)?;
        let after_start = (leg.departure_local - options.day_start).rem_euclid(MINUTES_PER_DAY);
        let departure = after_start - origin.tz_offset_minutes;
        let duration = ((leg.arrival_local - destination.tz_offset_minutes)
            - (leg.departure_local - origin.tz_offset_minutes))
            .rem_euclid(MINUTES_PER_DAY);
        if duration == 0 {
            return Err(ScheduleError::InvalidLeg {
                row: leg.row,
                reason: "arrival equals departure".into(),
            });
        }
        let weight = match (&leg.weight, options.leg_weights) {
            (Some(w), true) => *w,
            _ => int(1),
        };
        let flight = Flight {
            index: 0,
            flight_number: leg.flight_number.clone(),
            tail: leg.tail.clone(),
            origin,
            destination,
            departure,
            duration,
            turnaround: options.turnaround,
            deice: 0,
            weight,
            day_end: options.day_end,
        };
        by_tail.entry(leg.tail.as_str()).or_default().push((leg.row, flight));
    }
    let mut flights = Vec::with_capacity(legs.len());
    for (_, mut chain) in by_tail {
        chain.sort_by_key(|(row, f)| (f.departure, *row));
        flights.extend(chain.into_iter().map(|(_, f)| f));
    }
    Schedule::new(flights, options.day_start)
}

/// Sum of weighted delays, `w . (x - s)`.
pub fn weighted_delay(schedule: &Schedule, departures: &[Minutes]) -> Rational {
    schedule
        .flights()
        .iter()
        .zip(departures)
        .filter(|(f, _)| !f.weight.is_zero())
        .fold(Rational::zero(), |acc, (f, x)| acc + f.weight * int(x - f.departure))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn airport(code: &str, offset: Minutes, hub: bool) -> Airport {
        Airport::new(code.parse().unwrap(), offset, hub).unwrap()
    }

    fn table(entries: &[Airport]) -> AirportTable {
        entries.iter().map(|a| (a.code, *a)).collect()
    }

    fn raw(row: usize, number: &str, tail: &str, o: &str, d: &str, dep: Minutes, arr: Minutes) -> RawLeg {
        RawLeg {
            row,
            flight_number: number.into(),
            tail: tail.into(),
            origin: o.into(),
            destination: d.into(),
            departure_local: dep,
            arrival_local: arr,
            weight: None,
        }
    }

    fn abc() -> AirportTable {
        table(&[airport("AAA", 0, true), airport("BBB", 0, false), airport("CCC", 0, false)])
    }

    #[test]
    fn groups_chains_and_sunrise() {
        let legs = vec![
            raw(1, "2", "Q1", "BBB", "AAA", 600, 660),
            raw(2, "3", "Q2", "AAA", "CCC", 420, 480),
            raw(3, "1", "Q1", "AAA", "BBB", 360, 420),
        ];
        let s = build_schedule(&legs, &abc(), &BuildOptions::default()).unwrap();
        assert_eq!(s.chains(), &[0..2, 2..3]);
        assert_eq!(s.sunrise().iter().copied().collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(s.flight(0).flight_number, "1");
        assert_eq!(s.flight(0).departure, 60);
        assert_eq!(s.flight(1).departure, 300);
        assert_eq!(s.previous(1), Some(0));
        assert_eq!(s.previous(2), None);
        assert_eq!(s.next(1), None);
    }

    #[test]
    fn broken_chain_is_reported_with_tail() {
        let legs = vec![
            raw(1, "1", "Q1", "AAA", "BBB", 360, 420),
            raw(2, "2", "Q1", "CCC", "AAA", 600, 660),
        ];
        let err = build_schedule(&legs, &abc(), &BuildOptions::default()).unwrap_err();
        assert!(matches!(err, ScheduleError::BrokenChain { ref tail, first: 0, second: 1, .. } if tail == "Q1"));
    }

    #[test]
    fn overlapping_and_unknown_airports() {
        let legs = vec![
            raw(1, "1", "Q1", "AAA", "BBB", 360, 480),
            raw(2, "2", "Q1", "BBB", "AAA", 450, 500),
        ];
        let err = build_schedule(&legs, &abc(), &BuildOptions::default()).unwrap_err();
        assert!(matches!(err, ScheduleError::OverlappingLegs { .. }));
        let legs = vec![raw(7, "1", "Q1", "AAA", "ZZZ", 360, 480)];
        let err = build_schedule(&legs, &abc(), &BuildOptions::default()).unwrap_err();
        assert_eq!(err, ScheduleError::UnknownAirport { row: 7, code: "ZZZ".into() });
    }

    #[test]
    fn time_zones_convert_to_reference() {
        // Eastbound from a reference-zone airport to one 180 minutes ahead.
        let airports = table(&[airport("SEA", 0, true), airport("JFK", 180, false)]);
        let legs = vec![
            raw(1, "1", "T", "SEA", "JFK", 6 * 60, 14 * 60 + 30),
            raw(2, "2", "T", "JFK", "SEA", 16 * 60, 19 * 60 + 15),
        ];
        let s = build_schedule(&legs, &airports, &BuildOptions::default()).unwrap();
        assert_eq!(s.flight(0).departure, 60);
        assert_eq!(s.flight(0).duration, 330);
        // 16:00 local at JFK is 13:00 reference, 480 minutes after 05:00.
        assert_eq!(s.flight(1).departure, 480);
        assert_eq!(s.flight(1).duration, 375);
    }

    #[test]
    fn overnight_arrival_duration() {
        let airports = table(&[airport("PDX", 0, true), airport("SEA", 0, true)]);
        let legs = vec![raw(1, "2328", "T", "PDX", "SEA", 23 * 60 + 28, 32 + 1440)];
        let s = build_schedule(&legs, &airports, &BuildOptions::default()).unwrap();
        assert_eq!(s.flight(0).duration, 64);
    }

    #[test]
    fn rejects_bad_codes_and_offsets() {
        assert!("sea".parse::<AirportCode>().is_err());
        assert!("SEAT".parse::<AirportCode>().is_err());
        assert!(Airport::new("SEA".parse().unwrap(), 7, false).is_err());
        assert!(Airport::new("SEA".parse().unwrap(), 855, false).is_err());
        assert!(Airport::new("SEA".parse().unwrap(), -840, false).is_ok());
    }

    #[test]
    fn deice_boundaries() {
        let sea = airport("SEA", 0, true);
        let mfr = airport("MFR", 0, false);
        let flights = vec![
            Flight::leg("1", "A", sea, mfr, 600, 60),
            Flight::leg("2", "A", mfr, sea, 700, 60),
            Flight::leg("3", "B", sea, mfr, 700, 60),
        ];
        let s = Schedule::new(flights, 300).unwrap();
        let events = [SnowEvent { airport: sea.code, snow_on: 700, deice_minutes: 20 }];
        let iced = assign_deice(&s, &events);
        let d: Vec<_> = iced.flights().iter().map(|f| f.deice).collect();
        assert_eq!(d, vec![0, 0, 20]);
        // A later duplicate event at the same airport does not override.
        let events = [
            SnowEvent { airport: sea.code, snow_on: 900, deice_minutes: 30 },
            SnowEvent { airport: sea.code, snow_on: 500, deice_minutes: 20 },
        ];
        let d: Vec<_> = assign_deice(&s, &events).flights().iter().map(|f| f.deice).collect();
        assert_eq!(d, vec![20, 0, 20]);
        assert_eq!(assign_deice(&iced, &[]).flights().iter().map(|f| f.deice).sum::<i64>(), 0);
    }

    #[test]
    fn non_contiguous_tail_rejected() {
        let a = airport("AAA", 0, true);
        let b = airport("BBB", 0, false);
        let flights = vec![
            Flight::leg("1", "A", a, b, 0, 60),
            Flight::leg("2", "B", a, b, 0, 60),
            Flight::leg("3", "A", b, a, 200, 60),
        ];
        assert!(matches!(
            Schedule::new(flights, 300),
            Err(ScheduleError::NonContiguousTail { index: 2, .. })
        ));
    }
}
