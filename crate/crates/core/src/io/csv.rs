//! Schedule ingestion.
//!
//! Two layouts are accepted, chosen by the header row:
//!
//! * native: `flight_number,tail,origin,dest,dep_local,arr_local[,weight]`
//!   with `HH:MM` clock times (an arrival may carry `+1`);
//! * BTS on-time performance extracts, recognised by a `CRS_DEP_TIME` (or
//!   `CRSDepTime`) column, with `HHMM` times. `bts.carrier` and `bts.date`
//!   in the config filter the rows.
//!
//! Header matching ignores case, underscores and surrounding quotes.
//! Errors carry the 1-based line number of the offending row.

use super::config::ScenarioConfig;
use crate::clock::{self, MINUTES_PER_DAY};
use crate::rational::{self, Rational};
use crate::schedule::{Minutes, RawLeg};
use num_traits::Signed;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("line {row}: bad time `{value}` in column `{column}`")]
    BadTime { row: usize, column: String, value: String },
    #[error("line {row}: bad value `{value}` in column `{column}`")]
    BadField { row: usize, column: String, value: String },
    #[error("line {row}: {message}")]
    Csv { row: usize, message: String },
    #[error("schedule contains no flights")]
    EmptySchedule,
}

fn normalize(name: &str) -> String {
    name.trim()
        .trim_matches('"')
        .chars()
        .filter(|c| *c != '_' && !c.is_whitespace())
        .flat_map(char::to_lowercase)
        .collect()
}

struct Columns {
    index: BTreeMap<String, usize>,
}

impl Columns {
    fn new(headers: &csv::StringRecord) -> Self {
        let mut index = BTreeMap::new();
        for (k, h) in headers.iter().enumerate() {
            index.entry(normalize(h)).or_insert(k);
        }
        Columns { index }
    }

    fn find(&self, aliases: &[&str]) -> Option<usize> {
        aliases.iter().find_map(|a| self.index.get(&normalize(a)).copied())
    }

    fn require(&self, aliases: &[&str]) -> Result<usize, ParseError> {
        self.find(aliases).ok_or_else(|| ParseError::MissingColumn(aliases[0].to_string()))
    }

    fn is_bts(&self) -> bool {
        self.find(BTS_DEP).is_some()
    }
}

const NATIVE_FLIGHT: &[&str] = &["flight_number"];
const NATIVE_TAIL: &[&str] = &["tail"];
const NATIVE_ORIGIN: &[&str] = &["origin"];
const NATIVE_DEST: &[&str] = &["dest"];
const NATIVE_DEP: &[&str] = &["dep_local"];
const NATIVE_ARR: &[&str] = &["arr_local"];
const NATIVE_WEIGHT: &[&str] = &["weight"];
const NATIVE_ACTUAL_DEP: &[&str] = &["actual_dep_local"];
const NATIVE_CANCELLED: &[&str] = &["cancelled"];

const BTS_CARRIER: &[&str] = &["OP_UNIQUE_CARRIER", "OP_CARRIER", "Reporting_Airline", "UniqueCarrier", "Carrier"];
const BTS_TAIL: &[&str] = &["TAIL_NUM", "Tail_Number", "TailNum"];
const BTS_FLIGHT: &[&str] = &["OP_CARRIER_FL_NUM", "Flight_Number_Reporting_Airline", "FlightNum", "FL_NUM"];
const BTS_ORIGIN: &[&str] = &["ORIGIN", "Origin"];
const BTS_DEST: &[&str] = &["DEST", "Dest"];
const BTS_DEP: &[&str] = &["CRS_DEP_TIME", "CRSDepTime"];
const BTS_ARR: &[&str] = &["CRS_ARR_TIME", "CRSArrTime"];
const BTS_DATE: &[&str] = &["FL_DATE", "FlightDate"];
const BTS_DEP_DELAY: &[&str] = &["DEP_DELAY", "DepDelay"];
const BTS_CANCELLED: &[&str] = &["CANCELLED", "Cancelled"];

/// `YYYY-MM-DD` from ISO or `M/D/YYYY[ time]` text.
fn normalize_date(text: &str) -> Option<String> {
    let s = text.split_whitespace().next()?;
    let parts: Vec<&str> = if s.contains('-') { s.split('-').collect() } else { s.split('/').collect() };
    if parts.len() != 3 || !parts.iter().all(|p| !p.is_empty() && p.len() <= 4 && p.bytes().all(|b| b.is_ascii_digit())) {
        return None;
    }
    let nums: Vec<u32> = parts.iter().map(|p| p.parse().ok()).collect::<Option<_>>()?;
    let (y, m, d) = if s.contains('-') { (nums[0], nums[1], nums[2]) } else { (nums[2], nums[0], nums[1]) };
    Some(format!("{y:04}-{m:02}-{d:02}"))
}

struct Rows<'a> {
    reader: csv::StringRecordsIntoIter<&'a [u8]>,
}

fn open(bytes: &[u8]) -> Result<(Columns, Rows<'_>), ParseError> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(bytes);
    let headers = reader
        .headers()
        .map_err(|e| ParseError::Csv {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    Ok((Columns::new(&headers), Rows { reader: reader.into_records() }))
}

impl Iterator for Rows<'_> {
    type Item = Result<(usize, csv::StringRecord), ParseError>;

    fn next(&mut self) -> Option<Self::Item> {
        let item = self.reader.next()?;
        Some(match item {
            Ok(record) => {
                let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
                Ok((row, record))
            }
            Err(e) => {
                let row = e.position().map(|p| p.line() as usize).unwrap_or(0);
                Err(ParseError::Csv {
                    row,
                    message: e.to_string(),
                })
            }
        })
    }
}

fn field<'r>(record: &'r csv::StringRecord, row: usize, col: usize, name: &str) -> Result<&'r str, ParseError> {
    record.get(col).ok_or_else(|| ParseError::BadField {
        row,
        column: name.to_string(),
        value: String::new(),
    })
}

fn clock_field(record: &csv::StringRecord, row: usize, col: usize, name: &str, allow_suffix: bool) -> Result<Minutes, ParseError> {
    let raw = field(record, row, col, name)?;
    let bad = || ParseError::BadTime {
        row,
        column: name.to_string(),
        value: raw.to_string(),
    };
    let t = clock::parse(raw).map_err(|_| bad())?;
    if !allow_suffix && !(0..MINUTES_PER_DAY).contains(&t) {
        return Err(bad());
    }
    Ok(t)
}

/// Rolls an arrival clock into the next day when it reads earlier than the
/// departure clock, unless a day suffix was given explicitly.
fn roll_arrival(departure: Minutes, arrival: Minutes) -> Minutes {
    if (0..MINUTES_PER_DAY).contains(&arrival) && arrival < departure {
        arrival + MINUTES_PER_DAY
    } else {
        arrival
    }
}

fn bts_filter(
    cols: &Columns,
    config: &ScenarioConfig,
) -> Result<impl Fn(&csv::StringRecord) -> bool, ParseError> {
    let carrier = match &config.bts_carrier {
        Some(c) => Some((cols.require(BTS_CARRIER)?, c.trim().to_string())),
        None => None,
    };
    let date = match &config.bts_date {
        Some(d) => Some((cols.require(BTS_DATE)?, normalize_date(d).unwrap_or_else(|| d.trim().to_string()))),
        None => None,
    };
    Ok(move |record: &csv::StringRecord| {
        let carrier_ok = carrier.as_ref().is_none_or(|(k, c)| record.get(*k).is_some_and(|v| v == c));
        let date_ok = date
            .as_ref()
            .is_none_or(|(k, d)| record.get(*k).and_then(normalize_date).is_some_and(|v| &v == d));
        carrier_ok && date_ok
    })
}

pub fn parse_schedule_csv(bytes: &[u8], config: &ScenarioConfig) -> Result<Vec<RawLeg>, ParseError> {
    let (cols, rows) = open(bytes)?;
    let bts = cols.is_bts();
    let (flight, tail, origin, dest, dep, arr) = if bts {
        (BTS_FLIGHT, BTS_TAIL, BTS_ORIGIN, BTS_DEST, BTS_DEP, BTS_ARR)
    } else {
        (NATIVE_FLIGHT, NATIVE_TAIL, NATIVE_ORIGIN, NATIVE_DEST, NATIVE_DEP, NATIVE_ARR)
    };
    let c_flight = cols.require(flight)?;
    let c_tail = cols.require(tail)?;
    let c_origin = cols.require(origin)?;
    let c_dest = cols.require(dest)?;
    let c_dep = cols.require(dep)?;
    let c_arr = cols.require(arr)?;
    let c_weight = if bts { None } else { cols.find(NATIVE_WEIGHT) };
    let keep: Box<dyn Fn(&csv::StringRecord) -> bool> = if bts {
        Box::new(bts_filter(&cols, config)?)
    } else {
        Box::new(|_: &csv::StringRecord| true)
    };

    let mut legs = Vec::new();
    for item in rows {
        let (row, record) = item?;
        if record.iter().all(str::is_empty) || !keep(&record) {
            continue;
        }
        let departure_local = clock_field(&record, row, c_dep, dep[0], false)?;
        let arrival_local = roll_arrival(departure_local, clock_field(&record, row, c_arr, arr[0], true)?);
        let weight = match c_weight.map(|k| field(&record, row, k, NATIVE_WEIGHT[0])).transpose()? {
            Some("") | None => None,
            Some(text) => {
                let w = rational::parse(text).ok().filter(|w| !w.is_negative());
                Some(w.ok_or_else(|| ParseError::BadField {
                    row,
                    column: NATIVE_WEIGHT[0].into(),
                    value: text.into(),
                })?)
            }
        };
        legs.push(RawLeg {
            row,
            flight_number: field(&record, row, c_flight, flight[0])?.to_string(),
            tail: field(&record, row, c_tail, tail[0])?.to_string(),
            origin: field(&record, row, c_origin, origin[0])?.to_string(),
            destination: field(&record, row, c_dest, dest[0])?.to_string(),
            departure_local,
            arrival_local,
            weight,
        });
    }
    if legs.is_empty() {
        return Err(ParseError::EmptySchedule);
    }
    Ok(legs)
}

/// Delay and cancellation totals of what actually happened on the day.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ActualsSummary {
    pub flights: usize,
    /// Sum of departure delays over flown legs; early departures count as 0.
    pub delay_minutes: Minutes,
    pub cancelled: BTreeSet<String>,
    pub cancel_count: usize,
}

fn flag(text: &str) -> Option<bool> {
    match text.trim() {
        "" | "0" | "0.0" | "0.00" | "false" | "no" => Some(false),
        "1" | "1.0" | "1.00" | "true" | "yes" => Some(true),
        _ => None,
    }
}

/// Reads actual departures from a BTS extract (`DEP_DELAY`, `CANCELLED`) or a
/// native file with `flight_number,dep_local,actual_dep_local,cancelled`.
pub fn parse_actuals_csv(bytes: &[u8], config: &ScenarioConfig) -> Result<ActualsSummary, ParseError> {
    let (cols, rows) = open(bytes)?;
    let bts = cols.is_bts();
    let mut summary = ActualsSummary::default();
    let bad = |row: usize, column: &str, value: &str| ParseError::BadField {
        row,
        column: column.into(),
        value: value.into(),
    };
    if bts {
        let c_flight = cols.require(BTS_FLIGHT)?;
        let c_delay = cols.require(BTS_DEP_DELAY)?;
        let c_cancel = cols.require(BTS_CANCELLED)?;
        let keep = bts_filter(&cols, config)?;
        for item in rows {
            let (row, record) = item?;
            if record.iter().all(str::is_empty) || !keep(&record) {
                continue;
            }
            let number = field(&record, row, c_flight, BTS_FLIGHT[0])?;
            let cancelled_text = field(&record, row, c_cancel, BTS_CANCELLED[0])?;
            let cancelled = flag(cancelled_text).ok_or_else(|| bad(row, BTS_CANCELLED[0], cancelled_text))?;
            summary.flights += 1;
            if cancelled {
                summary.cancel_count += 1;
                summary.cancelled.insert(number.to_string());
                continue;
            }
            let text = field(&record, row, c_delay, BTS_DEP_DELAY[0])?;
            let delay: Rational = rational::parse(text).map_err(|_| bad(row, BTS_DEP_DELAY[0], text))?;
            if !delay.is_integer() || delay.numer().abs() > 100_000 {
                return Err(bad(row, BTS_DEP_DELAY[0], text));
            }
            summary.delay_minutes += (*delay.numer() as Minutes).max(0);
        }
    } else {
        let c_flight = cols.require(NATIVE_FLIGHT)?;
        let c_dep = cols.require(NATIVE_DEP)?;
        let c_actual = cols.require(NATIVE_ACTUAL_DEP)?;
        let c_cancel = cols.require(NATIVE_CANCELLED)?;
        for item in rows {
            let (row, record) = item?;
            if record.iter().all(str::is_empty) {
                continue;
            }
            let number = field(&record, row, c_flight, NATIVE_FLIGHT[0])?;
            let cancelled_text = field(&record, row, c_cancel, NATIVE_CANCELLED[0])?;
            let cancelled = flag(cancelled_text).ok_or_else(|| bad(row, NATIVE_CANCELLED[0], cancelled_text))?;
            summary.flights += 1;
            if cancelled {
                summary.cancel_count += 1;
                summary.cancelled.insert(number.to_string());
                continue;
            }
            let scheduled = clock_field(&record, row, c_dep, NATIVE_DEP[0], false)?;
            let actual = clock_field(&record, row, c_actual, NATIVE_ACTUAL_DEP[0], true)?;
            // Nearest wrap: a departure just after midnight is late, not early.
            let delay = (actual - scheduled + MINUTES_PER_DAY / 2).rem_euclid(MINUTES_PER_DAY) - MINUTES_PER_DAY / 2;
            summary.delay_minutes += delay.max(0);
        }
    }
    if summary.flights == 0 {
        return Err(ParseError::EmptySchedule);
    }
    Ok(summary)
}

/// Native-layout CSV for the given legs; the weight column is written when
/// any leg has a weight.
pub fn render_native_csv(legs: &[RawLeg]) -> String {
    let with_weight = legs.iter().any(|l| l.weight.is_some());
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["flight_number", "tail", "origin", "dest", "dep_local", "arr_local"];
    if with_weight {
        header.push("weight");
    }
    let _ = writer.write_record(&header);
    for leg in legs {
        let mut record = vec![
            leg.flight_number.clone(),
            leg.tail.clone(),
            leg.origin.clone(),
            leg.destination.clone(),
            clock::format(leg.departure_local),
            clock::format(leg.arrival_local),
        ];
        if with_weight {
            record.push(leg.weight.as_ref().map(rational::format).unwrap_or_default());
        }
        let _ = writer.write_record(&record);
    }
    String::from_utf8(writer.into_inner().unwrap_or_default()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ScenarioConfig {
        ScenarioConfig::default()
    }

    #[test]
    fn native_row() {
        let legs = parse_schedule_csv(b"flight_number,tail,origin,dest,dep_local,arr_local\n2473,N1,SEA,PDX,09:45,10:44\n", &cfg()).unwrap();
        assert_eq!(legs.len(), 1);
        let leg = &legs[0];
        assert_eq!((leg.origin.as_str(), leg.destination.as_str()), ("SEA", "PDX"));
        assert_eq!((leg.departure_local, leg.arrival_local), (585, 644));
        assert_eq!(leg.row, 2);
    }

    #[test]
    fn overnight_arrival_rolls() {
        let legs = parse_schedule_csv(b"flight_number,tail,origin,dest,dep_local,arr_local\n2328,N2,PDX,SEA,23:28,00:32\n", &cfg()).unwrap();
        assert_eq!(legs[0].arrival_local - legs[0].departure_local, 64);
    }

    #[test]
    fn header_only_is_empty() {
        let err = parse_schedule_csv(b"flight_number,tail,origin,dest,dep_local,arr_local\n", &cfg()).unwrap_err();
        assert_eq!(err, ParseError::EmptySchedule);
    }

    #[test]
    fn missing_column_and_bad_time() {
        let err = parse_schedule_csv(b"flight_number,tail,origin,dest,dep_local\n1,N,SEA,PDX,09:00\n", &cfg()).unwrap_err();
        assert_eq!(err, ParseError::MissingColumn("arr_local".into()));
        let err = parse_schedule_csv(b"flight_number,tail,origin,dest,dep_local,arr_local\n1,N,SEA,PDX,9h,10:00\n", &cfg()).unwrap_err();
        assert_eq!(
            err,
            ParseError::BadTime {
                row: 2,
                column: "dep_local".into(),
                value: "9h".into()
            }
        );
    }

    #[test]
    fn bts_layout_with_filters() {
        let text = "\"FL_DATE\",\"OP_UNIQUE_CARRIER\",\"TAIL_NUM\",\"OP_CARRIER_FL_NUM\",\"ORIGIN\",\"DEST\",\"CRS_DEP_TIME\",\"DEP_DELAY\",\"CRS_ARR_TIME\",\"CANCELLED\",\n\
\"2017-12-25\",\"QX\",\"N400QX\",\"2148\",\"PDX\",\"SEA\",\"1805\",12.00,\"1858\",0.00,\n\
\"2017-12-25\",\"AS\",\"N500AS\",\"1\",\"SEA\",\"ANC\",\"0700\",-3.00,\"1000\",0.00,\n\
\"2017-12-24\",\"QX\",\"N400QX\",\"2148\",\"PDX\",\"SEA\",\"1805\",,\"1858\",1.00,\n\
\"2017-12-25\",\"QX\",\"N401QX\",\"2211\",\"SEA\",\"PDX\",\"1934\",,\"2023\",1.00,\n";
        let mut config = cfg();
        config.bts_carrier = Some("QX".into());
        config.bts_date = Some("12/25/2017".into());
        let legs = parse_schedule_csv(text.as_bytes(), &config).unwrap();
        assert_eq!(legs.len(), 2);
        assert_eq!(legs[0].flight_number, "2148");
        assert_eq!(legs[0].departure_local, 18 * 60 + 5);
        let actuals = parse_actuals_csv(text.as_bytes(), &config).unwrap();
        assert_eq!(actuals.flights, 2);
        assert_eq!(actuals.delay_minutes, 12);
        assert_eq!(actuals.cancel_count, 1);
        assert!(actuals.cancelled.contains("2211"));
    }

    #[test]
    fn native_actuals_wrap_past_midnight() {
        let text = b"flight_number,dep_local,actual_dep_local,cancelled\n1,23:50,00:10,0\n2,10:00,09:55,0\n3,11:00,,1\n";
        let a = parse_actuals_csv(text, &cfg()).unwrap();
        assert_eq!(a.delay_minutes, 20);
        assert_eq!(a.cancel_count, 1);
    }

    #[test]
    fn dates_normalize() {
        assert_eq!(normalize_date("12/25/2017 12:00:00 AM").as_deref(), Some("2017-12-25"));
        assert_eq!(normalize_date("2017-12-25").as_deref(), Some("2017-12-25"));
        assert_eq!(normalize_date("yesterday"), None);
    }

    #[test]
    fn weights_parse_and_render() {
        let text = b"flight_number,tail,origin,dest,dep_local,arr_local,weight\n1,N,SEA,PDX,09:00,09:50,2.5\n2,N,PDX,SEA,10:40,11:30,\n";
        let legs = parse_schedule_csv(text, &cfg()).unwrap();
        assert_eq!(legs[0].weight, Some(Rational::new(5, 2)));
        assert_eq!(legs[1].weight, None);
        assert_eq!(parse_schedule_csv(render_native_csv(&legs).as_bytes(), &cfg()).unwrap(), legs);
    }
}
