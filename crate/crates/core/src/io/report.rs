//! Solve reports in three renderings: an aligned text table, per-flight CSV
//! rows, and a structured JSON document that parses back.

use crate::cancel::{OptimizeReport, OracleOutcome};
use crate::candidates::PenaltyClass;
use crate::clock;
use crate::io::config::ScenarioConfig;
use crate::io::csv::ActualsSummary;
use crate::io::reroute::RerouteLeg;
use crate::rational::{self, Rational};
use crate::schedule::{Minutes, Schedule};
use crate::sensitivity::{RankEntry, SweepPoint};
use crate::solve::Status;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Table,
    Rows,
    Structured,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "rows" | "csv" => Ok(ReportFormat::Rows),
            "structured" | "json" => Ok(ReportFormat::Structured),
            other => Err(format!("unknown format `{other}` (expected table, rows or structured)")),
        }
    }
}

pub struct ReportInputs<'a> {
    pub report: &'a OptimizeReport,
    pub schedule: &'a Schedule,
    pub reroutes: &'a [RerouteLeg],
    pub config: Option<&'a ScenarioConfig>,
    pub actuals: Option<&'a ActualsSummary>,
    pub oracle: Option<&'a OracleOutcome>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Totals {
    pub delay_minutes: Minutes,
    #[serde(with = "rational::serde_str")]
    pub delay_objective: Rational,
    pub cancel_count: usize,
    #[serde(with = "rational::serde_str")]
    pub penalty_total: Rational,
    #[serde(with = "rational::serde_str")]
    pub objective: Rational,
    pub baseline_delay_minutes: Minutes,
    #[serde(with = "rational::serde_str")]
    pub baseline_objective: Rational,
    pub baseline_feasible: bool,
    pub feasible: bool,
    pub candidate_count: usize,
    pub lp_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CancelRow {
    pub index: usize,
    pub flight_number: String,
    pub tail: String,
    pub route: String,
    pub departure_local: String,
    pub class: PenaltyClass,
    #[serde(with = "rational::serde_str")]
    pub penalty: Rational,
    #[serde(with = "rational::serde_str")]
    pub improvement: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RerouteRow {
    pub flight_number: String,
    pub cancelled: usize,
    pub companion: usize,
    pub companion_flight_number: String,
    pub route: String,
    pub departure_local: String,
    pub alternative: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlightRow {
    pub index: usize,
    pub flight_number: String,
    pub tail: String,
    pub origin: String,
    pub destination: String,
    pub old_departure_local: String,
    pub new_departure_local: String,
    pub old_departure: Minutes,
    pub new_departure: Minutes,
    pub delay: Minutes,
    pub deice: Minutes,
    pub cancelled: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdviceRow {
    pub index: usize,
    pub flight_number: String,
    pub advice: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActualsBlock {
    pub flights: usize,
    pub delay_minutes: Minutes,
    pub cancel_count: usize,
    pub cancelled: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleBlock {
    pub cancels: Vec<usize>,
    #[serde(with = "rational::serde_str")]
    pub objective: Rational,
    pub feasible: bool,
    pub lp_count: usize,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub strategy: String,
    pub solver: String,
    pub totals: Totals,
    pub cancellations: Vec<CancelRow>,
    pub reroutes: Vec<RerouteRow>,
    pub advice: Vec<AdviceRow>,
    pub flights: Vec<FlightRow>,
    pub actuals: Option<ActualsBlock>,
    pub oracle: Option<OracleBlock>,
    pub config: Vec<String>,
}

fn route(origin: &str, destination: &str) -> String {
    format!("{origin}-{destination}")
}

impl ReportDocument {
    pub fn build(inputs: &ReportInputs<'_>) -> Self {
        let ReportInputs {
            report,
            schedule,
            reroutes,
            config,
            actuals,
            oracle,
        } = *inputs;
        let result = &report.final_result;
        let chosen = &report.plan.chosen;
        let local = |minute: Minutes, i: usize| clock::format(schedule.local_clock(minute, &schedule.flight(i).origin));

        let cancellations = chosen
            .iter()
            .map(|&i| {
                let f = schedule.flight(i);
                let outcome = report.plan.outcome(i);
                let candidate = report.plan.candidates.get(i);
                CancelRow {
                    index: i,
                    flight_number: f.flight_number.clone(),
                    tail: f.tail.clone(),
                    route: route(f.origin.code.as_str(), f.destination.code.as_str()),
                    departure_local: local(f.departure, i),
                    class: candidate.map_or(PenaltyClass::Reroute, |c| c.class),
                    penalty: candidate.map_or_else(Rational::default, |c| c.penalty),
                    improvement: outcome.map_or_else(Rational::default, |o| o.improvement),
                }
            })
            .collect();

        let reroutes = reroutes
            .iter()
            .map(|leg| {
                let f = schedule.flight(leg.companion);
                let origin = leg.new_origin.unwrap_or(f.origin.code);
                let destination = leg.new_destination.unwrap_or(f.destination.code);
                let departure = result.departures.get(leg.companion).copied().unwrap_or(f.departure);
                RerouteRow {
                    flight_number: leg.flight_number.clone(),
                    cancelled: leg.cancelled,
                    companion: leg.companion,
                    companion_flight_number: f.flight_number.clone(),
                    route: route(origin.as_str(), destination.as_str()),
                    departure_local: local(departure, leg.companion),
                    alternative: leg.alternative,
                }
            })
            .collect();

        let advice = match &result.status {
            Status::Feasible => Vec::new(),
            Status::Infeasible { witnesses } => witnesses
                .iter()
                .map(|&i| AdviceRow {
                    index: i,
                    flight_number: schedule.flight(i).flight_number.clone(),
                    advice: "forced cancellation candidate".to_string(),
                })
                .collect(),
        };

        let flights = schedule
            .flights()
            .iter()
            .map(|f| {
                let i = f.index;
                let new = result.departures[i];
                FlightRow {
                    index: i,
                    flight_number: f.flight_number.clone(),
                    tail: f.tail.clone(),
                    origin: f.origin.code.to_string(),
                    destination: f.destination.code.to_string(),
                    old_departure_local: local(f.departure, i),
                    new_departure_local: local(new, i),
                    old_departure: f.departure,
                    new_departure: new,
                    delay: result.delays[i],
                    deice: f.deice,
                    cancelled: chosen.contains(i),
                }
            })
            .collect();

        ReportDocument {
            strategy: report.strategy.to_string(),
            solver: report.solver.to_string(),
            totals: Totals {
                delay_minutes: result.delay_minutes(),
                delay_objective: result.delay_objective,
                cancel_count: chosen.len(),
                penalty_total: result.penalty_total,
                objective: result.objective,
                baseline_delay_minutes: report.baseline.delay_minutes(),
                baseline_objective: report.baseline.objective,
                baseline_feasible: report.baseline.is_feasible(),
                feasible: result.is_feasible(),
                candidate_count: report.plan.candidates.len(),
                lp_count: report.lp_count,
            },
            cancellations,
            reroutes,
            advice,
            flights,
            actuals: actuals.map(|a| ActualsBlock {
                flights: a.flights,
                delay_minutes: a.delay_minutes,
                cancel_count: a.cancel_count,
                cancelled: a.cancelled.iter().cloned().collect(),
            }),
            oracle: oracle.map(|o| OracleBlock {
                cancels: o.chosen.to_vec(),
                objective: o.objective,
                feasible: o.feasible,
                lp_count: o.lp_count,
                agrees: o.objective == result.objective,
            }),
            config: config
                .map(|c| c.render().lines().map(String::from).collect())
                .unwrap_or_default(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn to_rows(&self) -> String {
        String::from_utf8(csv_rows(&self.flights)).expect("utf-8 rows")
    }

    pub fn to_table(&self) -> String {
        let t = &self.totals;
        let mut out = String::new();
        let status = if t.feasible { "feasible" } else { "INFEASIBLE" };
        let _ = writeln!(out, "strategy {} / solver {}: {status}", self.strategy, self.solver);
        let _ = writeln!(
            out,
            "delay {} min (weighted {}), {} cancelled, penalty {}, objective {}",
            t.delay_minutes,
            rational::format(&t.delay_objective),
            t.cancel_count,
            rational::format(&t.penalty_total),
            rational::format(&t.objective)
        );
        let _ = writeln!(
            out,
            "no-cancel baseline: delay {} min, objective {}{}",
            t.baseline_delay_minutes,
            rational::format(&t.baseline_objective),
            if t.baseline_feasible { "" } else { " (infeasible)" }
        );
        let _ = writeln!(out, "{} candidates, {} LPs solved", t.candidate_count, t.lp_count);
        if let Some(a) = &self.actuals {
            let _ = writeln!(
                out,
                "actual day: {} flights, delay {} min, {} cancelled",
                a.flights, a.delay_minutes, a.cancel_count
            );
        }
        if let Some(o) = &self.oracle {
            let _ = writeln!(
                out,
                "exhaustive: objective {} cancels {:?} ({})",
                rational::format(&o.objective),
                o.cancels,
                if o.agrees { "agrees" } else { "DISAGREES" }
            );
        }
        if !self.cancellations.is_empty() {
            let _ = writeln!(out, "\ncancel  flight  tail      route    dep     class    penalty  saves");
            for c in &self.cancellations {
                let class = match c.class {
                    PenaltyClass::Paired => "paired",
                    PenaltyClass::Reroute => "reroute",
                };
                let _ = writeln!(
                    out,
                    "{:>6}  {:<6}  {:<8}  {:<7}  {:<6}  {:<7}  {:>7}  {}",
                    c.index,
                    c.flight_number,
                    c.tail,
                    c.route,
                    c.departure_local,
                    class,
                    rational::format(&c.penalty),
                    rational::format(&c.improvement)
                );
            }
        }
        if !self.reroutes.is_empty() {
            let _ = writeln!(out, "\nreroute flight  replaces  route    dep     alternative");
            for r in &self.reroutes {
                let alt = r.alternative.map_or_else(|| "-".to_string(), |a| a.to_string());
                let _ = writeln!(
                    out,
                    "{:<14}  {:<8}  {:<7}  {:<6}  {alt}",
                    r.flight_number, r.companion_flight_number, r.route, r.departure_local
                );
            }
        }
        for a in &self.advice {
            let _ = writeln!(out, "flight {} ({}): {}", a.flight_number, a.index, a.advice);
        }
        let delayed: Vec<_> = self.flights.iter().filter(|f| f.delay > 0 && !f.cancelled).collect();
        if !delayed.is_empty() {
            let _ = writeln!(out, "\nflight  tail      route    old     new     delay");
            for f in delayed {
                let _ = writeln!(
                    out,
                    "{:<6}  {:<8}  {}-{}  {:<6}  {:<6}  {:>5}",
                    f.flight_number,
                    f.tail,
                    f.origin,
                    f.destination,
                    f.old_departure_local,
                    f.new_departure_local,
                    f.delay
                );
            }
        }
        out
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Table => self.to_table(),
            ReportFormat::Rows => self.to_rows(),
            ReportFormat::Structured => self.to_json(),
        }
    }
}

pub fn emit_report(inputs: &ReportInputs<'_>, format: ReportFormat) -> Vec<u8> {
    ReportDocument::build(inputs).render(format).into_bytes()
}

/// Reads back the structured rendering.
pub fn parse_report(bytes: &[u8]) -> Result<ReportDocument, serde_json::Error> {
    serde_json::from_slice(bytes)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankRow {
    pub rank: usize,
    pub index: usize,
    pub flight_number: String,
    pub origin: String,
    pub departure_local: String,
    pub destination: String,
    pub arrival_local: String,
    pub class: PenaltyClass,
    #[serde(with = "rational::serde_str")]
    pub max_p_alpha: Rational,
}

pub fn rank_rows(entries: &[RankEntry], schedule: &Schedule) -> Vec<RankRow> {
    entries
        .iter()
        .map(|e| {
            let f = schedule.flight(e.flight);
            RankRow {
                rank: e.rank,
                index: e.flight,
                flight_number: f.flight_number.clone(),
                origin: f.origin.code.to_string(),
                departure_local: clock::format(schedule.local_clock(f.departure, &f.origin)),
                destination: f.destination.code.to_string(),
                arrival_local: clock::format(schedule.local_clock(f.arrival(), &f.destination)),
                class: e.class,
                max_p_alpha: e.max_p_alpha,
            }
        })
        .collect()
}

pub fn emit_rank(rows: &[RankRow], format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Structured => json_lines(rows),
        ReportFormat::Rows => csv_rows(rows),
        ReportFormat::Table => {
            let mut out = String::from("rank  flight  orig  dep     dest  arr     max p_alpha\n");
            for r in rows {
                let _ = writeln!(
                    out,
                    "{:>4}  {:<6}  {:<4}  {:<6}  {:<4}  {:<6}  {:>11}",
                    r.rank,
                    r.flight_number,
                    r.origin,
                    r.departure_local,
                    r.destination,
                    r.arrival_local,
                    rational::format_fixed(&r.max_p_alpha, 1)
                );
            }
            out.into_bytes()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(with = "rational::serde_str")]
    pub parameter: Rational,
    pub cancel_count: usize,
    /// Cancelled flight numbers, space separated.
    pub cancels: String,
    pub delay_minutes: Minutes,
    #[serde(with = "rational::serde_str")]
    pub total_delay: Rational,
    #[serde(with = "rational::serde_str")]
    pub objective: Rational,
    pub feasible: bool,
}

pub fn sweep_rows(points: &[SweepPoint], schedule: &Schedule) -> Vec<SweepRow> {
    points
        .iter()
        .map(|p| SweepRow {
            parameter: p.parameter,
            cancel_count: p.cancels.len(),
            cancels: p
                .cancels
                .iter()
                .map(|&i| schedule.flight(i).flight_number.as_str())
                .collect::<Vec<_>>()
                .join(" "),
            delay_minutes: p.delay_minutes,
            total_delay: p.total_delay,
            objective: p.objective,
            feasible: p.feasible,
        })
        .collect()
}

pub fn emit_sweep(parameter: &str, rows: &[SweepRow], format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Structured => json_lines(rows),
        ReportFormat::Rows => csv_rows(rows),
        ReportFormat::Table => {
            let mut out = format!("{parameter:>9}  cancels  delay  objective  flights\n");
            for r in rows {
                let _ = writeln!(
                    out,
                    "{:>9}  {:>7}  {:>5}  {:>9}  {}{}",
                    rational::format(&r.parameter),
                    r.cancel_count,
                    r.delay_minutes,
                    rational::format(&r.objective),
                    r.cancels,
                    if r.feasible { "" } else { " (infeasible)" }
                );
            }
            out.into_bytes()
        }
    }
}

fn json_lines<T: Serialize>(rows: &[T]) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(rows).expect("rows serialize");
    out.push(b'\n');
    out
}

fn csv_rows<T: Serialize>(rows: &[T]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).expect("in-memory csv");
    }
    w.into_inner().expect("in-memory csv")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cancel::optimize;
    use crate::candidates::build_candidates;
    use crate::problem::Problem;
    use crate::rational::int;
    use crate::schedule::tests::airport;
    use crate::schedule::Flight;
    use crate::solve::ChainPropagation;

    fn quiet_problem() -> Problem {
        let sea = airport("SEA", 0, true);
        let pdx = airport("PDX", 0, true);
        let flights = vec![
            Flight::leg("2473", "N1", sea, pdx, 100, 60),
            Flight::leg("2474", "N1", pdx, sea, 300, 60),
        ];
        let schedule = Schedule::new(flights, 300).unwrap();
        let candidates = build_candidates(&schedule, &[], 0, int(60), int(180));
        Problem::new(schedule, candidates)
    }

    #[test]
    fn quiet_day_has_zero_totals() {
        let problem = quiet_problem();
        let report = optimize(&problem, &ChainPropagation);
        let inputs = ReportInputs {
            report: &report,
            schedule: &problem.schedule,
            reroutes: &[],
            config: None,
            actuals: None,
            oracle: None,
        };
        let doc = ReportDocument::build(&inputs);
        assert_eq!(doc.totals.delay_minutes, 0);
        assert_eq!(doc.totals.cancel_count, 0);
        assert_eq!(doc.totals.objective, int(0));
        assert!(doc.cancellations.is_empty());
        assert_eq!(doc.flights[0].old_departure_local, "06:40");

        let bytes = emit_report(&inputs, ReportFormat::Structured);
        let back = parse_report(&bytes).unwrap();
        assert_eq!(back, doc);
        assert_eq!(emit_report(&inputs, ReportFormat::Structured), bytes);
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.contains("\"objective\": \"0\""));
    }

    #[test]
    fn actuals_block_is_echoed() {
        let problem = quiet_problem();
        let report = optimize(&problem, &ChainPropagation);
        let actuals = ActualsSummary {
            flights: 276,
            delay_minutes: 7787,
            cancelled: Default::default(),
            cancel_count: 16,
        };
        let inputs = ReportInputs {
            report: &report,
            schedule: &problem.schedule,
            reroutes: &[],
            config: None,
            actuals: Some(&actuals),
            oracle: None,
        };
        let doc = parse_report(&emit_report(&inputs, ReportFormat::Structured)).unwrap();
        let block = doc.actuals.unwrap();
        assert_eq!((block.delay_minutes, block.cancel_count), (7787, 16));
        let table = String::from_utf8(emit_report(&inputs, ReportFormat::Table)).unwrap();
        assert!(table.contains("actual day: 276 flights, delay 7787 min, 16 cancelled"));
    }

    #[test]
    fn rows_have_one_line_per_flight() {
        let problem = quiet_problem();
        let report = optimize(&problem, &ChainPropagation);
        let inputs = ReportInputs {
            report: &report,
            schedule: &problem.schedule,
            reroutes: &[],
            config: None,
            actuals: None,
            oracle: None,
        };
        let rows = String::from_utf8(emit_report(&inputs, ReportFormat::Rows)).unwrap();
        assert_eq!(rows.lines().count(), 3);
        assert!(rows.starts_with("index,flight_number,tail,"));
    }
}
