//! File formats: schedule CSV, scenario config, re-route synthesis and reports.

pub mod config;
pub mod csv;
pub mod report;
pub mod reroute;

pub use self::config::{ConfigError, ScenarioConfig, SnowSetting, WeightPolicy};
pub use self::csv::{parse_actuals_csv, parse_schedule_csv, render_native_csv, ActualsSummary, ParseError};
pub use report::{
    emit_rank, emit_report, emit_sweep, parse_report, rank_rows, sweep_rows, RankRow, ReportDocument, ReportFormat,
    ReportInputs, SweepRow,
};
pub use reroute::{synthesize_reroutes, RerouteError, RerouteLeg};
