//! Flat `key = value` scenario configuration.
//!
//! ```text
//! reference_utc_offset = -480
//! day_start = 05:00
//! airport.SEA = -480, hub
//! airport.MFR = -480
//! hub_pairs = SEA-PDX
//! snow.SEA = 0
//! snow.PDX = 0, 20
//! turnaround = 45
//! p_alpha = 60
//! ```
//!
//! `snow.<CODE>` may repeat; every other key appears at most once.

use crate::clock;
use crate::rational::{self, int, Rational};
use crate::schedule::{Airport, AirportCode, AirportTable, Minutes, ScheduleError, SnowEvent};
use num_traits::Signed;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: bad value for `{key}`: {reason}")]
    BadValue { line: usize, key: String, reason: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightPolicy {
    #[default]
    Uniform,
    Column,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AirportEntry {
    pub code: AirportCode,
    pub utc_offset: Minutes,
    pub is_hub: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SnowSetting {
    pub airport: AirportCode,
    pub snow_on: Minutes,
    /// Overrides the default de-ice minutes.
    pub deice: Option<Minutes>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioConfig {
    pub reference_utc_offset: Minutes,
    /// Local clock minute after midnight.
    pub day_start: Minutes,
    pub airports: Vec<AirportEntry>,
    /// `None` means every pair of hub airports.
    pub hub_pairs: Option<Vec<(AirportCode, AirportCode)>>,
    pub snow: Vec<SnowSetting>,
    pub turnaround: Minutes,
    pub deice: Minutes,
    pub end_of_day: Minutes,
    pub p_alpha: Rational,
    pub p_beta: Rational,
    pub beta_ratio: Rational,
    pub weights: WeightPolicy,
    pub bts_carrier: Option<String>,
    pub bts_date: Option<String>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            reference_utc_offset: 0,
            day_start: 5 * 60,
            airports: Vec::new(),
            hub_pairs: None,
            snow: Vec::new(),
            turnaround: 45,
            deice: 20,
            end_of_day: clock::MINUTES_PER_DAY,
            p_alpha: int(60),
            p_beta: int(180),
            beta_ratio: int(3),
            weights: WeightPolicy::Uniform,
            bts_carrier: None,
            bts_date: None,
        }
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ScenarioConfig::default();
        let mut seen = std::collections::BTreeSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or(ConfigError::Syntax { line })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(ConfigError::Syntax { line });
            }
            if !key.starts_with("snow.") && !seen.insert(key.to_string()) {
                return Err(ConfigError::DuplicateKey { line, key: key.into() });
            }
            let bad = |reason: &str| ConfigError::BadValue {
                line,
                key: key.into(),
                reason: reason.into(),
            };
            let minutes = |v: &str| v.parse::<Minutes>().map_err(|_| bad("expected integer minutes"));
            let number = |v: &str| rational::parse(v).map_err(|e| bad(&e.to_string()));
            let code = |v: &str| v.trim().parse::<AirportCode>().map_err(|e| bad(&e.to_string()));
            match key {
                "reference_utc_offset" => cfg.reference_utc_offset = minutes(value)?,
                "day_start" => {
                    cfg.day_start = clock::parse(value).map_err(|e| bad(&e.to_string()))?;
                    if !(0..clock::MINUTES_PER_DAY).contains(&cfg.day_start) {
                        return Err(bad("day start must be a clock time of day"));
                    }
                }
                "hub_pairs" => {
                    let mut pairs = Vec::new();
                    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                        let (a, b) = item.split_once('-').ok_or_else(|| bad("expected AAA-BBB"))?;
                        pairs.push((code(a)?, code(b)?));
                    }
                    cfg.hub_pairs = Some(pairs);
                }
                "turnaround" => cfg.turnaround = minutes(value)?,
                "deice" => cfg.deice = minutes(value)?,
                "end_of_day" => cfg.end_of_day = minutes(value)?,
                "p_alpha" => cfg.p_alpha = number(value)?,
                "p_beta" => cfg.p_beta = number(value)?,
                "beta_ratio" => cfg.beta_ratio = number(value)?,
                "weights" => {
                    cfg.weights = match value {
                        "uniform" => WeightPolicy::Uniform,
                        "column" => WeightPolicy::Column,
                        _ => return Err(bad("expected `uniform` or `column`")),
                    }
                }
                "bts.carrier" => cfg.bts_carrier = Some(value.to_string()),
                "bts.date" => cfg.bts_date = Some(value.to_string()),
                _ => {
                    if let Some(c) = key.strip_prefix("airport.") {
                        let c = code(c)?;
                        let mut parts = value.split(',').map(str::trim);
                        let utc_offset = minutes(parts.next().unwrap_or(""))?;
                        let is_hub = match parts.next() {
                            None => false,
                            Some("hub") => true,
                            Some(_) => return Err(bad("expected `<utc offset>[, hub]`")),
                        };
                        if parts.next().is_some() {
                            return Err(bad("expected `<utc offset>[, hub]`"));
                        }
                        cfg.airports.push(AirportEntry { code: c, utc_offset, is_hub });
                    } else if let Some(c) = key.strip_prefix("snow.") {
                        let c = code(c)?;
                        let mut parts = value.split(',').map(str::trim);
                        let snow_on = minutes(parts.next().unwrap_or(""))?;
                        let deice = parts.next().map(minutes).transpose()?;
                        if parts.next().is_some() {
                            return Err(bad("expected `<minute>[, <de-ice minutes>]`"));
                        }
                        cfg.snow.push(SnowSetting { airport: c, snow_on, deice });
                    } else {
                        return Err(ConfigError::UnknownKey { line, key: key.into() });
                    }
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if self.turnaround <= 0 {
            return invalid("turnaround must be positive".into());
        }
        if self.end_of_day <= 0 {
            return invalid("end_of_day must be positive".into());
        }
        if self.deice < 0 {
            return invalid("deice must be non-negative".into());
        }
        if self.p_alpha.is_negative() || self.p_beta.is_negative() {
            return invalid("penalties must be non-negative".into());
        }
        if self.p_beta < int(2) * self.p_alpha {
            return invalid(format!(
                "p_beta ({}) must be at least twice p_alpha ({})",
                rational::format(&self.p_beta),
                rational::format(&self.p_alpha)
            ));
        }
        if self.beta_ratio < int(2) {
            return invalid("beta_ratio must be at least 2".into());
        }
        let table = self.airport_table().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let max_tz = table.values().map(|a| a.tz_offset_minutes.abs()).max().unwrap_or(0);
        for s in &self.snow {
            if !(0..=clock::MINUTES_PER_DAY + max_tz).contains(&s.snow_on) {
                return invalid(format!("snow-on minute {} at {} is outside the day", s.snow_on, s.airport));
            }
            if s.deice.is_some_and(|d| d < 0) {
                return invalid(format!("negative de-ice minutes at {}", s.airport));
            }
        }
        let mut codes = std::collections::BTreeSet::new();
        for a in &self.airports {
            if !codes.insert(a.code) {
                return invalid(format!("airport {} listed twice", a.code));
            }
        }
        Ok(())
    }

    /// Airports with offsets relative to the reference zone.
    pub fn airport_table(&self) -> Result<AirportTable, ScheduleError> {
        self.airports
            .iter()
            .map(|a| Airport::new(a.code, a.utc_offset - self.reference_utc_offset, a.is_hub).map(|ap| (a.code, ap)))
            .collect()
    }

    pub fn hub_pairs(&self) -> Vec<(AirportCode, AirportCode)> {
        if let Some(pairs) = &self.hub_pairs {
            return pairs.clone();
        }
        let hubs: Vec<AirportCode> = self.airports.iter().filter(|a| a.is_hub).map(|a| a.code).collect();
        let mut pairs = Vec::new();
        for (k, a) in hubs.iter().enumerate() {
            for b in &hubs[k + 1..] {
                pairs.push((*a, *b));
            }
        }
        pairs
    }

    pub fn snow_events(&self) -> Vec<SnowEvent> {
        self.snow
            .iter()
            .map(|s| SnowEvent {
                airport: s.airport,
                snow_on: s.snow_on,
                deice_minutes: s.deice.unwrap_or(self.deice),
            })
            .collect()
    }

    /// Presses the snow-on button at one airport, replacing earlier presses there.
    pub fn set_snow_on(&mut self, airport: AirportCode, snow_on: Minutes) {
        self.snow.retain(|s| s.airport != airport);
        self.snow.push(SnowSetting {
            airport,
            snow_on,
            deice: None,
        });
    }

    /// Moves every snow event to the same minute.
    pub fn with_uniform_snow_on(&self, snow_on: Minutes) -> Self {
        let mut next = self.clone();
        for s in &mut next.snow {
            s.snow_on = snow_on;
        }
        next
    }

    /// Canonical text; [`ScenarioConfig::parse`] reads it back unchanged.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "reference_utc_offset = {}", self.reference_utc_offset);
        let _ = writeln!(out, "day_start = {}", clock::format(self.day_start));
        for a in &self.airports {
            let hub = if a.is_hub { ", hub" } else { "" };
            let _ = writeln!(out, "airport.{} = {}{}", a.code, a.utc_offset, hub);
        }
        if let Some(pairs) = &self.hub_pairs {
            let list: Vec<String> = pairs.iter().map(|(a, b)| format!("{a}-{b}")).collect();
            let _ = writeln!(out, "hub_pairs = {}", list.join(", "));
        }
        for s in &self.snow {
            match s.deice {
                Some(d) => writeln!(out, "snow.{} = {}, {}", s.airport, s.snow_on, d),
                None => writeln!(out, "snow.{} = {}", s.airport, s.snow_on),
            }
            .ok();
        }
        let _ = writeln!(out, "turnaround = {}", self.turnaround);
        let _ = writeln!(out, "deice = {}", self.deice);
        let _ = writeln!(out, "end_of_day = {}", self.end_of_day);
        let _ = writeln!(out, "p_alpha = {}", rational::format(&self.p_alpha));
        let _ = writeln!(out, "p_beta = {}", rational::format(&self.p_beta));
        let _ = writeln!(out, "beta_ratio = {}", rational::format(&self.beta_ratio));
        let weights = match self.weights {
            WeightPolicy::Uniform => "uniform",
            WeightPolicy::Column => "column",
        };
        let _ = writeln!(out, "weights = {weights}");
        if let Some(c) = &self.bts_carrier {
            let _ = writeln!(out, "bts.carrier = {c}");
        }
        if let Some(d) = &self.bts_date {
            let _ = writeln!(out, "bts.date = {d}");
        }
        out
    }
}
