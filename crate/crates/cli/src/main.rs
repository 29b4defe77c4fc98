//! `deice`: re-time a day of flights after snow-on, rank cancellations, sweep
//! parameters and check the screening rule against full enumeration.

use clap::{Args, Parser, Subcommand};
use deice_core::io::{
    emit_rank, emit_report, emit_sweep, parse_actuals_csv, rank_rows, sweep_rows, synthesize_reroutes, ReportInputs,
};
use deice_core::rational;
use deice_core::registry::{DEFAULT_SOLVER, DEFAULT_STRATEGY};
use deice_core::verify::run_verify;
use deice_core::{
    exhaustive_oracle, rank_candidates, sweep_penalty, sweep_snow_on, Engine, Minutes, Rational, Registry,
    ReportFormat, Scenario, ScenarioConfig,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "deice", version, about = "De-ice rescheduling and cancellation planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Re-time the day and choose cancellations.
    Solve {
        #[command(flatten)]
        common: Common,
        /// What actually happened, for comparison (BTS or native CSV).
        #[arg(long)]
        actuals: Option<PathBuf>,
        /// Also enumerate every cancellation set and compare.
        #[arg(long)]
        oracle: bool,
    },
    /// List cancellable flights by the highest p_alpha at which each is cancelled.
    Rank {
        #[command(flatten)]
        common: Common,
    },
    /// Re-solve with snow-on moved across a range of minutes after day start.
    SweepSnow {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        range: Range,
    },
    /// Re-solve across a range of p_alpha values.
    SweepPenalty {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        range: Range,
    },
    /// Compare the screening rule with full enumeration on random instances.
    Verify {
        #[arg(long, env = "SEED", default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        instances: usize,
        #[arg(long, default_value_t = 10)]
        max_candidates: usize,
        #[arg(long, default_value = DEFAULT_SOLVER)]
        solver: String,
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[arg(long, default_value = "table")]
        format: ReportFormat,
    },
}

#[derive(Args)]
struct Common {
    /// Schedule CSV, native or BTS layout.
    #[arg(long)]
    schedule: PathBuf,
    /// Scenario configuration file.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// table, rows or structured.
    #[arg(long, default_value = "table")]
    format: ReportFormat,
    #[arg(long, default_value = DEFAULT_SOLVER)]
    solver: String,
    #[arg(long, default_value = DEFAULT_STRATEGY)]
    strategy: String,
    /// Override p_alpha; p_beta follows as beta_ratio * p_alpha.
    #[arg(long)]
    p_alpha: Option<String>,
    /// Move every snow event to this minute after day start.
    #[arg(long)]
    snow_on: Option<Minutes>,
}

#[derive(Args)]
struct Range {
    #[arg(long, default_value = "0")]
    from: String,
    #[arg(long)]
    to: String,
    #[arg(long, default_value = "1")]
    step: String,
}

/// Exit status with a message for stderr.
struct Failure {
    code: u8,
    message: String,
}

fn input_error(message: impl ToString) -> Failure {
    Failure {
        code: 2,
        message: message.to_string(),
    }
}

fn number(text: &str, flag: &str) -> Result<Rational, Failure> {
    rational::parse(text).map_err(|e| input_error(format!("--{flag}: {e}")))
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

struct Loaded {
    scenario: Scenario,
    engine: Engine,
    format: ReportFormat,
    output: Option<PathBuf>,
}

fn load(common: Common) -> Result<Loaded, Failure> {
    let text = String::from_utf8(read(&common.config)?)
        .map_err(|_| input_error(format!("{}: not UTF-8", common.config.display())))?;
    let mut config =
        ScenarioConfig::parse(&text).map_err(|e| input_error(format!("{}: {e}", common.config.display())))?;
    if let Some(p) = &common.p_alpha {
        config.p_alpha = number(p, "p-alpha")?;
        config.p_beta = config.beta_ratio * config.p_alpha;
    }
    if let Some(minute) = common.snow_on {
        config = config.with_uniform_snow_on(minute);
    }
    config.validate().map_err(input_error)?;
    let bytes = read(&common.schedule)?;
    let scenario =
        Scenario::from_csv(&bytes, config).map_err(|e| input_error(format!("{}: {e}", common.schedule.display())))?;
    let engine = Registry::builtin()
        .engine(&common.solver, &common.strategy)
        .map_err(input_error)?;
    Ok(Loaded {
        scenario,
        engine,
        format: common.format,
        output: common.output,
    })
}

fn write(output: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match output {
        Some(path) => std::fs::write(path, bytes).map_err(|e| input_error(format!("{}: {e}", path.display()))),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes).map_err(input_error)
        }
    }
}

fn range(r: &Range) -> Result<Vec<Rational>, Failure> {
    let (from, to, step) = (number(&r.from, "from")?, number(&r.to, "to")?, number(&r.step, "step")?);
    if step <= Rational::from_integer(0) || to < from {
        return Err(input_error("need --from <= --to and a positive --step"));
    }
    let mut values = Vec::new();
    let mut v = from;
    while v <= to {
        values.push(v);
        v += step;
    }
    Ok(values)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Solve {
            common,
            actuals,
            oracle,
        } => {
            let loaded = load(common)?;
            let problem = loaded.scenario.problem().map_err(input_error)?;
            let report = loaded.engine.run(&problem).map_err(input_error)?;
            let reroutes = synthesize_reroutes(&report.plan.chosen, &problem.schedule).map_err(input_error)?;
            let actuals = match actuals {
                Some(path) => Some(
                    parse_actuals_csv(&read(&path)?, &loaded.scenario.config)
                        .map_err(|e| input_error(format!("{}: {e}", path.display())))?,
                ),
                None => None,
            };
            let oracle = if oracle {
                Some(exhaustive_oracle(&problem, loaded.engine.solver.as_ref()).map_err(input_error)?)
            } else {
                None
            };
            let inputs = ReportInputs {
                report: &report,
                schedule: &problem.schedule,
                reroutes: &reroutes,
                config: Some(&loaded.scenario.config),
                actuals: actuals.as_ref(),
                oracle: oracle.as_ref(),
            };
            write(loaded.output.as_deref(), &emit_report(&inputs, loaded.format))?;
            Ok(if report.baseline.is_feasible() { 0 } else { 1 })
        }
        Command::Rank { common } => {
            let loaded = load(common)?;
            let problem = loaded.scenario.problem().map_err(input_error)?;
            let report = loaded.engine.run(&problem).map_err(input_error)?;
            let ranks = rank_candidates(&report.plan, loaded.scenario.config.beta_ratio);
            write(loaded.output.as_deref(), &emit_rank(&rank_rows(&ranks, &problem.schedule), loaded.format))?;
            Ok(if report.baseline.is_feasible() { 0 } else { 1 })
        }
        Command::SweepSnow { common, range: r } => {
            let loaded = load(common)?;
            let values = range(&r)?;
            if values.iter().any(|v| !v.is_integer()) {
                return Err(input_error("snow-on sweep takes whole minutes"));
            }
            let times: Vec<Minutes> = values.iter().map(|v| v.to_integer() as Minutes).collect();
            let points = sweep_snow_on(&loaded.scenario, &times, &loaded.engine).map_err(input_error)?;
            let schedule = loaded.scenario.base_schedule().map_err(input_error)?;
            write(
                loaded.output.as_deref(),
                &emit_sweep("snow_on", &sweep_rows(&points, &schedule), loaded.format),
            )?;
            Ok(0)
        }
        Command::SweepPenalty { common, range: r } => {
            let loaded = load(common)?;
            let values = range(&r)?;
            let problem = loaded.scenario.problem().map_err(input_error)?;
            let points = sweep_penalty(&problem, &values, loaded.scenario.config.beta_ratio, &loaded.engine)
                .map_err(input_error)?;
            write(
                loaded.output.as_deref(),
                &emit_sweep("p_alpha", &sweep_rows(&points, &problem.schedule), loaded.format),
            )?;
            Ok(0)
        }
        Command::Verify {
            seed,
            instances,
            max_candidates,
            solver,
            output,
            format,
        } => {
            let solver = Registry::builtin().solver(&solver).map_err(input_error)?;
            let report = run_verify(seed, instances, max_candidates, solver.as_ref()).map_err(input_error)?;
            let bytes = match format {
                ReportFormat::Structured => {
                    let mut text = serde_json::to_string_pretty(&report).map_err(input_error)?;
                    text.push('\n');
                    text.into_bytes()
                }
                _ => {
                    let mut text = format!(
                        "seed {seed}: {}/{} instances agree ({:.1}%), {} membership violations\n",
                        report.agreements,
                        report.instances,
                        100.0 * report.agreement_rate,
                        report.membership_violations.len()
                    );
                    for c in &report.counterexamples {
                        text.push_str(&format!(
                            "DISAGREE instance {} seed {}: screening {:?} objective {}, enumeration {:?} objective {}\n",
                            c.instance,
                            c.seed,
                            c.screening_cancels,
                            rational::format(&c.screening_objective),
                            c.exhaustive_cancels,
                            rational::format(&c.exhaustive_objective)
                        ));
                    }
                    text.into_bytes()
                }
            };
            write(output.as_deref(), &bytes)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("deice: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
