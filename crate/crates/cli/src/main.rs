//! `aoi`: command-line front-end for the average-age evaluators.
//!
//! Exit codes: 0 success, 1 output failure, 2 configuration error,
//! 3 consistency failure, 4 partial result.

mod args;
mod config;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use aoi_core::experiments::{
    compare_at_fixed_mean, evaluate_all, run_sweep, truncation_report, validate, ComparisonSpec,
    Evaluator, ResultTable, Side, SweepSpec,
};
use aoi_core::simulator::{simulate_records, write_cycle_csv};
use aoi_core::{AoiError, Discipline};

use args::{Cli, Command, Common, Format};
use config::FileConfig;

const THREADS_ENV: &str = "AOI_THREADS";

enum Failure {
    Core(AoiError),
    Io(io::Error),
    Inconsistent,
}

impl From<AoiError> for Failure {
    fn from(e: AoiError) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn emit(common: &Common, text: &str) -> io::Result<()> {
    match &common.out {
        Some(path) => fs::write(path, text),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

fn table_text(table: &ResultTable, format: Format) -> String {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    }
}

fn evaluators(
    text: Option<&str>,
    default: &str,
    discipline: Discipline,
) -> aoi_core::Result<Vec<Evaluator>> {
    Evaluator::parse_list(text.unwrap_or(default), discipline)
}

fn write_records(path: &Path, records: &[aoi_core::CycleRecord]) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_cycle_csv(records, &mut out)?;
    out.flush()
}

fn single(
    model: &args::ModelArgs,
    list: Option<&str>,
    default: &str,
    common: &Common,
    bounds_only: bool,
) -> Result<(), Failure> {
    let cfg = FileConfig::load(common.config.as_deref())?;
    let model = cfg.model(model)?;
    let list = evaluators(
        list.or(cfg.evaluators.as_deref()),
        default,
        model.discipline,
    )?;
    if let Some(e) = list.iter().find(|e| bounds_only && !e.is_bound()) {
        return Err(AoiError::Config(format!("`{e}` is not a bound; use `aoi age`")).into());
    }
    let table = evaluate_all(&model, &list, &cfg.mc(common), &cfg.sim(common))?;
    emit(common, &table_text(&table, cfg.format(common)))?;
    Ok(())
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Age {
            model,
            evaluators: list,
            common,
        } => single(&model, list.as_deref(), "exact", &common, false)?,
        Command::Bound {
            model,
            evaluators: list,
            common,
        } => single(&model, list.as_deref(), "bounds", &common, true)?,
        Command::Sim {
            model,
            records,
            common,
        } => {
            let cfg = FileConfig::load(common.config.as_deref())?;
            let model = cfg.model(&model)?;
            let sim = cfg.sim(&common);
            let table = evaluate_all(&model, &[Evaluator::Simulation], &cfg.mc(&common), &sim)?;
            if let Some(path) = records {
                write_records(&path, &simulate_records(&model, &sim, 0)?)?;
            }
            emit(&common, &table_text(&table, cfg.format(&common)))?;
        }
        Command::Sweep {
            model,
            axes,
            evaluators: list,
            common,
        } => {
            let cfg = FileConfig::load(common.config.as_deref())?;
            let discipline = cfg.discipline(model.discipline)?;
            let axis_text = if axes.is_empty() {
                cfg.axes.clone().unwrap_or_default()
            } else {
                axes
            };
            let spec = SweepSpec {
                discipline,
                arrival: cfg.arrival(model.arrival)?,
                service: cfg.service(model.service)?,
                axes: axis_text
                    .iter()
                    .map(|a| a.parse())
                    .collect::<aoi_core::Result<_>>()?,
                evaluators: evaluators(
                    list.as_deref().or(cfg.evaluators.as_deref()),
                    "exact",
                    discipline,
                )?,
                mc: cfg.mc(&common),
                sim: cfg.sim(&common),
            };
            let table = run_sweep(&spec)?;
            emit(&common, &table_text(&table, cfg.format(&common)))?;
        }
        Command::Compare {
            discipline,
            side,
            fixed,
            candidates,
            means,
            evaluator,
            common,
        } => {
            let cfg = FileConfig::load(common.config.as_deref())?;
            let discipline = cfg.discipline(discipline)?;
            let means = match means {
                Some(text) => aoi_core::experiments::parse_grid(&text)?,
                None => cfg
                    .means
                    .as_ref()
                    .ok_or_else(|| AoiError::Config("missing mean grid".into()))?
                    .values()?,
            };
            let candidates = if candidates.is_empty() {
                cfg.candidates.clone().unwrap_or_default()
            } else {
                candidates
            };
            let evaluator: Evaluator = evaluator
                .as_deref()
                .or(cfg.evaluators.as_deref())
                .unwrap_or("exact")
                .parse()?;
            let side = side.or(cfg.side).unwrap_or(Side::Arrival);
            let fixed = fixed
                .or(cfg.fixed)
                .or(match side {
                    Side::Arrival => cfg.service,
                    Side::Service => cfg.arrival,
                })
                .ok_or_else(|| AoiError::Config("missing fixed distribution".into()))?;
            let spec = ComparisonSpec {
                discipline,
                side,
                fixed,
                candidates,
                means,
                evaluator,
                mc: cfg.mc(&common),
                sim: cfg.sim(&common),
            };
            let table = compare_at_fixed_mean(&spec)?;
            let text = match cfg.format(&common) {
                Format::Csv => table.to_csv(),
                Format::Json => table.to_json(),
            };
            emit(&common, &text)?;
        }
        Command::Truncation {
            arrival,
            service,
            k_values,
            common,
        } => {
            let cfg = FileConfig::load(common.config.as_deref())?;
            let ks: Vec<usize> = match k_values {
                Some(text) => text
                    .split(',')
                    .map(|k| {
                        k.trim()
                            .parse()
                            .map_err(|_| AoiError::Config(format!("bad truncation level `{k}`")))
                    })
                    .collect::<aoi_core::Result<_>>()?,
                None => cfg
                    .k_values
                    .clone()
                    .unwrap_or_else(|| vec![1, 2, 3, 5, 10, 20]),
            };
            let report = truncation_report(
                &cfg.arrival(arrival)?,
                &cfg.service(service)?,
                &ks,
                &cfg.mc(&common),
            )?;
            let text = match cfg.format(&common) {
                Format::Csv => report.to_csv(),
                Format::Json => report.to_json(),
            };
            emit(&common, &text)?;
        }
        Command::Validate { model, common } => {
            let cfg = FileConfig::load(common.config.as_deref())?;
            let model = cfg.model(&model)?;
            let report = validate(&model, &cfg.mc(&common), &cfg.sim(&common))?;
            let text = match cfg.format(&common) {
                Format::Csv => report.to_csv(),
                Format::Json => report.to_json(),
            };
            emit(&common, &text)?;
            if !report.passed {
                return Err(Failure::Inconsistent);
            }
        }
    }
    Ok(())
}

fn configure_threads() -> Result<(), AoiError> {
    let Ok(text) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = text.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        AoiError::Config(format!(
            "{THREADS_ENV} must be a positive integer, got `{text}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| AoiError::Config(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads()
        .map_err(Failure::from)
        .and_then(|()| run(cli.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Inconsistent) => {
            eprintln!("aoi: an exact evaluator disagrees with simulation");
            ExitCode::from(3)
        }
        Err(Failure::Core(e @ AoiError::PartialResult { .. })) => {
            eprintln!("aoi: {e}");
            ExitCode::from(4)
        }
        Err(Failure::Core(e)) => {
            eprintln!("aoi: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("aoi: {e}");
            ExitCode::from(1)
        }
    }
}
