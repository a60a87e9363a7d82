//! `clebsch`: run, sweep and validate scenario configurations.

mod config;
mod error;
mod output;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use clebsch::integrators::loglog_slope;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use config::ScenarioConfig;
use error::CliError;
use scenario::Series;

#[derive(Parser)]
#[command(name = "clebsch", version, about = "Clebsch-Hamilton scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write the CSV time series and JSON summary.
    Run { config: PathBuf },
    /// Run a scenario for several step sizes and fit drift slopes.
    Sweep {
        config: PathBuf,
        /// Comma-separated step sizes, at least three, geometrically spaced.
        #[arg(long, value_delimiter = ',', required = true)]
        dt: Vec<f64>,
    },
    /// Validate a configuration and build its initial data without running.
    Check { config: PathBuf },
    /// Write a plotting script into a run directory.
    Plotscript { run_dir: PathBuf },
}

fn final_diagnostics(series: &Series) -> Value {
    let mut m = Map::new();
    if let (Some(t), Some(row)) = (series.times.last(), series.rows.last()) {
        m.insert("t".into(), json!(t));
        for (c, v) in series.columns.iter().zip(row) {
            m.insert(c.clone(), json!(v));
        }
    }
    Value::Object(m)
}

fn run(path: &Path) -> Result<(), CliError> {
    let cfg = ScenarioConfig::load(path)?;
    let start = Instant::now();
    let series = scenario::run(&cfg, &cfg.integrator)?;
    let wall = start.elapsed().as_secs_f64();
    let dir = cfg.output_dir();
    let summary = json!({
        "config": cfg,
        "wall_time_s": wall,
        "samples": series.times.len(),
        "final": final_diagnostics(&series),
        "extras": series.extras,
    });
    output::write_run(&dir, &series, &summary)?;
    println!("wrote {}", dir.display());
    Ok(())
}

fn slope_value(dts: &[f64], drifts: &[f64]) -> Value {
    match loglog_slope(dts, drifts) {
        Some(s) => json!(s),
        None => json!("not-applicable"),
    }
}

fn sweep(path: &Path, dts: &[f64]) -> Result<(), CliError> {
    let cfg = ScenarioConfig::load(path)?;
    if dts.len() < 3 {
        return Err(CliError::Validation(format!("--dt: need at least 3 values, got {}", dts.len())));
    }
    if dts.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
        return Err(CliError::Validation("--dt: values must be positive".into()));
    }
    let ratio = dts[1] / dts[0];
    if dts.windows(2).any(|w| ((w[1] / w[0]) / ratio - 1.0).abs() > 1e-6) || ratio == 1.0 {
        return Err(CliError::Validation("--dt: values must be geometrically spaced".into()));
    }
    let mut configs = Vec::with_capacity(dts.len());
    for &dt in dts {
        let mut c = cfg.clone();
        c.integrator.dt = dt;
        c.validate()
            .map_err(|e| CliError::Validation(format!("--dt {dt}: {e}")))?;
        configs.push(c);
    }
    let root = cfg.output_dir();
    let constraint = scenario::constraint_column(cfg.backend);
    let results: Vec<Result<(Series, f64), CliError>> = configs
        .par_iter()
        .map(|c| {
            let start = Instant::now();
            let s = scenario::run(c, &c.integrator)?;
            Ok((s, start.elapsed().as_secs_f64()))
        })
        .collect();
    let mut runs = Vec::new();
    let (mut cdrift, mut hdrift) = (Vec::new(), Vec::new());
    for (i, (res, c)) in results.into_iter().zip(&configs).enumerate() {
        let (series, wall) = res?;
        let dir = root.join(format!("dt_{i}"));
        let cd = series.drift(constraint).expect("constraint column");
        let hd = series.drift("H").expect("H column");
        let summary = json!({
            "config": c,
            "wall_time_s": wall,
            "samples": series.times.len(),
            "final": final_diagnostics(&series),
            "extras": series.extras,
        });
        output::write_run(&dir, &series, &summary)?;
        runs.push(json!({
            "dt": c.integrator.dt,
            "dir": dir,
            "wall_time_s": wall,
            "constraint_drift": cd,
            "energy_drift": hd,
        }));
        cdrift.push(cd);
        hdrift.push(hd);
    }
    let report = json!({
        "config": cfg,
        "dt": dts,
        "constraint_column": constraint,
        "runs": runs,
        "slopes": {
            "constraint_drift": slope_value(dts, &cdrift),
            "energy_drift": slope_value(dts, &hdrift),
        },
    });
    output::write_summary(&root, &report)?;
    println!("wrote {}", root.display());
    Ok(())
}

fn check(path: &Path) -> Result<(), CliError> {
    let cfg = ScenarioConfig::load(path)?;
    scenario::prepare(&cfg)?;
    println!("ok: backend {}", cfg.backend.name());
    Ok(())
}

fn plotscript(run_dir: &Path) -> Result<(), CliError> {
    let script = output::plot_script(run_dir)?;
    let path = run_dir.join(output::PLOT_NAME);
    std::fs::write(&path, script).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config } => run(config),
        Command::Sweep { config, dt } => sweep(config, dt),
        Command::Check { config } => check(config),
        Command::Plotscript { run_dir } => plotscript(run_dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
