//! Artifact writers: CSV time series, JSON summaries and the plot script.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::Value;

use crate::error::CliError;
use crate::scenario::Series;

pub const CSV_NAME: &str = "timeseries.csv";
pub const SUMMARY_NAME: &str = "summary.json";
pub const CHECKPOINT_NAME: &str = "final.ckpt";
pub const PLOT_NAME: &str = "plot.py";

/// `t` followed by the series columns, 17 significant digits, LF endings.
pub fn csv_text(series: &Series) -> String {
    let mut out = String::from("t");
    for c in &series.columns {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for (t, row) in series.times.iter().zip(&series.rows) {
        write!(out, "{t:.16e}").expect("string write");
        for v in row {
            write!(out, ",{v:.16e}").expect("string write");
        }
        out.push('\n');
    }
    out
}

fn write(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_run(dir: &Path, series: &Series, summary: &Value) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    write(&dir.join(CSV_NAME), csv_text(series).as_bytes())?;
    write_summary(dir, summary)?;
    if let Some(cp) = &series.checkpoint {
        clebsch::ymh::checkpoint::write_checkpoint(&dir.join(CHECKPOINT_NAME), cp)?;
    }
    Ok(())
}

pub fn write_summary(dir: &Path, summary: &Value) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut text = serde_json::to_string_pretty(summary).expect("json values serialize");
    text.push('\n');
    write(&dir.join(SUMMARY_NAME), text.as_bytes())
}

/// A matplotlib script plotting every column of the run's CSV against `t`.
pub fn plot_script(run_dir: &Path) -> Result<String, CliError> {
    let csv = run_dir.join(CSV_NAME);
    let header = std::fs::read_to_string(&csv)
        .map_err(|e| CliError::Validation(format!("run directory {}: cannot read {CSV_NAME}: {e}", run_dir.display())))?;
    let columns: Vec<&str> = header.lines().next().unwrap_or("").split(',').collect();
    if columns.first() != Some(&"t") || columns.len() < 2 {
        return Err(CliError::Validation(format!("{}: not a clebsch time series", csv.display())));
    }
    let names = columns[1..].iter().map(|c| format!("{c:?}")).collect::<Vec<_>>().join(", ");
    Ok(format!(
        r#"#!/usr/bin/env python3
import csv
import pathlib

import matplotlib.pyplot as plt

here = pathlib.Path(__file__).resolve().parent
with open(here / "{CSV_NAME}", newline="") as f:
    rows = list(csv.DictReader(f))

t = [float(r["t"]) for r in rows]
columns = [{names}]
fig, axes = plt.subplots(len(columns), 1, sharex=True, figsize=(7, 2.2 * len(columns)), squeeze=False)
for ax, name in zip(axes[:, 0], columns):
    ax.plot(t, [float(r[name]) for r in rows])
    ax.set_ylabel(name)
axes[-1, 0].set_xlabel("t")
fig.tight_layout()
fig.savefig(here / "timeseries.png", dpi=120)
"#
    ))
}
