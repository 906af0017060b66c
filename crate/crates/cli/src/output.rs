//! Files written by a run. Curves and observables are CSV with a fixed
//! column order; everything else is TOML. Floats are written with the
//! shortest representation that parses back to the same value.

use std::fs;
use std::path::{Path, PathBuf};

use pentamol::spectra::ScanResult;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const CURVE_COLUMNS: [&str; 8] = ["R_bohr", "curve_id", "energy_GHz", "cos1", "cos2", "cos2_1", "cos2_2", "label"];
pub const OBSERVABLE_COLUMNS: [&str; 6] = ["R_bohr", "curve_id", "overlap", "flagged", "manifold_weight", "sector"];

/// One row of a curves file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    #[serde(rename = "R_bohr")]
    pub r_bohr: f64,
    pub curve_id: usize,
    #[serde(rename = "energy_GHz")]
    pub energy_ghz: f64,
    pub cos1: f64,
    pub cos2: f64,
    pub cos2_1: f64,
    pub cos2_2: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableRow {
    #[serde(rename = "R_bohr")]
    pub r_bohr: f64,
    pub curve_id: usize,
    pub overlap: f64,
    pub flagged: bool,
    pub manifold_weight: f64,
    pub sector: String,
}

fn write_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Write { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::Write { path: path.to_path_buf(), source: std::io::Error::other(e.to_string()) }
}

pub fn curve_rows(scan: &ScanResult) -> Vec<CurveRow> {
    let mut rows = Vec::new();
    for (k, p) in scan.points.iter().enumerate() {
        for (c, curve) in scan.curves.iter().enumerate() {
            rows.push(CurveRow {
                r_bohr: p.r,
                curve_id: c,
                energy_ghz: curve.energies[k],
                cos1: curve.cos1[k],
                cos2: curve.cos2[k],
                cos2_1: curve.cos2_1[k],
                cos2_2: curve.cos2_2[k],
                label: curve.label.as_ref().map(|l| l.to_string()).unwrap_or_default(),
            });
        }
    }
    rows
}

pub fn observable_rows(scan: &ScanResult) -> Vec<ObservableRow> {
    let mut rows = Vec::new();
    for (k, p) in scan.points.iter().enumerate() {
        for (c, curve) in scan.curves.iter().enumerate() {
            rows.push(ObservableRow {
                r_bohr: p.r,
                curve_id: c,
                overlap: curve.overlaps[k],
                flagged: curve.flags.contains(&k),
                manifold_weight: curve.manifold_weight[k],
                sector: curve.sector[k].to_string(),
            });
        }
    }
    rows
}

fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for r in rows {
        w.serialize(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(write_err(path))
}

pub fn write_curves(path: &Path, rows: &[CurveRow]) -> Result<(), CliError> {
    write_csv(path, &CURVE_COLUMNS, rows)
}

pub fn write_observables(path: &Path, rows: &[ObservableRow]) -> Result<(), CliError> {
    write_csv(path, &OBSERVABLE_COLUMNS, rows)
}

pub fn read_curves(path: &Path) -> Result<Vec<CurveRow>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize().collect::<Result<Vec<CurveRow>, _>>().map_err(csv_err(path))
}

pub fn write_toml<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = toml::to_string(value).map_err(|e| CliError::Write { path: path.to_path_buf(), source: std::io::Error::other(e.to_string()) })?;
    fs::write(path, text).map_err(write_err(path))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(write_err(path))
}

/// Python script drawing energy (and both orientations) against R from a
/// curves file, one series per curve_id.
pub fn plot_script(csv_name: &str, title: &str) -> String {
    format!(
        r#"#!/usr/bin/env python3
# Plots {csv_name}: energy and orientation against R, one line per curve.
import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt

series = defaultdict(lambda: defaultdict(list))
with open("{csv_name}", newline="") as f:
    for row in csv.DictReader(f):
        s = series[int(row["curve_id"])]
        s["R"].append(float(row["R_bohr"]))
        for key in ("energy_GHz", "cos1", "cos2"):
            s[key].append(float(row[key]))

fig, (ax_e, ax_c) = plt.subplots(2, 1, sharex=True, figsize=(6, 8))
for cid in sorted(series):
    s = series[cid]
    ax_e.plot(s["R"], s["energy_GHz"], lw=1)
    ax_c.plot(s["R"], s["cos1"], lw=1)
ax_e.set_ylabel("E (GHz)")
ax_c.set_ylabel("<cos theta_1>")
ax_c.set_xlabel("R (bohr)")
ax_e.set_title("{title}")
fig.tight_layout()
out = sys.argv[1] if len(sys.argv) > 1 else "{stem}.pdf"
fig.savefig(out)
"#,
        stem = csv_name.trim_end_matches(".csv"),
    )
}

/// Output directory, created if needed; fails if it cannot be written.
pub fn prepare_dir(dir: &Path) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("output_dir {}: {e}", dir.display())))?;
    let probe = dir.join(".write-test");
    fs::write(&probe, b"").map_err(|e| CliError::Config(format!("output_dir {} is not writable: {e}", dir.display())))?;
    let _ = fs::remove_file(probe);
    Ok(dir.to_path_buf())
}
