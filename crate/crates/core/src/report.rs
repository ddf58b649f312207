//! CSV output. Floats are written with 17 significant digits so they parse
//! back to the same value; disabled metrics are written as `NaN`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiment::{ScenarioResult, SweepResult};

pub const CURVE_HEADER: [&str; 6] = [
    "k",
    "trial",
    "tracking_error",
    "consensus_error",
    "residual",
    "theory_bound",
];
pub const SWEEP_HEADER: [&str; 3] = ["axis_value", "asymptotic_error", "mean_inner_iters"];

/// Trial index used for the rows holding the mean over trials.
pub const MEAN_TRIAL: i64 = -1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub k: usize,
    pub trial: i64,
    pub tracking_error: f64,
    pub consensus_error: f64,
    pub residual: f64,
    pub theory_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    pub asymptotic_error: f64,
    pub mean_inner_iters: f64,
}

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Per-trial rows followed by the mean rows.
pub fn curve_rows(result: &ScenarioResult) -> Vec<CurveRow> {
    let trials = result.trials.iter().enumerate().map(|(t, r)| (t as i64, &r.ticks));
    trials
        .chain(std::iter::once((MEAN_TRIAL, &result.mean)))
        .flat_map(|(trial, ticks)| {
            ticks.iter().map(move |m| CurveRow {
                k: m.k,
                trial,
                tracking_error: m.tracking_error,
                consensus_error: m.consensus_error,
                residual: m.fixed_point_residual.unwrap_or(f64::NAN),
                theory_bound: m.theory_bound.unwrap_or(f64::NAN),
            })
        })
        .collect()
}

pub fn write_curve_csv<W: Write>(out: W, result: &ScenarioResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CURVE_HEADER)?;
    for r in curve_rows(result) {
        w.write_record([
            r.k.to_string(),
            r.trial.to_string(),
            float(r.tracking_error),
            float(r.consensus_error),
            float(r.residual),
            float(r.theory_bound),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_csv<W: Write>(out: W, result: &SweepResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for p in &result.points {
        w.write_record([
            float(p.value),
            float(p.asymptotic_error),
            float(p.mean_inner_iterations),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn records<R: Read, const N: usize>(input: R, header: [&str; N]) -> Result<Vec<[String; N]>> {
    let mut reader = csv::Reader::from_reader(input);
    let found: Vec<String> = reader.headers()?.iter().map(String::from).collect();
    if found != header {
        return Err(Error::invalid(format!("unexpected CSV header {found:?}")));
    }
    reader
        .records()
        .map(|rec| {
            let rec = rec?;
            let fields: Vec<String> = rec.iter().map(String::from).collect();
            fields
                .try_into()
                .map_err(|f: Vec<String>| Error::invalid(format!("expected {N} fields, found {}", f.len())))
        })
        .collect()
}

fn parse<T: std::str::FromStr>(field: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::invalid(format!("cannot parse CSV field `{field}`")))
}

pub fn read_curve_csv<R: Read>(input: R) -> Result<Vec<CurveRow>> {
    records(input, CURVE_HEADER)?
        .iter()
        .map(|[k, trial, tracking, consensus, residual, bound]| {
            Ok(CurveRow {
                k: parse(k)?,
                trial: parse(trial)?,
                tracking_error: parse(tracking)?,
                consensus_error: parse(consensus)?,
                residual: parse(residual)?,
                theory_bound: parse(bound)?,
            })
        })
        .collect()
}

pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    records(input, SWEEP_HEADER)?
        .iter()
        .map(|[value, err, iters]| {
            Ok(SweepRow {
                axis_value: parse(value)?,
                asymptotic_error: parse(err)?,
                mean_inner_iters: parse(iters)?,
            })
        })
        .collect()
}

/// Writes `curve.csv` into `dir`, creating it if needed.
pub fn save_curve(dir: &Path, result: &ScenarioResult) -> Result<std::path::PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join("curve.csv");
    write_curve_csv(File::create(&path)?, result)?;
    Ok(path)
}

/// Writes `sweep.csv` into `dir`, creating it if needed.
pub fn save_sweep(dir: &Path, result: &SweepResult) -> Result<std::path::PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join("sweep.csv");
    write_sweep_csv(File::create(&path)?, result)?;
    Ok(path)
}
