use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{BacktestError, BacktestReport, EquityPoint, ScalingStudy};
use crate::engine::TradeRecord;
use crate::intrinsic::write_events_csv;
use crate::tick::{TickError, TickSeries};

pub const TRADES_CSV_HEADER: &str = "timestamp,direction,size,price,threshold,cost";
pub const EQUITY_CSV_HEADER: &str = "timestamp,realized_pnl,mark_to_market";

pub fn write_trades_csv<W: Write>(trades: &[TradeRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{TRADES_CSV_HEADER}")?;
    for t in trades {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            t.timestamp,
            t.direction.as_str(),
            t.size,
            t.price,
            t.triggering_threshold,
            t.cost
        )?;
    }
    out.flush()
}

pub fn write_equity_csv<W: Write>(curve: &[EquityPoint], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{EQUITY_CSV_HEADER}")?;
    for p in curve {
        writeln!(
            out,
            "{},{},{}",
            p.timestamp, p.realized_pnl, p.mark_to_market
        )?;
    }
    out.flush()
}

fn write_file(
    path: PathBuf,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<PathBuf, BacktestError> {
    let file = File::create(&path).map_err(|e| BacktestError::io(&path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| BacktestError::io(&path, e))?;
    Ok(path)
}

fn write_json<T: serde::Serialize>(path: PathBuf, value: &T) -> Result<PathBuf, BacktestError> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)
    })
}

fn ensure_dir(dir: &Path) -> Result<(), BacktestError> {
    fs::create_dir_all(dir).map_err(|e| BacktestError::io(dir, e))
}

/// Writes every backtest artifact into `output_dir`, overwriting previous
/// files. Returns the written paths in a fixed order.
pub fn emit_reports(
    report: &BacktestReport,
    output_dir: &Path,
) -> Result<Vec<PathBuf>, BacktestError> {
    ensure_dir(output_dir)?;
    let mut written = vec![
        write_file(output_dir.join("trades.csv"), |w| {
            write_trades_csv(&report.trades, w)
        })?,
        write_file(output_dir.join("equity_curve.csv"), |w| {
            write_equity_csv(&report.equity_curve, w)
        })?,
    ];
    for (threshold, events) in &report.events {
        written.push(write_file(
            output_dir.join(format!("events_{threshold}.csv")),
            |w| write_events_csv(events, w),
        )?);
    }
    written.push(write_json(
        output_dir.join("scaling_fits.json"),
        &report.study.scaling_fits,
    )?);
    written.push(write_json(output_dir.join("report.json"), report)?);
    Ok(written)
}

/// Writes `scaling_fits.json` and the full `scaling_study.json`.
pub fn emit_scaling_study(
    study: &ScalingStudy,
    output_dir: &Path,
) -> Result<Vec<PathBuf>, BacktestError> {
    ensure_dir(output_dir)?;
    Ok(vec![
        write_json(output_dir.join("scaling_fits.json"), &study.scaling_fits)?,
        write_json(output_dir.join("scaling_study.json"), study)?,
    ])
}

pub fn emit_tick_csv(series: &TickSeries, path: &Path) -> Result<(), BacktestError> {
    if series.is_empty() {
        return Err(TickError::EmptyInput.into());
    }
    write_file(path.to_path_buf(), |w| series.write_csv(w)).map(|_| ())
}
