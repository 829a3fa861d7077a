//! Report assembly and CSV emission.

use super::{HarnessError, Protocol};
use crate::baselines::Strategy;
use std::fmt::Write as _;
use std::path::Path;

/// One successful solve.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    /// Sweep coordinate (dB value or user count).
    pub sweep: f64,
    pub strategy: Strategy,
    pub protocol: Protocol,
    pub trial: u64,
    /// Achieved max-min rate in bits/s/Hz.
    pub rate: f64,
    /// Direct-phase time fraction of the returned solution.
    pub theta: f64,
    /// Iterations of the outer solve loop.
    pub iterations: usize,
    /// Wall-clock time, zero unless timing was enabled.
    pub wall_ms: u64,
    /// Hash of the channel realization, for the pairing audit. Not part
    /// of the CSV schema.
    pub channel_hash: u64,
}

/// Mean over the trials of one (sweep, strategy, protocol) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub sweep: f64,
    pub strategy: Strategy,
    pub protocol: Protocol,
    pub mean_rate: f64,
    pub count: usize,
}

/// Assembled experiment output: per-solve rows plus per-cell means.
#[derive(Debug, Clone, Default)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub aggregates: Vec<Aggregate>,
    /// Solves that failed and were excluded from rows and aggregates.
    pub failures: usize,
}

/// Fixed column schema of the CSV emitted by [`ExperimentReport`].
pub const CSV_HEADER: &str = "sweep,strategy,protocol,trial,rate,theta,iters,ms";

/// Relative gain of `a` over `b`, in percent.
pub fn relative_gain_percent(a: f64, b: f64) -> f64 {
    (a - b) / b * 100.0
}

impl ExperimentReport {
    /// Builds the report, computing one aggregate per cell in row
    /// order. The mean is the plain arithmetic mean of the cell's row
    /// rates, accumulated in a fixed order.
    pub fn from_rows(rows: Vec<ReportRow>, failures: usize) -> Self {
        let mut aggregates: Vec<Aggregate> = Vec::new();
        let mut sums: Vec<f64> = Vec::new();
        for row in &rows {
            let key = aggregates.iter().position(|a| {
                a.sweep.to_bits() == row.sweep.to_bits()
                    && a.strategy == row.strategy
                    && a.protocol == row.protocol
            });
            match key {
                Some(i) => {
                    sums[i] += row.rate;
                    aggregates[i].count += 1;
                }
                None => {
                    aggregates.push(Aggregate {
                        sweep: row.sweep,
                        strategy: row.strategy,
                        protocol: row.protocol,
                        mean_rate: 0.0,
                        count: 1,
                    });
                    sums.push(row.rate);
                }
            }
        }
        for (aggregate, sum) in aggregates.iter_mut().zip(&sums) {
            aggregate.mean_rate = sum / aggregate.count as f64;
        }
        ExperimentReport {
            rows,
            aggregates,
            failures,
        }
    }

    /// Mean rate of one strategy across the whole report, if present.
    pub fn strategy_mean(&self, strategy: Strategy) -> Option<f64> {
        let rates: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.strategy == strategy)
            .map(|r| r.rate)
            .collect();
        if rates.is_empty() {
            None
        } else {
            Some(rates.iter().sum::<f64>() / rates.len() as f64)
        }
    }

    /// Relative gain in percent of strategy `a` over strategy `b`,
    /// averaged over the whole report.
    pub fn gain_percent(&self, a: Strategy, b: Strategy) -> Option<f64> {
        Some(relative_gain_percent(
            self.strategy_mean(a)?,
            self.strategy_mean(b)?,
        ))
    }

    /// The full CSV document, header included.
    pub fn csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{:.6},{:.4},{},{}",
                row.sweep,
                row.strategy,
                row.protocol,
                row.trial,
                row.rate,
                row.theta,
                row.iterations,
                row.wall_ms
            )
            .expect("string write cannot fail");
        }
        out
    }

    /// Writes the CSV to `path`. Empty reports are refused so that a
    /// misconfigured run cannot silently produce a header-only file.
    pub fn emit_csv(&self, path: &Path) -> Result<(), HarnessError> {
        if self.rows.is_empty() {
            return Err(HarnessError::EmptyReport);
        }
        std::fs::write(path, self.csv_string())?;
        Ok(())
    }

    /// Writes the line chart to `path` as a standalone SVG.
    pub fn emit_plot(&self, path: &Path) -> Result<(), HarnessError> {
        let svg = super::plot::svg_string(self)?;
        std::fs::write(path, svg)?;
        Ok(())
    }
}
