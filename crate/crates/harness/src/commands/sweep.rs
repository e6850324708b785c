use std::io::Write;

use pbs_core::pipeline::{density_sweep, PipelineConfig, Strategy};
use pbs_core::Scalar;
use serde::{Deserialize, Serialize};

use crate::commands::{load_inputs, with_precision, HeadSet};
use crate::error::CliError;
use crate::manifest::RunManifest;

/// One CSV row. With several heads, density and coverage are head means,
/// `max_err` the maximum, `mean_err` the mean, `time_us` the sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub tau: f64,
    #[serde(rename = "S")]
    pub segment_size: usize,
    pub strategy: Strategy,
    pub density: f64,
    pub coverage: Option<f64>,
    pub max_err: f64,
    pub mean_err: f64,
    pub time_us: f64,
}

pub const CSV_HEADER: &str = "tau,S,strategy,density,coverage,max_err,mean_err,time_us";

/// Sweeps every `(strategy, S, tau)` combination. Rows come back sorted by
/// strategy name, then `S`, then `tau`. An empty `strategies` list means
/// the manifest's strategy.
pub fn cmd_sweep(
    manifest: &RunManifest,
    taus: &[f64],
    segment_sizes: &[usize],
    strategies: &[Strategy],
) -> Result<Vec<SweepRecord>, CliError> {
    if taus.is_empty() || segment_sizes.is_empty() {
        return Err(CliError::config("sweep needs at least one tau and one segment size"));
    }
    let strategies = if strategies.is_empty() {
        vec![manifest.pipeline.strategy]
    } else {
        strategies.to_vec()
    };
    for &strategy in &strategies {
        for &tau in taus {
            for &segment_size in segment_sizes {
                PipelineConfig {
                    strategy,
                    tau,
                    segment_size,
                    ..manifest.pipeline
                }
                .validate()?;
            }
        }
    }
    let mut rows = with_precision!(
        manifest.pipeline.precision,
        sweep_typed(manifest, taus, segment_sizes, &strategies)
    )?;
    rows.sort_by(|a, b| {
        a.strategy
            .name()
            .cmp(b.strategy.name())
            .then(a.segment_size.cmp(&b.segment_size))
            .then(a.tau.total_cmp(&b.tau))
    });
    Ok(rows)
}

fn sweep_typed<T: Scalar>(
    manifest: &RunManifest,
    taus: &[f64],
    segment_sizes: &[usize],
    strategies: &[Strategy],
) -> Result<Vec<SweepRecord>, CliError> {
    let inputs: HeadSet<T> = load_inputs(&manifest.inputs)?;
    let heads = inputs.heads() as f64;
    let mut out = Vec::new();
    for &strategy in strategies {
        let base = PipelineConfig {
            strategy,
            ..manifest.pipeline
        };
        let mut merged: Option<Vec<SweepRecord>> = None;
        for h in 0..inputs.heads() {
            let rows = density_sweep(&inputs.q[h], &inputs.k[h], &inputs.v[h], &base, taus, segment_sizes)?;
            let rows: Vec<SweepRecord> = rows
                .into_iter()
                .map(|r| SweepRecord {
                    tau: r.tau,
                    segment_size: r.segment_size,
                    strategy: r.strategy,
                    density: r.density / heads,
                    coverage: r.coverage.map(|c| c / heads),
                    max_err: r.max_err,
                    mean_err: r.mean_err / heads,
                    time_us: r.time_us,
                })
                .collect();
            merged = Some(match merged {
                None => rows,
                Some(acc) => acc
                    .into_iter()
                    .zip(rows)
                    .map(|(a, b)| SweepRecord {
                        density: a.density + b.density,
                        coverage: a.coverage.zip(b.coverage).map(|(x, y)| x + y),
                        max_err: a.max_err.max(b.max_err),
                        mean_err: a.mean_err + b.mean_err,
                        time_us: a.time_us + b.time_us,
                        ..a
                    })
                    .collect(),
            });
        }
        out.extend(merged.unwrap_or_default());
    }
    Ok(out)
}

/// Writes the rows as CSV with the fixed header; empty coverage cells
/// mean coverage was not measured.
pub fn write_sweep_csv(rows: &[SweepRecord], out: impl Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    w.flush().map_err(|e| CliError::Csv(e.into()))?;
    Ok(())
}
