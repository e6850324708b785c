use std::fs;
use std::time::Instant;

use pbs_core::attention::{attention_tiled, AttentionConfig};
use pbs_core::pipeline::{pbs_attention, PipelineConfig, PipelineReport, StageTimings};
use pbs_core::tensor::write_tensor;
use pbs_core::{RealMatrix, Scalar};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::commands::{load_inputs, thread_pool, with_precision, HeadSet};
use crate::error::CliError;
use crate::manifest::RunManifest;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadReport {
    pub head: usize,
    pub report: PipelineReport,
    /// Against exact causal attention on the same head.
    pub max_abs_err: f64,
    pub mean_abs_err: f64,
}

/// Cross-head summary: densities and coverages are means, block counts
/// and stage times are sums, `max_abs_err` is the maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub block_density: f64,
    pub causal_density_baseline: f64,
    pub attention_coverage: Option<f64>,
    pub pooled_coverage: f64,
    pub selected_blocks: usize,
    pub total_admissible_blocks: usize,
    pub max_abs_err: f64,
    pub mean_abs_err: f64,
    pub timings_us: StageTimings,
    /// Wall time of the whole multi-head pass.
    pub wall_us: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub pipeline: PipelineConfig,
    pub heads_count: usize,
    pub seq_len: usize,
    pub head_dim: usize,
    pub heads: Vec<HeadReport>,
    pub aggregate: Aggregate,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs the pipeline on every head, writes the output tensor (if the
/// manifest names one) and the report (to its path, if given).
pub fn cmd_run(manifest: &RunManifest, threads: Option<usize>) -> Result<RunReport, CliError> {
    manifest.pipeline.validate()?;
    let report = with_precision!(manifest.pipeline.precision, run_typed(manifest, threads))?;
    if let Some(path) = &manifest.report {
        fs::write(path, report.to_json() + "\n").map_err(|e| CliError::io(path, e))?;
    }
    Ok(report)
}

fn run_typed<T: Scalar>(manifest: &RunManifest, threads: Option<usize>) -> Result<RunReport, CliError> {
    let inputs: HeadSet<T> = load_inputs(&manifest.inputs)?;
    let cfg = manifest.pipeline;
    let pool = thread_pool(threads)?;
    let start = Instant::now();
    let results: Vec<(RealMatrix<T>, HeadReport)> = pool.install(|| {
        (0..inputs.heads())
            .into_par_iter()
            .map(|h| run_head(&inputs, h, &cfg))
            .collect::<Result<_, CliError>>()
    })?;
    let wall_us = start.elapsed().as_secs_f64() * 1e6;

    let (outputs, heads): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    if let Some(path) = &manifest.output {
        write_tensor(path, &inputs.shape_like_inputs(outputs)?).map_err(CliError::at(path))?;
    }
    Ok(RunReport {
        pipeline: cfg,
        heads_count: inputs.heads(),
        seq_len: inputs.seq_len(),
        head_dim: inputs.head_dim(),
        aggregate: aggregate(&heads, wall_us),
        heads,
    })
}

fn run_head<T: Scalar>(
    inputs: &HeadSet<T>,
    h: usize,
    cfg: &PipelineConfig,
) -> Result<(RealMatrix<T>, HeadReport), CliError> {
    let (q, k, v) = (&inputs.q[h], &inputs.k[h], &inputs.v[h]);
    let (out, report) = pbs_attention(q, k, v, cfg)?;
    let exact_cfg = AttentionConfig::new(cfg.block_size, q.cols(), true)?;
    let exact = attention_tiled(q, k, v, &exact_cfg, None)?;
    let head = HeadReport {
        head: h,
        report,
        max_abs_err: out.max_abs_diff(&exact)?,
        mean_abs_err: out.mean_abs_diff(&exact)?,
    };
    Ok((out, head))
}

fn aggregate(heads: &[HeadReport], wall_us: f64) -> Aggregate {
    let n = heads.len().max(1) as f64;
    let mean = |f: &dyn Fn(&HeadReport) -> f64| heads.iter().map(f).sum::<f64>() / n;
    let coverage = heads
        .iter()
        .map(|h| h.report.attention_coverage)
        .collect::<Option<Vec<f64>>>()
        .map(|c| c.iter().sum::<f64>() / n);
    let mut timings = StageTimings::default();
    for h in heads {
        let t = &h.report.timings_us;
        timings.estimate += t.estimate;
        timings.permute += t.permute;
        timings.select += t.select;
        timings.attention += t.attention;
        timings.unpermute += t.unpermute;
    }
    Aggregate {
        block_density: mean(&|h| h.report.block_density),
        causal_density_baseline: mean(&|h| h.report.causal_density_baseline),
        attention_coverage: coverage,
        pooled_coverage: mean(&|h| h.report.pooled_coverage),
        selected_blocks: heads.iter().map(|h| h.report.selected_blocks).sum(),
        total_admissible_blocks: heads.iter().map(|h| h.report.total_admissible_blocks).sum(),
        max_abs_err: heads.iter().map(|h| h.max_abs_err).fold(0.0, f64::max),
        mean_abs_err: mean(&|h| h.mean_abs_err),
        timings_us: timings,
        wall_us,
    }
}
