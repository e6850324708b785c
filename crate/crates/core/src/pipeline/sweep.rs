use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::attention::{attention_oracle, AttentionConfig};
use crate::error::Result;
use crate::pipeline::{pbs_attention, PipelineConfig, Strategy};
use crate::scalar::Scalar;
use crate::tensor::RealMatrix;

/// One `(tau, S)` point of a density/quality sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub tau: f64,
    pub segment_size: usize,
    pub strategy: Strategy,
    pub density: f64,
    pub coverage: Option<f64>,
    /// Max-abs-diff against the causal oracle.
    pub max_err: f64,
    pub mean_err: f64,
    pub time_us: f64,
}

/// Runs the pipeline over every `(tau, S)` pair with `base`'s remaining
/// settings and scores each output against one causal oracle evaluation.
/// Rows come back sorted by `(S, tau)`.
pub fn density_sweep<T: Scalar>(
    q: &RealMatrix<T>,
    k: &RealMatrix<T>,
    v: &RealMatrix<T>,
    base: &PipelineConfig,
    taus: &[f64],
    segment_sizes: &[usize],
) -> Result<Vec<SweepRow>> {
    let oracle_cfg = AttentionConfig::new(base.block_size, q.cols(), true)?;
    let oracle = attention_oracle(q, k, v, &oracle_cfg, None)?;
    let mut rows = Vec::with_capacity(taus.len() * segment_sizes.len());
    for &segment_size in segment_sizes {
        for &tau in taus {
            let cfg = PipelineConfig {
                tau,
                segment_size,
                ..*base
            };
            let t = Instant::now();
            let (out, report) = pbs_attention(q, k, v, &cfg)?;
            let time_us = t.elapsed().as_secs_f64() * 1e6;
            rows.push(SweepRow {
                tau,
                segment_size,
                strategy: base.strategy,
                density: report.block_density,
                coverage: report.attention_coverage,
                max_err: out.max_abs_diff(&oracle)?,
                mean_err: out.mean_abs_diff(&oracle)?,
                time_us,
            });
        }
    }
    rows.sort_by(|a, b| {
        a.segment_size
            .cmp(&b.segment_size)
            .then(a.tau.partial_cmp(&b.tau).unwrap_or(std::cmp::Ordering::Equal))
    });
    Ok(rows)
}
