use std::collections::BTreeMap;
use std::time::Instant;

use pbs_core::attention::{attention_tiled, AttentionConfig};
use pbs_core::pipeline::{pbs_attention, PipelineConfig, StageTimings};
use pbs_core::Scalar;
use serde::{Deserialize, Serialize};

use crate::commands::{load_inputs, with_precision, HeadSet};
use crate::error::CliError;
use crate::manifest::RunManifest;

pub const MIN_REPEAT: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageStats {
    pub median_us: f64,
    /// Interquartile range, `q75 - q25`.
    pub iqr_us: f64,
    pub samples_us: Vec<f64>,
}

impl StageStats {
    pub fn from_samples(samples: Vec<f64>) -> Self {
        let mut sorted = samples.clone();
        sorted.sort_by(f64::total_cmp);
        StageStats {
            median_us: quantile(&sorted, 0.5),
            iqr_us: quantile(&sorted, 0.75) - quantile(&sorted, 0.25),
            samples_us: samples,
        }
    }
}

/// Linear interpolation between closest ranks on sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Timings per pipeline stage (summed over heads within one repetition),
/// plus the pipeline total and a full causal attention pass for scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub pipeline: PipelineConfig,
    pub repeat: usize,
    pub heads_count: usize,
    pub seq_len: usize,
    pub head_dim: usize,
    pub block_density: f64,
    /// Keyed by the stage names of the pipeline report timings.
    pub stages: BTreeMap<String, StageStats>,
    pub total: StageStats,
    pub full_attention: StageStats,
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bench serializes")
    }
}

/// Measures the pipeline `repeat` times on one thread. Coverage
/// measurement is switched off so it does not pollute the timings.
pub fn cmd_bench(manifest: &RunManifest, repeat: usize) -> Result<BenchReport, CliError> {
    if repeat < MIN_REPEAT {
        return Err(CliError::config(format!(
            "repeat must be at least {MIN_REPEAT}, got {repeat}"
        )));
    }
    manifest.pipeline.validate()?;
    with_precision!(manifest.pipeline.precision, bench_typed(manifest, repeat))
}

fn bench_typed<T: Scalar>(manifest: &RunManifest, repeat: usize) -> Result<BenchReport, CliError> {
    let inputs: HeadSet<T> = load_inputs(&manifest.inputs)?;
    let cfg = PipelineConfig {
        measure_coverage: false,
        ..manifest.pipeline
    };
    let full_cfg = AttentionConfig::new(cfg.block_size, inputs.head_dim(), true)?;
    let mut per_stage: BTreeMap<&str, Vec<f64>> = StageTimings::STAGES.iter().map(|s| (*s, Vec::new())).collect();
    let mut totals = Vec::with_capacity(repeat);
    let mut full = Vec::with_capacity(repeat);
    let mut density = 0.0;
    for _ in 0..repeat {
        let mut sum = StageTimings::default();
        density = 0.0;
        for h in 0..inputs.heads() {
            let (_, report) = pbs_attention(&inputs.q[h], &inputs.k[h], &inputs.v[h], &cfg)?;
            let t = report.timings_us;
            sum.estimate += t.estimate;
            sum.permute += t.permute;
            sum.select += t.select;
            sum.attention += t.attention;
            sum.unpermute += t.unpermute;
            density += report.block_density / inputs.heads() as f64;
        }
        for (stage, samples) in per_stage.iter_mut() {
            samples.push(sum.get(stage).expect("known stage"));
        }
        totals.push(sum.total());

        let start = Instant::now();
        for h in 0..inputs.heads() {
            attention_tiled(&inputs.q[h], &inputs.k[h], &inputs.v[h], &full_cfg, None)?;
        }
        full.push(start.elapsed().as_secs_f64() * 1e6);
    }
    Ok(BenchReport {
        pipeline: manifest.pipeline,
        repeat,
        heads_count: inputs.heads(),
        seq_len: inputs.seq_len(),
        head_dim: inputs.head_dim(),
        block_density: density,
        stages: per_stage
            .into_iter()
            .map(|(k, v)| (k.to_string(), StageStats::from_samples(v)))
            .collect(),
        total: StageStats::from_samples(totals),
        full_attention: StageStats::from_samples(full),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartiles() {
        let s = StageStats::from_samples(vec![5.0, 1.0, 3.0, 2.0, 4.0]);
        assert_eq!(s.median_us, 3.0);
        assert_eq!(s.iqr_us, 2.0);
        let s = StageStats::from_samples(vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.median_us, 2.5);
        assert_eq!(s.iqr_us, 1.5);
    }
}
