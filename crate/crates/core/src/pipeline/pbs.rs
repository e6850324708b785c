use std::time::Instant;

use crate::attention::{attention_block_sparse, AttentionConfig, ElementMask};
use crate::error::{Error, Result};
use crate::permutation::{build_key_permutation, build_query_permutation, estimate_key_importance, Permutation};
use crate::pipeline::{attention_coverage, PipelineConfig, PipelineReport, StageTimings};
use crate::scalar::Scalar;
use crate::selection::{
    build_block_causal_mask, causal_block_density, meanpool_block_scores, select_blocks, BlockMask, BlockScoreMatrix,
};
use crate::tensor::RealMatrix;

/// Everything one pipeline run produced, for callers that need more than
/// the output (visualization, diagnostics).
#[derive(Debug, Clone)]
pub struct PipelineRun<T: Scalar> {
    pub output: RealMatrix<T>,
    pub report: PipelineReport,
    pub mask: BlockMask,
    pub block_scores: BlockScoreMatrix<T>,
    /// Flattened query permutation (`map[new] = old`).
    pub query_order: Permutation,
    /// Flattened key/value permutation (`map[new] = old`).
    pub key_order: Permutation,
}

fn micros(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e6
}

/// Causal permuted block-sparse attention over one head.
pub fn pbs_attention<T: Scalar>(
    q: &RealMatrix<T>,
    k: &RealMatrix<T>,
    v: &RealMatrix<T>,
    cfg: &PipelineConfig,
) -> Result<(RealMatrix<T>, PipelineReport)> {
    let run = pbs_attention_detailed(q, k, v, cfg)?;
    Ok((run.output, run.report))
}

/// Same as [`pbs_attention`], also returning the mask and permutations.
///
/// Steps: build the query and key orders for the strategy, gather
/// `Q' = sigma Q`, `K' = pi K`, `V' = pi V`, select tiles by mean-pooled
/// scores on the permuted sequences, run block-sparse attention with
/// causality checked on original positions, then scatter rows back with
/// `sigma^T`.
pub fn pbs_attention_detailed<T: Scalar>(
    q: &RealMatrix<T>,
    k: &RealMatrix<T>,
    v: &RealMatrix<T>,
    cfg: &PipelineConfig,
) -> Result<PipelineRun<T>> {
    cfg.validate()?;
    let layout = cfg.layout()?;
    let n = q.rows();
    if k.rows() != n || v.rows() != n {
        return Err(Error::shape(format!(
            "prefill needs equal lengths, got Q {n}, K {}, V {}",
            k.rows(),
            v.rows()
        )));
    }
    if n == 0 {
        return Err(Error::shape("empty sequence"));
    }
    let attn = AttentionConfig::new(cfg.block_size, q.cols(), true)?;
    let segment = cfg.segment_size;
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let importance = if cfg.strategy.permutes_keys() {
        Some(estimate_key_importance(q, k, &attn)?)
    } else {
        None
    };
    timings.estimate = micros(t);

    let t = Instant::now();
    let key_order = match &importance {
        Some(s) => build_key_permutation(s, segment).flatten(),
        None => Permutation::identity(n),
    };
    let kp = key_order.apply_rows(k)?;
    let vp = key_order.apply_rows(v)?;
    let permute_keys = micros(t);

    // query grouping is scored against the (possibly permuted) keys
    let t = Instant::now();
    let query_order = if cfg.strategy.permutes_queries() {
        build_query_permutation(q, &kp, &attn, segment)?.flatten()
    } else {
        Permutation::identity(n)
    };
    let qp = query_order.apply_rows(q)?;
    let elem_mask = ElementMask::new(query_order.map().to_vec(), key_order.map().to_vec())?;
    timings.permute = permute_keys + micros(t);

    let t = Instant::now();
    let blocks = attn.blocks(n);
    let causal = build_block_causal_mask::<T>(blocks, blocks, layout)?;
    let block_scores = meanpool_block_scores(&qp, &kp, layout, &causal)?;
    let mask = select_blocks(&block_scores, cfg.tau, cfg.forced);
    timings.select = micros(t);

    let t = Instant::now();
    let out_permuted = attention_block_sparse(&qp, &kp, &vp, &attn, &mask, Some(&elem_mask))?;
    timings.attention = micros(t);

    let t = Instant::now();
    let output = query_order.inverse().apply_rows(&out_permuted)?;
    timings.unpermute = micros(t);

    let attention_coverage = if cfg.measure_coverage {
        Some(attention_coverage(q, k, &mask, &attn, &query_order, &key_order)?)
    } else {
        None
    };

    let report = PipelineReport {
        block_density: mask.density(),
        causal_density_baseline: causal_block_density(blocks),
        attention_coverage,
        pooled_coverage: block_scores.covered_mass(&mask),
        selected_blocks: mask.selected_blocks(),
        total_admissible_blocks: block_scores.admissible_blocks(),
        timings_us: timings,
    };
    Ok(PipelineRun {
        output,
        report,
        mask,
        block_scores,
        query_order,
        key_order,
    })
}
