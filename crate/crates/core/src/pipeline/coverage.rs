use crate::attention::AttentionConfig;
use crate::error::{Error, Result};
use crate::permutation::Permutation;
use crate::scalar::Scalar;
use crate::selection::BlockMask;
use crate::tensor::{dot, softmax_in_place, RealMatrix};

/// Largest query count the quadratic coverage diagnostic accepts.
pub const MAX_COVERAGE_TOKENS: usize = 16_384;

/// Fraction of the exact attention probability mass that falls in tiles
/// selected by `mask`.
///
/// `q` and `k` are in original order. `query_order` and `key_order` are
/// the flattened gather permutations that produced the permuted sequences
/// the mask refers to (identity for an unpermuted mask). Probabilities are
/// computed one query row at a time from the original positions, honoring
/// `cfg.causal`.
pub fn attention_coverage<T: Scalar>(
    q: &RealMatrix<T>,
    k: &RealMatrix<T>,
    mask: &BlockMask,
    cfg: &AttentionConfig,
    query_order: &Permutation,
    key_order: &Permutation,
) -> Result<f64> {
    cfg.validate()?;
    let (n, m) = (q.rows(), k.rows());
    if n > MAX_COVERAGE_TOKENS {
        return Err(Error::Resource {
            what: "coverage query tokens",
            requested: n,
            limit: MAX_COVERAGE_TOKENS,
        });
    }
    if q.cols() != k.cols() {
        return Err(Error::shape(format!("Q has {} cols, K has {}", q.cols(), k.cols())));
    }
    if query_order.len() != n || key_order.len() != m {
        return Err(Error::shape(format!(
            "orders cover {}x{} tokens, inputs are {n}x{m}",
            query_order.len(),
            key_order.len()
        )));
    }
    if mask.shape() != (cfg.blocks(n), cfg.blocks(m)) {
        return Err(Error::shape(format!(
            "block mask is {}x{}, inputs need {}x{}",
            mask.rows(),
            mask.cols(),
            cfg.blocks(n),
            cfg.blocks(m)
        )));
    }
    let q_pos = query_order.inverse();
    let k_pos = key_order.inverse();
    let key_block: Vec<usize> = k_pos.map().iter().map(|&p| p / cfg.block_size).collect();
    let scale = T::lit(cfg.scale);
    let mut row = vec![T::zero(); m];
    let (mut covered, mut total) = (0.0f64, 0.0f64);
    for i in 0..n {
        let visible = if cfg.causal { (i + 1).min(m) } else { m };
        let qi = q.row(i);
        for (j, r) in row[..visible].iter_mut().enumerate() {
            *r = dot(qi, k.row(j)) * scale;
        }
        softmax_in_place(&mut row[..visible]);
        let qb = q_pos.map()[i] / cfg.block_size;
        for (j, &p) in row[..visible].iter().enumerate() {
            let p = p.as_f64();
            total += p;
            if mask.get(qb, key_block[j]) {
                covered += p;
            }
        }
    }
    Ok(if total > 0.0 { (covered / total).min(1.0) } else { 0.0 })
}
