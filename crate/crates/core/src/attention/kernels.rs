use crate::attention::mask::{TileVisibility, Visibility};
use crate::attention::{AttentionConfig, ElementMask, OnlineSoftmaxState};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::selection::BlockMask;
use crate::tensor::{dot, matmul, matmul_transposed, softmax_rows, RealMatrix};

fn check_inputs<T: Scalar>(
    q: &RealMatrix<T>,
    k: &RealMatrix<T>,
    v: &RealMatrix<T>,
    cfg: &AttentionConfig,
    elem_mask: Option<&ElementMask>,
) -> Result<()> {
    cfg.validate()?;
    if q.cols() != cfg.head_dim || k.cols() != cfg.head_dim {
        return Err(Error::shape(format!(
            "Q has {} cols and K has {} cols, head dim is {}",
            q.cols(),
            k.cols(),
            cfg.head_dim
        )));
    }
    if k.rows() != v.rows() {
        return Err(Error::shape(format!("K has {} rows but V has {}", k.rows(), v.rows())));
    }
    if let Some(m) = elem_mask {
        if m.q_orig().len() != q.rows() || m.k_orig().len() != k.rows() {
            return Err(Error::shape(format!(
                "element mask covers {}x{} positions, inputs are {}x{}",
                m.q_orig().len(),
                m.k_orig().len(),
                q.rows(),
                k.rows()
            )));
        }
    }
    Ok(())
}

/// The full `N x M` matrix of attention probabilities,
/// `softmax(scale * QK^T + mask)`. Rows with no admissible key are zero.
pub fn attention_probabilities<T: Scalar>(
    q: &RealMatrix<T>,
    k: &RealMatrix<T>,
    cfg: &AttentionConfig,
    elem_mask: Option<&ElementMask>,
) -> Result<RealMatrix<T>> {
    if q.cols() != k.cols() {
        return Err(Error::shape(format!("Q has {} cols, K has {}", q.cols(), k.cols())));
    }
    let dummy_v = RealMatrix::zeros(k.rows(), 0);
    check_inputs(q, k, &dummy_v, cfg, elem_mask)?;
    let scale = T::lit(cfg.scale);
    let mut scores = matmul_transposed(q, k)?;
    scores.as_mut_slice().iter_mut().for_each(|x| *x *= scale);
    let vis = Visibility::resolve(cfg.causal, elem_mask);
    let mask = match vis {
        Visibility::All => None,
        _ => Some(RealMatrix::from_fn(q.rows(), k.rows(), |i, j| {
            if vis.admits(i, j) {
                T::zero()
            } else {
                T::neg_infinity()
            }
        })),
    };
    softmax_rows(&scores, mask.as_ref())
}

/// Reference attention by full materialization of the probability matrix.
///
/// With `cfg.causal` and no element mask, key `j` is hidden from query `i`
/// when `j > i`. An element mask, when given, replaces that rule with
/// `k_orig[j] > q_orig[i]`.
pub fn attention_oracle<T: Scalar>(
    q: &RealMatrix<T>,
    k: &RealMatrix<T>,
    v: &RealMatrix<T>,
    cfg: &AttentionConfig,
    elem_mask: Option<&ElementMask>,
) -> Result<RealMatrix<T>> {
    check_inputs(q, k, v, cfg, elem_mask)?;
    let probs = attention_probabilities(q, k, cfg, elem_mask)?;
    matmul(&probs, v)
}

/// Streaming attention over `B x B` tiles with online softmax.
pub fn attention_tiled<T: Scalar>(
    q: &RealMatrix<T>,
    k: &RealMatrix<T>,
    v: &RealMatrix<T>,
    cfg: &AttentionConfig,
    elem_mask: Option<&ElementMask>,
) -> Result<RealMatrix<T>> {
    check_inputs(q, k, v, cfg, elem_mask)?;
    tiled(q, k, v, cfg, Visibility::resolve(cfg.causal, elem_mask), |_, _| true)
}

/// Tiled attention that only visits tiles selected in `mask`; skipped
/// tiles leave the running state untouched.
pub fn attention_block_sparse<T: Scalar>(
    q: &RealMatrix<T>,
    k: &RealMatrix<T>,
    v: &RealMatrix<T>,
    cfg: &AttentionConfig,
    mask: &BlockMask,
    elem_mask: Option<&ElementMask>,
) -> Result<RealMatrix<T>> {
    check_inputs(q, k, v, cfg, elem_mask)?;
    let expect = (cfg.blocks(q.rows()), cfg.blocks(k.rows()));
    if mask.shape() != expect {
        return Err(Error::shape(format!(
            "block mask is {}x{}, inputs need {}x{}",
            mask.rows(),
            mask.cols(),
            expect.0,
            expect.1
        )));
    }
    tiled(q, k, v, cfg, Visibility::resolve(cfg.causal, elem_mask), |i, j| {
        mask.get(i, j)
    })
}

fn tiled<T: Scalar>(
    q: &RealMatrix<T>,
    k: &RealMatrix<T>,
    v: &RealMatrix<T>,
    cfg: &AttentionConfig,
    vis: Visibility<'_>,
    selected: impl Fn(usize, usize) -> bool,
) -> Result<RealMatrix<T>> {
    let (n, m) = (q.rows(), k.rows());
    let dv = v.cols();
    let scale = T::lit(cfg.scale);
    let mut out = RealMatrix::zeros(n, dv);
    let mut tile = vec![T::zero(); cfg.block_size * cfg.block_size];

    for qb in 0..cfg.blocks(n) {
        let q_rows = cfg.block_range(qb, n);
        let mut state = OnlineSoftmaxState::new(q_rows.len(), dv);
        for kb in 0..cfg.blocks(m) {
            if !selected(qb, kb) {
                continue;
            }
            let k_rows = cfg.block_range(kb, m);
            let tile_vis = vis.tile(q_rows.clone(), k_rows.clone());
            if tile_vis == TileVisibility::Empty {
                continue;
            }
            let cols = k_rows.len();
            let scores = &mut tile[..q_rows.len() * cols];
            for (r, i) in q_rows.clone().enumerate() {
                let q_row = q.row(i);
                let s = &mut scores[r * cols..(r + 1) * cols];
                for (c, j) in k_rows.clone().enumerate() {
                    s[c] = if tile_vis == TileVisibility::Full || vis.admits(i, j) {
                        dot(q_row, k.row(j)) * scale
                    } else {
                        T::neg_infinity()
                    };
                }
            }
            state.update(scores, cols, v.rows_slice(k_rows.start, k_rows.end));
        }
        let block = state.finalize(qb)?;
        out.as_mut_slice()[q_rows.start * dv..q_rows.end * dv].copy_from_slice(block.as_slice());
    }
    Ok(out)
}
