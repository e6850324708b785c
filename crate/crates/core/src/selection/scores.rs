use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::selection::{BlockLayout, BlockMask};
use crate::tensor::{matmul_transposed, softmax_rows, RealMatrix};

/// Row means of each `block_size` slab of `m`; a short final block is
/// averaged over its actual rows.
pub fn mean_pool_blocks<T: Scalar>(m: &RealMatrix<T>, block_size: usize) -> RealMatrix<T> {
    let blocks = m.rows().div_ceil(block_size);
    let mut out = RealMatrix::zeros(blocks, m.cols());
    for b in 0..blocks {
        let start = b * block_size;
        let end = (start + block_size).min(m.rows());
        let o = out.row_mut(b);
        for r in start..end {
            for (acc, &x) in o.iter_mut().zip(m.row(r)) {
                *acc += x;
            }
        }
        let inv = T::one() / T::lit((end - start) as f64);
        o.iter_mut().for_each(|x| *x *= inv);
    }
    out
}

/// Block-level attention estimate: softmax over pooled logits plus the
/// additive causal mask used to produce it.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockScoreMatrix<T: Scalar> {
    scores: RealMatrix<T>,
    causal: RealMatrix<T>,
    layout: BlockLayout,
}

impl<T: Scalar> BlockScoreMatrix<T> {
    pub fn new(scores: RealMatrix<T>, causal: RealMatrix<T>, layout: BlockLayout) -> Result<Self> {
        scores.check_same_shape(&causal)?;
        layout.validate()?;
        Ok(BlockScoreMatrix { scores, causal, layout })
    }

    pub fn scores(&self) -> &RealMatrix<T> {
        &self.scores
    }

    pub fn causal_mask(&self) -> &RealMatrix<T> {
        &self.causal
    }

    pub fn layout(&self) -> BlockLayout {
        self.layout
    }

    #[inline]
    pub fn admissible(&self, i: usize, j: usize) -> bool {
        self.causal.get(i, j) == T::zero()
    }

    pub fn admissible_blocks(&self) -> usize {
        self.causal.as_slice().iter().filter(|&&c| c == T::zero()).count()
    }

    /// Mean over query blocks of the pooled score mass that `mask` covers.
    pub fn covered_mass(&self, mask: &BlockMask) -> f64 {
        let rows = self.scores.rows();
        if rows == 0 {
            return 0.0;
        }
        let total: f64 = (0..rows)
            .map(|i| {
                (0..self.scores.cols())
                    .filter(|&j| mask.get(i, j))
                    .map(|j| self.scores.get(i, j).as_f64())
                    .sum::<f64>()
            })
            .sum();
        total / rows as f64
    }
}

/// Scores tiles by attention between block-mean queries and block-mean
/// keys: `softmax(Qbar Kbar^T / sqrt(d) + C)`.
pub fn meanpool_block_scores<T: Scalar>(
    q: &RealMatrix<T>,
    k: &RealMatrix<T>,
    layout: BlockLayout,
    causal: &RealMatrix<T>,
) -> Result<BlockScoreMatrix<T>> {
    layout.validate()?;
    if q.cols() != k.cols() {
        return Err(Error::shape(format!("Q has {} cols, K has {}", q.cols(), k.cols())));
    }
    let b = layout.block_size;
    let expect = (q.rows().div_ceil(b), k.rows().div_ceil(b));
    if causal.shape() != expect {
        return Err(Error::shape(format!(
            "causal mask is {}x{}, pooled grid is {}x{}",
            causal.rows(),
            causal.cols(),
            expect.0,
            expect.1
        )));
    }
    let q_bar = mean_pool_blocks(q, b);
    let k_bar = mean_pool_blocks(k, b);
    let mut logits = matmul_transposed(&q_bar, &k_bar)?;
    let scale = T::one() / T::lit(q.cols() as f64).sqrt();
    logits.as_mut_slice().iter_mut().for_each(|x| *x *= scale);
    let scores = softmax_rows(&logits, Some(causal))?;
    BlockScoreMatrix::new(scores, causal.clone(), layout)
}
