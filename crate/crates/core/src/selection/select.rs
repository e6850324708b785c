use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::selection::{BlockMask, BlockScoreMatrix};

/// Tiles that are always computed regardless of their score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForcedPolicy {
    /// The first key block (attention sink).
    pub first_block: bool,
    /// Every key block in the query block's own segment.
    pub segment_band: bool,
}

impl Default for ForcedPolicy {
    fn default() -> Self {
        ForcedPolicy {
            first_block: true,
            segment_band: true,
        }
    }
}

impl ForcedPolicy {
    pub fn none() -> Self {
        ForcedPolicy {
            first_block: false,
            segment_band: false,
        }
    }
}

/// Threshold selection over one row of block scores.
///
/// Returns the smallest prefix of admissible blocks, sorted by descending
/// score with ties broken by ascending index, whose cumulative score
/// reaches `tau`. If the row total never reaches `tau` every admissible
/// block is returned.
pub fn select_row<T: Scalar>(scores: &[T], admissible: impl Fn(usize) -> bool, tau: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).filter(|&j| admissible(j)).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut cumulative = 0.0;
    let mut take = order.len();
    for (idx, &j) in order.iter().enumerate() {
        cumulative += scores[j].as_f64();
        if cumulative >= tau {
            take = idx + 1;
            break;
        }
    }
    order.truncate(take);
    order
}

/// Builds the block mask from pooled scores: cumulative-threshold
/// selection per query block, united with the forced tiles.
pub fn select_blocks<T: Scalar>(scores: &BlockScoreMatrix<T>, tau: f64, forced: ForcedPolicy) -> BlockMask {
    let s = scores.scores();
    let layout = scores.layout();
    let (rows, cols) = s.shape();
    let mut mask = BlockMask::new(rows, cols, layout);
    for i in 0..rows {
        for j in select_row(s.row(i), |j| scores.admissible(i, j), tau) {
            mask.set(i, j, true);
        }
        if forced.first_block && cols > 0 && scores.admissible(i, 0) {
            mask.set(i, 0, true);
        }
        if forced.segment_band {
            for j in layout.band(i, cols) {
                if scores.admissible(i, j) {
                    mask.set(i, j, true);
                }
            }
        }
    }
    mask
}
