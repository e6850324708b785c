use crate::attention::{attention_probabilities, AttentionConfig};
use crate::error::{Error, Result};
use crate::permutation::{Permutation, SegmentedPermutation};
use crate::scalar::Scalar;
use crate::tensor::RealMatrix;

/// Per-key mean attention probability received from the last query block.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceScores<T: Scalar> {
    values: Vec<T>,
    source_query_block: usize,
}

impl<T: Scalar> ImportanceScores<T> {
    pub fn new(values: Vec<T>, source_query_block: usize) -> Self {
        ImportanceScores {
            values,
            source_query_block,
        }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn source_query_block(&self) -> usize {
        self.source_query_block
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Averages the unmasked softmax of the final `B` queries against every
/// key. With fewer than `B` queries all of them are used.
pub fn estimate_key_importance<T: Scalar>(
    q: &RealMatrix<T>,
    k: &RealMatrix<T>,
    cfg: &AttentionConfig,
) -> Result<ImportanceScores<T>> {
    cfg.validate()?;
    if k.rows() == 0 || q.rows() == 0 {
        return Err(Error::shape(
            "importance estimation needs at least one query and one key",
        ));
    }
    let start = q.rows().saturating_sub(cfg.block_size);
    let last = q.slice_rows(start, q.rows());
    let non_causal = AttentionConfig { causal: false, ..*cfg };
    let probs = attention_probabilities(&last, k, &non_causal, None)?;
    let inv_rows = T::one() / T::lit(last.rows() as f64);
    let mut values = vec![T::zero(); k.rows()];
    for r in 0..probs.rows() {
        for (acc, &p) in values.iter_mut().zip(probs.row(r)) {
            *acc += p;
        }
    }
    values.iter_mut().for_each(|x| *x *= inv_rows);
    Ok(ImportanceScores::new(values, cfg.blocks(q.rows()) - 1))
}

/// Stable descending argsort: ties keep ascending original index.
pub(crate) fn argsort_descending<T: Scalar>(values: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        values[b]
            .partial_cmp(&values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    idx
}

/// Sorts keys inside each complete segment by descending importance.
pub fn build_key_permutation<T: Scalar>(scores: &ImportanceScores<T>, segment_size: usize) -> SegmentedPermutation {
    let n = scores.len();
    let groups = SegmentedPermutation::group_count(n, segment_size);
    let locals = (0..groups)
        .map(|g| {
            let seg = &scores.values()[g * segment_size..(g + 1) * segment_size];
            Permutation::from_trusted(argsort_descending(seg))
        })
        .collect();
    SegmentedPermutation::new(segment_size, locals, n).expect("locals sized by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argsort_example() {
        let s = ImportanceScores::new(vec![0.1, 0.4, 0.2, 0.3, 0.05, 0.05, 0.6, 0.3], 0);
        let sp = build_key_permutation(&s, 4);
        assert_eq!(sp.locals()[0].map(), &[1, 3, 2, 0]);
        assert_eq!(sp.locals()[1].map(), &[2, 3, 0, 1]);
        let permuted = sp.flatten().apply_slice(s.values()).unwrap();
        for seg in permuted.chunks(4) {
            assert!(seg.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn singleton_and_oversized_segments() {
        let s = ImportanceScores::new(vec![0.3, 0.1, 0.6], 0);
        assert!(build_key_permutation(&s, 1).flatten().is_identity());
        let sp = build_key_permutation(&s, 4);
        assert!(sp.locals().is_empty());
        assert!(sp.flatten().is_identity());
    }

    #[test]
    fn equal_keys_give_uniform_scores() {
        let cfg = AttentionConfig::new(2, 3, true).unwrap();
        let q = RealMatrix::<f64>::from_fn(6, 3, |i, j| (i as f64 - j as f64) * 0.7);
        let k = RealMatrix::<f64>::from_fn(5, 3, |_, j| j as f64);
        let s = estimate_key_importance(&q, &k, &cfg).unwrap();
        assert_eq!(s.source_query_block(), 2);
        for x in s.values() {
            assert!((x - 0.2).abs() < 1e-12);
        }
    }

    #[test]
    fn dominant_key_wins() {
        let cfg = AttentionConfig::new(2, 2, false).unwrap();
        let q = RealMatrix::<f32>::from_fn(4, 2, |_, _| 1.0);
        let k = RealMatrix::<f32>::from_fn(6, 2, |i, _| if i == 3 { 5.0 } else { 0.1 * i as f32 });
        let s = estimate_key_importance(&q, &k, &cfg).unwrap();
        let best = argsort_descending(s.values())[0];
        assert_eq!(best, 3);
        let total: f32 = s.values().iter().sum();
        assert!((total - 1.0).abs() < 1e-5);
    }

    #[test]
    fn short_query_uses_all_rows() {
        let cfg = AttentionConfig::new(8, 2, false).unwrap();
        let q = RealMatrix::<f64>::from_rows(&[&[1.0, 0.0], &[0.0, 1.0]]).unwrap();
        let k = RealMatrix::<f64>::from_rows(&[&[1.0, 0.0], &[0.0, 1.0]]).unwrap();
        let s = estimate_key_importance(&q, &k, &cfg).unwrap();
        assert!((s.values()[0] - 0.5).abs() < 1e-12);
        assert_eq!(s.source_query_block(), 0);
    }

    #[test]
    fn empty_keys_rejected() {
        let cfg = AttentionConfig::new(2, 2, false).unwrap();
        let q = RealMatrix::<f64>::zeros(2, 2);
        let k = RealMatrix::<f64>::zeros(0, 2);
        assert!(matches!(estimate_key_importance(&q, &k, &cfg), Err(Error::Shape(_))));
    }
}
