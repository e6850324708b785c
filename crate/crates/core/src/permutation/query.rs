use crate::attention::AttentionConfig;
use crate::error::{Error, Result};
use crate::permutation::{Permutation, SegmentedPermutation};
use crate::scalar::Scalar;
use crate::selection::mean_pool_blocks;
use crate::tensor::{dot, RealMatrix};

/// Centroid index each query is most cosine-similar to. Ties go to the
/// lower centroid. A zero-norm query gets `centroids` (after every real
/// centroid); a zero-norm centroid scores `-1` against every query.
pub fn assign_queries_to_centroids<T: Scalar>(q: &RealMatrix<T>, centroids: &RealMatrix<T>) -> Vec<usize> {
    let c_norms: Vec<T> = (0..centroids.rows())
        .map(|c| dot(centroids.row(c), centroids.row(c)).sqrt())
        .collect();
    (0..q.rows())
        .map(|i| {
            let row = q.row(i);
            let norm = dot(row, row).sqrt();
            if norm == T::zero() {
                return centroids.rows();
            }
            let mut best = 0;
            let mut best_sim = T::neg_infinity();
            for (c, &cn) in c_norms.iter().enumerate() {
                let sim = if cn == T::zero() {
                    -T::one()
                } else {
                    dot(row, centroids.row(c)) / (norm * cn)
                };
                if sim > best_sim {
                    best_sim = sim;
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Key-aware query permutation: inside each complete segment, queries are
/// grouped by their best-matching key-block centroid, groups ordered by
/// centroid index and original order kept within a group.
pub fn build_query_permutation<T: Scalar>(
    q: &RealMatrix<T>,
    k: &RealMatrix<T>,
    cfg: &AttentionConfig,
    segment_size: usize,
) -> Result<SegmentedPermutation> {
    cfg.validate()?;
    if q.cols() != k.cols() {
        return Err(Error::shape(format!("Q has {} cols, K has {}", q.cols(), k.cols())));
    }
    let centroids = mean_pool_blocks(k, cfg.block_size);
    let assignment = assign_queries_to_centroids(q, &centroids);
    let groups = SegmentedPermutation::group_count(q.rows(), segment_size);
    let locals = (0..groups)
        .map(|g| {
            let seg = &assignment[g * segment_size..(g + 1) * segment_size];
            let mut order: Vec<usize> = (0..segment_size).collect();
            order.sort_by_key(|&i| seg[i]);
            Permutation::from_trusted(order)
        })
        .collect();
    SegmentedPermutation::new(segment_size, locals, q.rows())
}
