use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::selection::BlockLayout;
use crate::tensor::RealMatrix;

/// Additive block-level causal mask: `0` where the key block's segment
/// does not come after the query block's (which includes the whole
/// on-diagonal segment band), `-inf` elsewhere. Unsegmented layouts give
/// the usual lower-triangular block mask.
pub fn build_block_causal_mask<T: Scalar>(
    row_blocks: usize,
    col_blocks: usize,
    layout: BlockLayout,
) -> Result<RealMatrix<T>> {
    layout.validate()?;
    if row_blocks != col_blocks {
        return Err(Error::shape(format!(
            "block causal mask needs a square grid, got {row_blocks}x{col_blocks}"
        )));
    }
    Ok(RealMatrix::from_fn(row_blocks, col_blocks, |i, j| {
        if layout.admissible(i, j) {
            T::zero()
        } else {
            T::neg_infinity()
        }
    }))
}

/// Fraction of a `T_c x T_c` grid on or below the block diagonal,
/// `(T_c + 1) / (2 T_c)`.
pub fn causal_block_density(col_blocks: usize) -> f64 {
    assert!(col_blocks >= 1, "causal block density needs at least one block");
    (col_blocks as f64 + 1.0) / (2.0 * col_blocks as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn admissible_count(m: &RealMatrix<f64>) -> usize {
        m.as_slice().iter().filter(|&&x| x == 0.0).count()
    }

    #[test]
    fn unsegmented_lower_triangle() {
        let c = build_block_causal_mask::<f64>(4, 4, BlockLayout::unsegmented(16).unwrap()).unwrap();
        assert_eq!(admissible_count(&c), 10);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(c.get(i, j) == 0.0, j <= i);
            }
        }
    }

    #[test]
    fn segment_band_is_admissible() {
        let c = build_block_causal_mask::<f32>(4, 4, BlockLayout::new(128, 256).unwrap()).unwrap();
        assert_eq!(c.get(0, 1), 0.0);
        assert_eq!(c.get(0, 2), f32::NEG_INFINITY);
        assert_eq!(c.get(2, 3), 0.0);
        assert_eq!(c.get(3, 0), 0.0);
    }

    #[test]
    fn single_block() {
        let c = build_block_causal_mask::<f64>(1, 1, BlockLayout::new(4, 8).unwrap()).unwrap();
        assert_eq!(c.as_slice(), &[0.0]);
    }

    #[test]
    fn non_square_rejected() {
        assert!(build_block_causal_mask::<f64>(3, 4, BlockLayout::unsegmented(2).unwrap()).is_err());
    }

    #[test]
    fn density_values() {
        assert_eq!(causal_block_density(1), 1.0);
        assert_eq!(causal_block_density(4), 0.625);
        assert_eq!(causal_block_density(64), 65.0 / 128.0);
    }
}
