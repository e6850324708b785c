use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::RealMatrix;

const LANES: usize = 8;

/// Dot product with independent partial sums so the loop vectorizes.
#[inline]
pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [T::zero(); LANES];
    let chunks_a = a.chunks_exact(LANES);
    let chunks_b = b.chunks_exact(LANES);
    let (rem_a, rem_b) = (chunks_a.remainder(), chunks_b.remainder());
    for (ca, cb) in chunks_a.zip(chunks_b) {
        for k in 0..LANES {
            acc[k] += ca[k] * cb[k];
        }
    }
    let mut sum = T::zero();
    for x in acc {
        sum += x;
    }
    for (x, y) in rem_a.iter().zip(rem_b) {
        sum += *x * *y;
    }
    sum
}

/// `out += alpha * x`
#[inline]
pub(crate) fn axpy<T: Scalar>(alpha: T, x: &[T], out: &mut [T]) {
    for (o, &v) in out.iter_mut().zip(x) {
        *o += alpha * v;
    }
}

/// Computes `a * b^T`, i.e. `out[i][j] = dot(a.row(i), b.row(j))`.
pub fn matmul_transposed<T: Scalar>(a: &RealMatrix<T>, b: &RealMatrix<T>) -> Result<RealMatrix<T>> {
    if a.cols() != b.cols() {
        return Err(Error::shape(format!(
            "matmul_transposed inner dims differ: {} vs {}",
            a.cols(),
            b.cols()
        )));
    }
    Ok(RealMatrix::from_fn(a.rows(), b.rows(), |i, j| dot(a.row(i), b.row(j))))
}

/// Plain `a * b` (used to apply attention probabilities to values).
pub fn matmul<T: Scalar>(a: &RealMatrix<T>, b: &RealMatrix<T>) -> Result<RealMatrix<T>> {
    if a.cols() != b.rows() {
        return Err(Error::shape(format!(
            "matmul inner dims differ: {} vs {}",
            a.cols(),
            b.rows()
        )));
    }
    let mut out = RealMatrix::zeros(a.rows(), b.cols());
    for i in 0..a.rows() {
        let a_row = a.row(i);
        let o = out.row_mut(i);
        for (k, &w) in a_row.iter().enumerate() {
            if w != T::zero() {
                axpy(w, b.row(k), o);
            }
        }
    }
    Ok(out)
}

/// Numerically stable softmax of one row in place, with the row max
/// subtracted first. A row with no finite entry becomes all zeros.
pub fn softmax_in_place<T: Scalar>(row: &mut [T]) {
    let max = row.iter().copied().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        row.iter_mut().for_each(|x| *x = T::zero());
        return;
    }
    let mut sum = T::zero();
    for x in row.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in row.iter_mut() {
        *x /= sum;
    }
}

/// Row-wise softmax of `m + mask`. Mask entries are `0` (keep) or `-inf`
/// (drop); fully masked rows come back as zeros.
pub fn softmax_rows<T: Scalar>(m: &RealMatrix<T>, mask: Option<&RealMatrix<T>>) -> Result<RealMatrix<T>> {
    let mut out = m.clone();
    if let Some(mask) = mask {
        m.check_same_shape(mask)?;
        for (x, &c) in out.as_mut_slice().iter_mut().zip(mask.as_slice()) {
            *x += c;
        }
    }
    for i in 0..out.rows() {
        softmax_in_place(out.row_mut(i));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_matmul_t(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
        a.iter()
            .map(|ra| {
                b.iter()
                    .map(|rb| {
                        let mut s = 0.0;
                        for k in 0..ra.len() {
                            s += ra[k] * rb[k];
                        }
                        s
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn matmul_transposed_examples() {
        let a = RealMatrix::<f64>::from_rows(&[&[1.0, 0.0]]).unwrap();
        let b = RealMatrix::<f64>::from_rows(&[&[0.0, 1.0]]).unwrap();
        assert_eq!(matmul_transposed(&a, &b).unwrap().as_slice(), &[0.0]);

        let i2 = RealMatrix::<f64>::identity(2);
        assert_eq!(matmul_transposed(&i2, &i2).unwrap(), i2);

        let a = RealMatrix::<f64>::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let b = RealMatrix::<f64>::from_rows(&[&[5.0, 6.0], &[7.0, 8.0]]).unwrap();
        let oracle = naive_matmul_t(&[vec![1.0, 2.0], vec![3.0, 4.0]], &[vec![5.0, 6.0], vec![7.0, 8.0]]);
        assert_eq!(oracle, vec![vec![17.0, 23.0], vec![39.0, 53.0]]);
        assert_eq!(matmul_transposed(&a, &b).unwrap().as_slice(), &[17.0, 23.0, 39.0, 53.0]);
    }

    #[test]
    fn matmul_transposed_shape_error() {
        let a = RealMatrix::<f32>::zeros(2, 3);
        let b = RealMatrix::<f32>::zeros(2, 2);
        assert!(matches!(matmul_transposed(&a, &b), Err(Error::Shape(_))));
    }

    #[test]
    fn dot_handles_remainders() {
        let a: Vec<f64> = (0..19).map(|x| x as f64).collect();
        let expect: f64 = a.iter().map(|x| x * x).sum();
        assert_eq!(dot(&a, &a), expect);
    }

    #[test]
    fn softmax_examples() {
        let m = RealMatrix::<f64>::from_rows(&[&[0.0, 0.0]]).unwrap();
        assert_eq!(softmax_rows(&m, None).unwrap().as_slice(), &[0.5, 0.5]);

        for x in [-1e30, -3.5, 0.0, 7.25, 1e30] {
            let m = RealMatrix::<f64>::from_rows(&[&[x]]).unwrap();
            assert_eq!(softmax_rows(&m, None).unwrap().as_slice(), &[1.0]);
        }

        let m = RealMatrix::<f64>::from_rows(&[&[1.0, 2.0, 3.0]]).unwrap();
        let mask = RealMatrix::<f64>::from_rows(&[&[0.0, f64::NEG_INFINITY, 0.0]]).unwrap();
        let out = softmax_rows(&m, Some(&mask)).unwrap();
        let e2 = 2.0f64.exp();
        let expect = [1.0 / (1.0 + e2), 0.0, e2 / (1.0 + e2)];
        for (o, e) in out.as_slice().iter().zip(expect) {
            assert!((o - e).abs() < 1e-15, "{o} vs {e}");
        }
    }

    #[test]
    fn fully_masked_row_is_zero() {
        let m = RealMatrix::<f32>::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let mask = RealMatrix::<f32>::from_rows(&[&[0.0, 0.0], &[f64::NEG_INFINITY, f64::NEG_INFINITY]]).unwrap();
        let out = softmax_rows(&m, Some(&mask)).unwrap();
        assert_eq!(out.row(1), &[0.0, 0.0]);
        assert!((out.row(0).iter().sum::<f32>() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn softmax_mask_shape_error() {
        let m = RealMatrix::<f64>::zeros(2, 2);
        let mask = RealMatrix::<f64>::zeros(2, 3);
        assert!(matches!(softmax_rows(&m, Some(&mask)), Err(Error::Shape(_))));
    }

    fn row_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
        (1usize..24).prop_flat_map(|n| {
            (
                prop::collection::vec(-30.0f64..30.0, n),
                prop::collection::vec(any::<bool>(), n),
            )
        })
    }

    fn check_sums<T: Scalar>(values: &[f64], keep: &[bool]) {
        let n = values.len();
        let m = RealMatrix::<T>::new(1, n, values.iter().map(|&x| T::lit(x)).collect()).unwrap();
        let mask = RealMatrix::<T>::new(
            1,
            n,
            keep.iter()
                .map(|&k| if k { T::zero() } else { T::neg_infinity() })
                .collect(),
        )
        .unwrap();
        let out = softmax_rows(&m, Some(&mask)).unwrap();
        let sum: f64 = out.as_slice().iter().map(|x| x.as_f64()).sum();
        if keep.iter().any(|&k| k) {
            assert!((sum - 1.0).abs() <= T::SUM_TOLERANCE, "sum {sum}");
        } else {
            assert_eq!(sum, 0.0);
        }
        for (x, &k) in out.as_slice().iter().zip(keep) {
            assert!(*x >= T::zero());
            if !k {
                assert_eq!(*x, T::zero());
            }
        }
    }

    fn check_shift<T: Scalar>(values: &[f64], shift: f64) -> Result<(), TestCaseError> {
        let n = values.len();
        let base = RealMatrix::<T>::new(1, n, values.iter().map(|&x| T::lit(x)).collect()).unwrap();
        let shifted = RealMatrix::<T>::new(1, n, values.iter().map(|&x| T::lit(x + shift)).collect()).unwrap();
        let a = softmax_rows(&base, None).unwrap();
        let b = softmax_rows(&shifted, None).unwrap();
        prop_assert!(a.max_abs_diff(&b).unwrap() <= T::SUM_TOLERANCE);
        Ok(())
    }

    proptest! {
        #[test]
        fn rows_sum_to_one((values, keep) in row_strategy()) {
            check_sums::<f32>(&values, &keep);
            check_sums::<f64>(&values, &keep);
        }

        #[test]
        fn shift_invariant(ticks in prop::collection::vec(-1280i32..1280, 1..32), shift in -50i32..50) {
            // values on a 1/64 grid with integer shifts stay exactly representable
            let values: Vec<f64> = ticks.iter().map(|&t| t as f64 / 64.0).collect();
            check_shift::<f32>(&values, shift as f64)?;
            check_shift::<f64>(&values, shift as f64)?;
        }
    }
}
