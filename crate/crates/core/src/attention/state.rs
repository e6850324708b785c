use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{axpy, RealMatrix};

/// Running `(O, m, l)` triplet for one query block during streaming
/// softmax: unnormalized output, row max and row denominator.
#[derive(Debug, Clone)]
pub struct OnlineSoftmaxState<T: Scalar> {
    acc: RealMatrix<T>,
    max: Vec<T>,
    denom: Vec<T>,
}

impl<T: Scalar> OnlineSoftmaxState<T> {
    /// `O = 0`, `m = -inf`, `l = 0`.
    pub fn new(rows: usize, value_dim: usize) -> Self {
        OnlineSoftmaxState {
            acc: RealMatrix::zeros(rows, value_dim),
            max: vec![T::neg_infinity(); rows],
            denom: vec![T::zero(); rows],
        }
    }

    pub fn rows(&self) -> usize {
        self.max.len()
    }

    pub fn running_max(&self) -> &[T] {
        &self.max
    }

    pub fn denominator(&self) -> &[T] {
        &self.denom
    }

    pub fn accumulator(&self) -> &RealMatrix<T> {
        &self.acc
    }

    /// Folds one key block into the state.
    ///
    /// `scores` is the `rows x cols` tile of scaled logits with `-inf` at
    /// masked entries; it is overwritten with the unnormalized weights.
    /// `values` holds the block's `cols` value rows, row-major. A row whose
    /// tile entries are all `-inf` is left untouched.
    pub fn update(&mut self, scores: &mut [T], cols: usize, values: &[T]) {
        let dv = self.acc.cols();
        debug_assert_eq!(scores.len(), self.rows() * cols);
        debug_assert_eq!(values.len(), cols * dv);
        for r in 0..self.rows() {
            let s = &mut scores[r * cols..(r + 1) * cols];
            let tile_max = s.iter().copied().fold(T::neg_infinity(), T::max);
            if tile_max == T::neg_infinity() {
                continue;
            }
            let prev = self.max[r];
            let next = prev.max(tile_max);
            let rescale = (prev - next).exp();
            let mut sum = T::zero();
            for x in s.iter_mut() {
                *x = (*x - next).exp();
                sum += *x;
            }
            self.max[r] = next;
            self.denom[r] = self.denom[r] * rescale + sum;
            let o = self.acc.row_mut(r);
            if rescale != T::one() {
                o.iter_mut().for_each(|x| *x *= rescale);
            }
            for (c, &p) in s.iter().enumerate() {
                if p != T::zero() {
                    axpy(p, &values[c * dv..(c + 1) * dv], o);
                }
            }
        }
    }

    /// `O = diag(l)^-1 O`. Fails if any row never saw an admissible key.
    pub fn finalize(self, row_block: usize) -> Result<RealMatrix<T>> {
        let mut out = self.acc;
        for (r, &l) in self.denom.iter().enumerate() {
            if l <= T::zero() {
                return Err(Error::DegenerateRow { row_block });
            }
            let inv = T::one() / l;
            out.row_mut(r).iter_mut().for_each(|x| *x *= inv);
        }
        Ok(out)
    }
}
