use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::RealMatrix;

/// A bijection on `0..n` stored as a gather index: `map[new] = old`.
///
/// Applying it to a matrix pulls row `map[i]` into row `i`. Dense
/// permutation matrices are never formed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for (i, &x) in map.iter().enumerate() {
            if x >= map.len() || seen[x] {
                return Err(Error::config(format!(
                    "index {x} at position {i} breaks the permutation of 0..{}",
                    map.len()
                )));
            }
            seen[x] = true;
        }
        Ok(Permutation { map })
    }

    pub(crate) fn from_trusted(map: Vec<usize>) -> Self {
        debug_assert!(Permutation::new(map.clone()).is_ok());
        Permutation { map }
    }

    pub fn identity(n: usize) -> Self {
        Permutation { map: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &x)| i == x)
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.map.len()];
        for (new, &old) in self.map.iter().enumerate() {
            inv[old] = new;
        }
        Permutation { map: inv }
    }

    /// The permutation equal to applying `self` first and then `after`.
    pub fn then(&self, after: &Permutation) -> Result<Permutation> {
        if self.len() != after.len() {
            return Err(Error::shape(format!(
                "composing lengths {} and {}",
                self.len(),
                after.len()
            )));
        }
        Ok(Permutation {
            map: after.map.iter().map(|&i| self.map[i]).collect(),
        })
    }

    /// `out.row(i) == m.row(map[i])`.
    pub fn apply_rows<T: Scalar>(&self, m: &RealMatrix<T>) -> Result<RealMatrix<T>> {
        if self.len() != m.rows() {
            return Err(Error::shape(format!(
                "permutation of length {} applied to {} rows",
                self.len(),
                m.rows()
            )));
        }
        let cols = m.cols();
        let mut data = Vec::with_capacity(m.rows() * cols);
        for &src in &self.map {
            data.extend_from_slice(m.row(src));
        }
        RealMatrix::new(m.rows(), cols, data)
    }

    pub fn apply_slice<U: Clone>(&self, xs: &[U]) -> Result<Vec<U>> {
        if self.len() != xs.len() {
            return Err(Error::shape(format!(
                "permutation of length {} applied to {} items",
                self.len(),
                xs.len()
            )));
        }
        Ok(self.map.iter().map(|&i| xs[i].clone()).collect())
    }
}
