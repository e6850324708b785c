use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense row-major matrix.
#[derive(Clone, PartialEq)]
pub struct RealMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> RealMatrix<T> {
    /// Wraps `data` as a `rows x cols` matrix. Values are not checked for
    /// finiteness here since additive masks legitimately hold `-inf`.
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(RealMatrix { rows, cols, data })
    }

    /// Like [`RealMatrix::new`] but rejects NaN and infinities.
    pub fn new_finite(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        let m = Self::new(rows, cols, data)?;
        m.ensure_finite()?;
        Ok(m)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, T::zero())
    }

    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        RealMatrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        RealMatrix { rows, cols, data }
    }

    /// Builds a matrix from nested rows, converting from `f64`.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::shape(format!("row {i} has {} values, expected {cols}", r.len())));
            }
            data.extend(r.iter().map(|&x| T::lit(x)));
        }
        Ok(RealMatrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.data[i * self.cols + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Contiguous rows `start..end` as one slice.
    #[inline]
    pub fn rows_slice(&self, start: usize, end: usize) -> &[T] {
        &self.data[start * self.cols..end * self.cols]
    }

    /// Copy of rows `start..end`.
    pub fn slice_rows(&self, start: usize, end: usize) -> Self {
        RealMatrix {
            rows: end - start,
            cols: self.cols,
            data: self.rows_slice(start, end).to_vec(),
        }
    }

    pub fn ensure_finite(&self) -> Result<()> {
        match self.data.iter().position(|x| !x.is_finite()) {
            Some(index) => Err(Error::NonFinite { index }),
            None => Ok(()),
        }
    }

    pub fn cast<U: Scalar>(&self) -> RealMatrix<U> {
        RealMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| U::lit(x.as_f64())).collect(),
        }
    }

    /// Largest absolute elementwise difference, in `f64`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a.as_f64() - b.as_f64()).abs())
            .fold(0.0, f64::max))
    }

    pub fn mean_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        if self.data.is_empty() {
            return Ok(0.0);
        }
        let total: f64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a.as_f64() - b.as_f64()).abs())
            .sum();
        Ok(total / self.data.len() as f64)
    }

    pub(crate) fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }
}

impl<T: Scalar> fmt::Debug for RealMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RealMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        if self.rows > 8 {
            writeln!(f, "  ...")?;
        }
        write!(f, "]")
    }
}

/// A stack of equally shaped matrices (heads x rows x cols).
#[derive(Debug, Clone, PartialEq)]
pub enum Tensor<T: Scalar> {
    Matrix(RealMatrix<T>),
    Stack(Vec<RealMatrix<T>>),
}

impl<T: Scalar> Tensor<T> {
    /// Builds a stack, checking all heads share one shape.
    pub fn stack(heads: Vec<RealMatrix<T>>) -> Result<Self> {
        if let Some(first) = heads.first() {
            for (h, m) in heads.iter().enumerate() {
                if m.shape() != first.shape() {
                    return Err(Error::shape(format!(
                        "head {h} is {}x{}, head 0 is {}x{}",
                        m.rows(),
                        m.cols(),
                        first.rows(),
                        first.cols()
                    )));
                }
            }
        }
        Ok(Tensor::Stack(heads))
    }

    pub fn shape(&self) -> Vec<usize> {
        match self {
            Tensor::Matrix(m) => vec![m.rows(), m.cols()],
            Tensor::Stack(hs) => {
                let (r, c) = hs.first().map_or((0, 0), |m| m.shape());
                vec![hs.len(), r, c]
            }
        }
    }

    /// Views the tensor as a list of heads; a bare matrix is one head.
    pub fn into_heads(self) -> Vec<RealMatrix<T>> {
        match self {
            Tensor::Matrix(m) => vec![m],
            Tensor::Stack(hs) => hs,
        }
    }

    pub fn heads(&self) -> Vec<&RealMatrix<T>> {
        match self {
            Tensor::Matrix(m) => vec![m],
            Tensor::Stack(hs) => hs.iter().collect(),
        }
    }

    pub fn cast<U: Scalar>(&self) -> Tensor<U> {
        match self {
            Tensor::Matrix(m) => Tensor::Matrix(m.cast()),
            Tensor::Stack(hs) => Tensor::Stack(hs.iter().map(|m| m.cast()).collect()),
        }
    }
}
