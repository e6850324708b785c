use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::selection::BlockLayout;
use crate::tensor::RealMatrix;

/// Boolean `T_r x T_c` grid of tiles to compute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockMask {
    rows: usize,
    cols: usize,
    grid: Vec<bool>,
    layout: BlockLayout,
}

impl BlockMask {
    /// An empty selection.
    pub fn new(rows: usize, cols: usize, layout: BlockLayout) -> Self {
        BlockMask {
            rows,
            cols,
            grid: vec![false; rows * cols],
            layout,
        }
    }

    /// Every tile selected, with no segment structure.
    pub fn full(rows: usize, cols: usize, block_size: usize) -> Self {
        BlockMask {
            rows,
            cols,
            grid: vec![true; rows * cols],
            layout: BlockLayout {
                block_size,
                segment_size: 0,
            },
        }
    }

    pub fn from_fn(rows: usize, cols: usize, layout: BlockLayout, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut mask = Self::new(rows, cols, layout);
        for i in 0..rows {
            for j in 0..cols {
                mask.grid[i * cols + j] = f(i, j);
            }
        }
        mask
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn layout(&self) -> BlockLayout {
        self.layout
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.grid[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, on: bool) {
        self.grid[i * self.cols + j] = on;
    }

    pub fn row(&self, i: usize) -> &[bool] {
        &self.grid[i * self.cols..(i + 1) * self.cols]
    }

    pub fn selected_blocks(&self) -> usize {
        self.grid.iter().filter(|&&b| b).count()
    }

    /// Selected tiles over the whole `T_r x T_c` grid.
    pub fn density(&self) -> f64 {
        if self.grid.is_empty() {
            return 0.0;
        }
        self.selected_blocks() as f64 / self.grid.len() as f64
    }

    pub fn union(&self, other: &BlockMask) -> Result<BlockMask> {
        self.check_shape(other)?;
        let mut out = self.clone();
        for (a, &b) in out.grid.iter_mut().zip(&other.grid) {
            *a |= b;
        }
        Ok(out)
    }

    pub fn is_subset_of(&self, other: &BlockMask) -> bool {
        self.shape() == other.shape() && self.grid.iter().zip(&other.grid).all(|(&a, &b)| !a || b)
    }

    /// No tile whose key segment lies after its query segment is selected.
    pub fn respects_segment_causality(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| !self.get(i, j) || self.layout.admissible(i, j)))
    }

    pub fn every_row_selected(&self) -> bool {
        (0..self.rows).all(|i| self.row(i).iter().any(|&b| b))
    }

    /// `0.0` / `1.0` matrix for writing as a tensor file.
    pub fn to_matrix<T: Scalar>(&self) -> RealMatrix<T> {
        RealMatrix::from_fn(
            self.rows,
            self.cols,
            |i, j| if self.get(i, j) { T::one() } else { T::zero() },
        )
    }

    pub fn from_matrix<T: Scalar>(m: &RealMatrix<T>, layout: BlockLayout) -> Result<Self> {
        let mut mask = Self::new(m.rows(), m.cols(), layout);
        for (idx, &x) in m.as_slice().iter().enumerate() {
            mask.grid[idx] = if x == T::one() {
                true
            } else if x == T::zero() {
                false
            } else {
                return Err(Error::config(format!("block mask entry {idx} is {x}, expected 0 or 1")));
            };
        }
        Ok(mask)
    }

    fn check_shape(&self, other: &BlockMask) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::shape(format!(
                "block masks {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_and_round_trip() {
        let layout = BlockLayout::new(2, 4).unwrap();
        let m = BlockMask::from_fn(4, 4, layout, |i, j| j <= i);
        assert_eq!(m.selected_blocks(), 10);
        assert_eq!(m.density(), 10.0 / 16.0);
        assert!(m.respects_segment_causality());
        let back = BlockMask::from_matrix(&m.to_matrix::<f32>(), layout).unwrap();
        assert_eq!(back, m);
        assert!(BlockMask::full(4, 4, 2)
            .to_matrix::<f64>()
            .as_slice()
            .iter()
            .all(|&x| x == 1.0));
    }

    #[test]
    fn causality_check_uses_segments() {
        let layout = BlockLayout::new(2, 4).unwrap();
        let mut m = BlockMask::new(4, 4, layout);
        m.set(0, 1, true);
        assert!(m.respects_segment_causality());
        m.set(1, 2, true);
        assert!(!m.respects_segment_causality());
    }

    #[test]
    fn union_and_subset() {
        let layout = BlockLayout::unsegmented(1).unwrap();
        let a = BlockMask::from_fn(3, 3, layout, |i, j| i == j);
        let b = BlockMask::from_fn(3, 3, layout, |_, j| j == 0);
        let u = a.union(&b).unwrap();
        assert!(a.is_subset_of(&u) && b.is_subset_of(&u));
        assert!(!u.is_subset_of(&a));
        assert_eq!(u.selected_blocks(), 5);
    }

    #[test]
    fn rejects_non_binary_matrix() {
        let m = RealMatrix::<f32>::from_rows(&[&[0.5]]).unwrap();
        assert!(BlockMask::from_matrix(&m, BlockLayout::unsegmented(1).unwrap()).is_err());
    }
}
