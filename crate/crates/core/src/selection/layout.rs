use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Block and segment geometry of one prefill.
///
/// `segment_size == 0` means no segmented permutation: every block is its
/// own segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockLayout {
    pub block_size: usize,
    pub segment_size: usize,
}

impl BlockLayout {
    pub fn new(block_size: usize, segment_size: usize) -> Result<Self> {
        let layout = BlockLayout {
            block_size,
            segment_size,
        };
        layout.validate()?;
        Ok(layout)
    }

    pub fn unsegmented(block_size: usize) -> Result<Self> {
        Self::new(block_size, 0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_size == 0 {
            return Err(Error::config("block size must be at least 1"));
        }
        if self.segment_size != 0 && !self.segment_size.is_multiple_of(self.block_size) {
            return Err(Error::config(format!(
                "segment size {} must be a positive multiple of block size {}",
                self.segment_size, self.block_size
            )));
        }
        Ok(())
    }

    /// Blocks per segment (1 when unsegmented).
    #[inline]
    pub fn blocks_per_segment(&self) -> usize {
        if self.segment_size == 0 {
            1
        } else {
            self.segment_size / self.block_size
        }
    }

    #[inline]
    pub fn segment_of_block(&self, block: usize) -> usize {
        block / self.blocks_per_segment()
    }

    /// Key blocks sharing a segment with query block `row`, clipped to `cols`.
    pub fn band(&self, row: usize, cols: usize) -> std::ops::Range<usize> {
        let per = self.blocks_per_segment();
        let start = self.segment_of_block(row) * per;
        start.min(cols)..(start + per).min(cols)
    }

    /// Whether tile `(row, col)` may hold admissible entries: the key
    /// block's segment does not come after the query block's.
    #[inline]
    pub fn admissible(&self, row: usize, col: usize) -> bool {
        self.segment_of_block(col) <= self.segment_of_block(row)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segments_of_two_blocks() {
        let l = BlockLayout::new(128, 256).unwrap();
        assert_eq!(l.blocks_per_segment(), 2);
        assert_eq!(
            (0..5).map(|b| l.segment_of_block(b)).collect::<Vec<_>>(),
            vec![0, 0, 1, 1, 2]
        );
        assert_eq!(l.band(3, 10), 2..4);
        assert_eq!(l.band(4, 5), 4..5);
    }

    #[test]
    fn unsegmented_is_blockwise() {
        let l = BlockLayout::unsegmented(16).unwrap();
        assert_eq!(l.segment_of_block(7), 7);
        assert_eq!(l.band(7, 8), 7..8);
    }

    #[test]
    fn misaligned_segments_rejected() {
        assert!(BlockLayout::new(128, 192).is_err());
        assert!(BlockLayout::new(128, 64).is_err());
        assert!(BlockLayout::new(0, 0).is_err());
    }
}
