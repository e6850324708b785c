use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tiling and scaling parameters shared by every attention path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttentionConfig {
    pub block_size: usize,
    pub head_dim: usize,
    pub causal: bool,
    /// Multiplier applied to `QK^T`; `1/sqrt(head_dim)` unless overridden.
    pub scale: f64,
}

impl AttentionConfig {
    pub fn new(block_size: usize, head_dim: usize, causal: bool) -> Result<Self> {
        let cfg = AttentionConfig {
            block_size,
            head_dim,
            causal,
            scale: 1.0 / (head_dim.max(1) as f64).sqrt(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        self.scale = scale;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_size == 0 {
            return Err(Error::config("block size must be at least 1"));
        }
        if self.head_dim == 0 {
            return Err(Error::config("head dim must be at least 1"));
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::config(format!("scale must be positive, got {}", self.scale)));
        }
        Ok(())
    }

    /// Number of blocks covering `len` rows (`ceil(len / B)`).
    #[inline]
    pub fn blocks(&self, len: usize) -> usize {
        len.div_ceil(self.block_size)
    }

    /// Row range of block `b` within a sequence of `len` rows; the last
    /// block may be short.
    #[inline]
    pub fn block_range(&self, b: usize, len: usize) -> std::ops::Range<usize> {
        let start = b * self.block_size;
        start..(start + self.block_size).min(len)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_validation() {
        let cfg = AttentionConfig::new(32, 16, true).unwrap();
        assert_eq!(cfg.scale, 0.25);
        assert_eq!(cfg.blocks(65), 3);
        assert_eq!(cfg.block_range(2, 65), 64..65);
        assert!(AttentionConfig::new(0, 16, false).is_err());
        assert!(AttentionConfig::new(4, 0, false).is_err());
        assert!(cfg.with_scale(0.0).is_err());
        assert!(cfg.with_scale(-1.0).is_err());
    }
}
