use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::selection::{BlockLayout, ForcedPolicy};

/// Which sequences are reordered before block selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    None,
    /// Query-aware key permutation (sort keys by last-block importance).
    KeyPermute,
    /// Key-aware query permutation (group queries by key-block centroid).
    QueryPermute,
    /// Key permutation, then query permutation against the permuted keys.
    Both,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::None,
        Strategy::KeyPermute,
        Strategy::QueryPermute,
        Strategy::Both,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::None => "none",
            Strategy::KeyPermute => "key_permute",
            Strategy::QueryPermute => "query_permute",
            Strategy::Both => "both",
        }
    }

    pub fn permutes_keys(self) -> bool {
        matches!(self, Strategy::KeyPermute | Strategy::Both)
    }

    pub fn permutes_queries(self) -> bool {
        matches!(self, Strategy::QueryPermute | Strategy::Both)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::config(format!("unknown strategy {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    F64,
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f32" => Ok(Precision::F32),
            "f64" => Ok(Precision::F64),
            _ => Err(Error::config(format!("unknown precision {s:?}, expected f32 or f64"))),
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Precision::F32 => "f32",
            Precision::F64 => "f64",
        })
    }
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub block_size: usize,
    /// `0` disables segmentation (only valid with [`Strategy::None`]).
    pub segment_size: usize,
    pub tau: f64,
    pub strategy: Strategy,
    pub precision: Precision,
    #[serde(default)]
    pub forced: ForcedPolicy,
    /// Compute true-attention coverage (quadratic time) into the report.
    #[serde(default = "default_true")]
    pub measure_coverage: bool,
}

impl Default for PipelineConfig {
    /// `B = 128`, `S = 256`, `tau = 0.9` with key permutation.
    fn default() -> Self {
        PipelineConfig {
            block_size: 128,
            segment_size: 256,
            tau: 0.9,
            strategy: Strategy::KeyPermute,
            precision: Precision::F32,
            forced: ForcedPolicy::default(),
            measure_coverage: true,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.layout()?;
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::config(format!("tau must lie in [0, 1], got {}", self.tau)));
        }
        if self.segment_size == 0 && self.strategy != Strategy::None {
            return Err(Error::config(format!(
                "strategy {} needs a segment size; segment size 0 only works with strategy none",
                self.strategy
            )));
        }
        Ok(())
    }

    pub fn layout(&self) -> Result<BlockLayout> {
        BlockLayout::new(self.block_size, self.segment_size)
    }
}
