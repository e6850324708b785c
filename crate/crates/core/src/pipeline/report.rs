use serde::{Deserialize, Serialize};

/// Wall time per pipeline stage, in microseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub estimate: f64,
    pub permute: f64,
    pub select: f64,
    pub attention: f64,
    pub unpermute: f64,
}

impl StageTimings {
    pub const STAGES: [&'static str; 5] = ["estimate", "permute", "select", "attention", "unpermute"];

    pub fn get(&self, stage: &str) -> Option<f64> {
        match stage {
            "estimate" => Some(self.estimate),
            "permute" => Some(self.permute),
            "select" => Some(self.select),
            "attention" => Some(self.attention),
            "unpermute" => Some(self.unpermute),
            _ => None,
        }
    }

    pub fn total(&self) -> f64 {
        self.estimate + self.permute + self.select + self.attention + self.unpermute
    }
}

/// Sparsity, coverage and timing summary of one pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    /// `selected_blocks / (T_r * T_c)`.
    pub block_density: f64,
    /// `(T_c + 1) / (2 T_c)`, the density of plain causal attention.
    pub causal_density_baseline: f64,
    /// Share of the true causal attention mass inside selected tiles;
    /// `null` when coverage measurement was disabled.
    pub attention_coverage: Option<f64>,
    /// Share of the pooled block-score mass inside selected tiles.
    pub pooled_coverage: f64,
    pub selected_blocks: usize,
    pub total_admissible_blocks: usize,
    pub timings_us: StageTimings,
}

impl PipelineReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
