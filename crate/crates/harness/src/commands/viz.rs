use std::fs;
use std::path::{Path, PathBuf};

use pbs_core::attention::{attention_probabilities, AttentionConfig, ElementMask};
use pbs_core::pipeline::pbs_attention_detailed;
use pbs_core::tensor::write_tensor;
use pbs_core::{Error, Scalar, Tensor};

use crate::commands::{load_inputs, with_precision, HeadSet};
use crate::error::CliError;
use crate::manifest::RunManifest;

/// Largest sequence whose dense attention matrix `viz` will write.
pub const VIZ_MAX_TOKENS: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct VizOutput {
    /// `N x N` attention probabilities in permuted order.
    pub attention: PathBuf,
    /// `T_r x T_c` grid, 1 for selected tiles.
    pub mask: PathBuf,
}

/// Writes `<label>_h<head>_attention.pbst` and `<label>_h<head>_mask.pbst`.
pub fn cmd_viz(manifest: &RunManifest, head: usize, label: &str, out_dir: &Path) -> Result<VizOutput, CliError> {
    manifest.pipeline.validate()?;
    if label.is_empty() || label.contains(['/', '\\']) {
        return Err(CliError::config(format!(
            "label {label:?} must be a plain file name prefix"
        )));
    }
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let out = VizOutput {
        attention: out_dir.join(format!("{label}_h{head}_attention.pbst")),
        mask: out_dir.join(format!("{label}_h{head}_mask.pbst")),
    };
    with_precision!(manifest.pipeline.precision, viz_typed(manifest, head, &out))?;
    Ok(out)
}

fn viz_typed<T: Scalar>(manifest: &RunManifest, head: usize, out: &VizOutput) -> Result<(), CliError> {
    let inputs: HeadSet<T> = load_inputs(&manifest.inputs)?;
    if head >= inputs.heads() {
        return Err(CliError::config(format!(
            "head {head} out of range, inputs have {}",
            inputs.heads()
        )));
    }
    let n = inputs.seq_len();
    if n > VIZ_MAX_TOKENS {
        return Err(Error::Resource {
            what: "visualized tokens",
            requested: n,
            limit: VIZ_MAX_TOKENS,
        }
        .into());
    }
    let (q, k, v) = (&inputs.q[head], &inputs.k[head], &inputs.v[head]);
    let run = pbs_attention_detailed(q, k, v, &manifest.pipeline)?;
    let qp = run.query_order.apply_rows(q)?;
    let kp = run.key_order.apply_rows(k)?;
    let positions = ElementMask::new(run.query_order.map().to_vec(), run.key_order.map().to_vec())?;
    let cfg = AttentionConfig::new(manifest.pipeline.block_size, q.cols(), true)?;
    let probs = attention_probabilities(&qp, &kp, &cfg, Some(&positions))?;
    write_tensor(&out.attention, &Tensor::Matrix(probs)).map_err(CliError::at(&out.attention))?;
    write_tensor(&out.mask, &Tensor::Matrix(run.mask.to_matrix::<T>())).map_err(CliError::at(&out.mask))?;
    Ok(())
}
