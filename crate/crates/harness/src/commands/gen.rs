use std::fs;
use std::path::{Path, PathBuf};

use pbs_core::pipeline::Precision;
use pbs_core::tensor::write_tensor;
use pbs_core::{Scalar, Tensor};

use crate::commands::with_precision;
use crate::error::CliError;
use crate::workload::WorkloadSpec;

/// Writes `q.pbst`, `k.pbst`, `v.pbst` (head stacks) and `workload.json`
/// into `out_dir`, returning the tensor paths.
pub fn cmd_gen(spec: &WorkloadSpec, precision: Precision, out_dir: &Path) -> Result<[PathBuf; 3], CliError> {
    spec.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let paths = ["q", "k", "v"].map(|n| out_dir.join(format!("{n}.pbst")));
    with_precision!(precision, write_all(spec, &paths))?;
    let meta = out_dir.join("workload.json");
    let text = serde_json::to_string_pretty(spec).expect("spec serializes");
    fs::write(&meta, text + "\n").map_err(|e| CliError::io(&meta, e))?;
    Ok(paths)
}

fn write_all<T: Scalar>(spec: &WorkloadSpec, paths: &[PathBuf; 3]) -> Result<(), CliError> {
    let tensors = spec.generate::<T>()?;
    for (path, heads) in paths.iter().zip(tensors) {
        write_tensor(path, &Tensor::stack(heads)?).map_err(CliError::at(path))?;
    }
    Ok(())
}
