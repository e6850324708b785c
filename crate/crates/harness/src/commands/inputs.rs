use pbs_core::tensor::read_tensor;
use pbs_core::{RealMatrix, Scalar, Tensor};

use crate::error::CliError;
use crate::manifest::Inputs;

/// Per-head Q, K, V in one precision.
#[derive(Debug, Clone)]
pub struct HeadSet<T: Scalar> {
    pub q: Vec<RealMatrix<T>>,
    pub k: Vec<RealMatrix<T>>,
    pub v: Vec<RealMatrix<T>>,
    /// Inputs were bare matrices rather than head stacks.
    pub single_matrix: bool,
}

impl<T: Scalar> HeadSet<T> {
    pub fn heads(&self) -> usize {
        self.q.len()
    }

    pub fn seq_len(&self) -> usize {
        self.q.first().map_or(0, |m| m.rows())
    }

    pub fn head_dim(&self) -> usize {
        self.q.first().map_or(0, |m| m.cols())
    }

    /// Wraps per-head outputs the same way the inputs were shaped.
    pub fn shape_like_inputs(&self, out: Vec<RealMatrix<T>>) -> Result<Tensor<T>, CliError> {
        if self.single_matrix {
            Ok(Tensor::Matrix(out.into_iter().next().expect("one head")))
        } else {
            Ok(Tensor::stack(out)?)
        }
    }

    fn check(&self) -> Result<(), CliError> {
        let (hq, hk, hv) = (self.q.len(), self.k.len(), self.v.len());
        if hq != hk || hq != hv {
            return Err(CliError::config(format!("head counts differ: Q {hq}, K {hk}, V {hv}")));
        }
        if hq == 0 {
            return Err(CliError::config("inputs contain no heads"));
        }
        let (q, k, v) = (&self.q[0], &self.k[0], &self.v[0]);
        if q.rows() != k.rows() || k.rows() != v.rows() {
            return Err(CliError::config(format!(
                "sequence lengths differ: Q {}, K {}, V {}",
                q.rows(),
                k.rows(),
                v.rows()
            )));
        }
        if q.cols() != k.cols() {
            return Err(CliError::config(format!(
                "Q head dim {} differs from K head dim {}",
                q.cols(),
                k.cols()
            )));
        }
        if q.rows() == 0 || q.cols() == 0 {
            return Err(CliError::config("inputs are empty"));
        }
        Ok(())
    }
}

pub fn load_inputs<T: Scalar>(inputs: &Inputs) -> Result<HeadSet<T>, CliError> {
    let set = match inputs {
        Inputs::Files(f) => {
            let mut ranks = Vec::new();
            let mut load = |path: &std::path::Path| -> Result<Vec<RealMatrix<T>>, CliError> {
                let t = read_tensor(path).map_err(CliError::at(path))?;
                ranks.push(t.shape().len());
                Ok(t.into_precision::<T>().into_heads())
            };
            let (q, k, v) = (load(&f.q)?, load(&f.k)?, load(&f.v)?);
            if ranks.iter().any(|&r| r != ranks[0]) {
                return Err(CliError::config("Q, K and V files mix 2-D and 3-D tensors"));
            }
            HeadSet {
                q,
                k,
                v,
                single_matrix: ranks[0] == 2,
            }
        }
        Inputs::Workload(spec) => {
            let [q, k, v] = spec.generate::<T>()?;
            HeadSet {
                q,
                k,
                v,
                single_matrix: false,
            }
        }
    };
    set.check()?;
    Ok(set)
}
