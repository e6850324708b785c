//! Seeded synthetic Q/K/V generators.
//!
//! Every head draws from its own ChaCha8 stream (`seed`, stream = head
//! index). Values are sampled in `f64` and rounded to the requested
//! precision, so a seed fixes the bytes for each precision.
//!
//! Kinds:
//!
//! - `gaussian`: i.i.d. standard normal Q, K, V.
//! - `vertical_lines`: a random unit direction `u` per head. Every query
//!   gets `query_alignment * u` added; `line_count` keys get
//!   `line_strength * u` added, so all queries attend to those keys. With
//!   `scattered` placement line `l` lands in complete segment
//!   `l * G / line_count` (G segments of `segment_size`) at a random
//!   offset, so the lines spread evenly over segments. `clustered` places
//!   them in one contiguous run at a random start. Because every query
//!   leans toward `u`, each ordinary key's own projection on `u` also
//!   acts as a weaker, query-independent importance.
//! - `block_diag`: consecutive runs of `cluster_size` tokens share a random
//!   direction scaled by `cluster_strength` in both Q and K, which
//!   concentrates attention on the diagonal blocks.
//! - `mixed`: `block_diag` plus vertical lines.

use std::fmt;
use std::str::FromStr;

use pbs_core::{RealMatrix, Scalar};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkloadKind {
    Gaussian,
    VerticalLines,
    BlockDiag,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scatter {
    Clustered,
    Scattered,
}

macro_rules! snake_enum {
    ($ty:ty, $($variant:ident => $name:literal),+) => {
        impl $ty {
            pub fn name(self) -> &'static str {
                match self {
                    $(Self::$variant => $name),+
                }
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($name => Ok(Self::$variant),)+
                    _ => Err(format!("unknown value {s:?}, expected one of: {}", [$($name),+].join(", "))),
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }
    };
}

snake_enum!(WorkloadKind, Gaussian => "gaussian", VerticalLines => "vertical_lines", BlockDiag => "block_diag", Mixed => "mixed");
snake_enum!(Scatter, Clustered => "clustered", Scattered => "scattered");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub kind: WorkloadKind,
    pub n: usize,
    pub d: usize,
    pub heads: usize,
    pub seed: u64,
    #[serde(default = "defaults::line_count")]
    pub line_count: usize,
    #[serde(default = "defaults::line_strength")]
    pub line_strength: f64,
    #[serde(default = "defaults::scatter")]
    pub scatter: Scatter,
    #[serde(default = "defaults::query_alignment")]
    pub query_alignment: f64,
    /// Segment length used to spread scattered lines.
    #[serde(default = "defaults::segment_size")]
    pub segment_size: usize,
    #[serde(default = "defaults::cluster_size")]
    pub cluster_size: usize,
    #[serde(default = "defaults::cluster_strength")]
    pub cluster_strength: f64,
}

pub mod defaults {
    use super::Scatter;

    pub fn line_count() -> usize {
        8
    }
    pub fn line_strength() -> f64 {
        16.0
    }
    pub fn scatter() -> Scatter {
        Scatter::Scattered
    }
    pub fn query_alignment() -> f64 {
        8.0
    }
    pub fn segment_size() -> usize {
        256
    }
    pub fn cluster_size() -> usize {
        128
    }
    pub fn cluster_strength() -> f64 {
        8.0
    }
}

impl WorkloadSpec {
    pub fn new(kind: WorkloadKind, n: usize, d: usize, heads: usize, seed: u64) -> Self {
        WorkloadSpec {
            kind,
            n,
            d,
            heads,
            seed,
            line_count: defaults::line_count(),
            line_strength: defaults::line_strength(),
            scatter: defaults::scatter(),
            query_alignment: defaults::query_alignment(),
            segment_size: defaults::segment_size(),
            cluster_size: defaults::cluster_size(),
            cluster_strength: defaults::cluster_strength(),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.n == 0 || self.d == 0 || self.heads == 0 {
            return Err(CliError::config(format!(
                "workload needs n, d and heads >= 1, got n={} d={} heads={}",
                self.n, self.d, self.heads
            )));
        }
        let finite = [self.line_strength, self.query_alignment, self.cluster_strength];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(CliError::config("workload strengths must be finite"));
        }
        if self.has_lines() && self.line_count > self.n {
            return Err(CliError::config(format!(
                "line_count {} exceeds sequence length {}",
                self.line_count, self.n
            )));
        }
        if matches!(self.kind, WorkloadKind::BlockDiag | WorkloadKind::Mixed) && self.cluster_size == 0 {
            return Err(CliError::config("cluster_size must be positive"));
        }
        Ok(())
    }

    fn has_lines(&self) -> bool {
        matches!(self.kind, WorkloadKind::VerticalLines | WorkloadKind::Mixed)
    }

    /// Positions of the planted line keys for one head, ascending.
    pub fn line_positions(&self, head: usize) -> Vec<usize> {
        let mut rng = self.head_rng(head);
        // skip the draws that precede placement so positions match generate()
        let _ = self.draw_base(&mut rng);
        self.place_lines(&mut rng)
    }

    fn head_rng(&self, head: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(head as u64);
        rng
    }

    fn draw_base(&self, rng: &mut ChaCha8Rng) -> [Vec<f64>; 3] {
        let mut normal = |len: usize| -> Vec<f64> { (0..len).map(|_| rng.sample(StandardNormal)).collect() };
        let len = self.n * self.d;
        [normal(len), normal(len), normal(len)]
    }

    fn place_lines(&self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let (n, count) = (self.n, self.line_count);
        if count == 0 {
            return Vec::new();
        }
        let mut positions = match self.scatter {
            Scatter::Clustered => {
                let start = rng.random_range(0..=n - count);
                (start..start + count).collect()
            }
            Scatter::Scattered => {
                let seg = self.segment_size;
                let groups = n.checked_div(seg).unwrap_or(0);
                if groups == 0 {
                    index::sample(rng, n, count).into_vec()
                } else {
                    let mut out = Vec::with_capacity(count);
                    for g in 0..groups {
                        let here = (0..count).filter(|&l| l * groups / count == g).count();
                        let offsets = index::sample(rng, seg, here.min(seg));
                        out.extend(offsets.into_iter().map(|o| g * seg + o));
                    }
                    out
                }
            }
        };
        positions.sort_unstable();
        positions
    }

    fn unit_direction(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..self.d).map(|_| rng.sample(StandardNormal)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                return v.into_iter().map(|x| x / norm).collect();
            }
        }
    }

    /// Q, K, V for one head.
    pub fn generate_head<T: Scalar>(&self, head: usize) -> [RealMatrix<T>; 3] {
        let (n, d) = (self.n, self.d);
        let mut rng = self.head_rng(head);
        let [mut q, mut k, v] = self.draw_base(&mut rng);

        if self.has_lines() {
            let lines = self.place_lines(&mut rng);
            let u = self.unit_direction(&mut rng);
            for i in 0..n {
                for c in 0..d {
                    q[i * d + c] += self.query_alignment * u[c];
                }
            }
            for &p in &lines {
                for c in 0..d {
                    k[p * d + c] += self.line_strength * u[c];
                }
            }
        }
        if matches!(self.kind, WorkloadKind::BlockDiag | WorkloadKind::Mixed) {
            for start in (0..n).step_by(self.cluster_size) {
                let dir = self.unit_direction(&mut rng);
                for i in start..(start + self.cluster_size).min(n) {
                    for c in 0..d {
                        q[i * d + c] += self.cluster_strength * dir[c];
                        k[i * d + c] += self.cluster_strength * dir[c];
                    }
                }
            }
        }

        let cast = |x: Vec<f64>| RealMatrix::new(n, d, x.into_iter().map(T::lit).collect()).expect("sized");
        [cast(q), cast(k), cast(v)]
    }

    /// Q, K, V stacks for every head.
    pub fn generate<T: Scalar>(&self) -> Result<[Vec<RealMatrix<T>>; 3], CliError> {
        self.validate()?;
        let mut out: [Vec<RealMatrix<T>>; 3] = Default::default();
        for h in 0..self.heads {
            for (dst, m) in out.iter_mut().zip(self.generate_head(h)) {
                dst.push(m);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scattered_lines_two_per_segment() {
        let mut spec = WorkloadSpec::new(WorkloadKind::VerticalLines, 1024, 8, 2, 3);
        spec.segment_size = 256;
        for h in 0..2 {
            let pos = spec.line_positions(h);
            assert_eq!(pos.len(), 8);
            for g in 0..4 {
                assert_eq!(pos.iter().filter(|&&p| p / 256 == g).count(), 2);
            }
        }
    }

    #[test]
    fn clustered_lines_are_contiguous() {
        let mut spec = WorkloadSpec::new(WorkloadKind::VerticalLines, 300, 4, 1, 9);
        spec.scatter = Scatter::Clustered;
        let pos = spec.line_positions(0);
        assert!(pos.windows(2).all(|w| w[1] == w[0] + 1));
    }

    #[test]
    fn lines_have_boosted_norm() {
        let spec = WorkloadSpec::new(WorkloadKind::VerticalLines, 512, 16, 1, 1);
        let [_, k, _] = spec.generate_head::<f64>(0);
        let lines = spec.line_positions(0);
        let norm = |i: usize| k.row(i).iter().map(|x| x * x).sum::<f64>().sqrt();
        let weakest_line = lines.iter().map(|&p| norm(p)).fold(f64::INFINITY, f64::min);
        let strongest_other = (0..512).filter(|p| !lines.contains(p)).map(norm).fold(0.0, f64::max);
        assert!(weakest_line > 1.5 * strongest_other);
    }

    #[test]
    fn heads_differ_and_seed_repeats() {
        let spec = WorkloadSpec::new(WorkloadKind::Gaussian, 16, 4, 2, 5);
        let a = spec.generate::<f32>().unwrap();
        let b = spec.generate::<f32>().unwrap();
        assert_eq!(a, b);
        assert_ne!(a[0][0], a[0][1]);
    }

    #[test]
    fn rejects_bad_specs() {
        let mut spec = WorkloadSpec::new(WorkloadKind::VerticalLines, 4, 4, 1, 0);
        assert!(spec.validate().is_err());
        spec.line_count = 2;
        assert!(spec.validate().is_ok());
        spec.n = 0;
        assert!(spec.validate().is_err());
    }
}
