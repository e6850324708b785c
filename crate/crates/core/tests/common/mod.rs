#![allow(dead_code)]

use pbs_core::{RealMatrix, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian<T: Scalar>(rng: &mut impl Rng, rows: usize, cols: usize) -> RealMatrix<T> {
    RealMatrix::from_fn(rows, cols, |_, _| T::lit(rng.sample::<f64, _>(StandardNormal)))
}

/// Q, K, V drawn in that order from one seeded stream.
pub fn qkv<T: Scalar>(seed: u64, n: usize, m: usize, d: usize) -> (RealMatrix<T>, RealMatrix<T>, RealMatrix<T>) {
    let mut r = rng(seed);
    let q = gaussian(&mut r, n, d);
    let k = gaussian(&mut r, m, d);
    let v = gaussian(&mut r, m, d);
    (q, k, v)
}

pub fn random_permutation(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut map: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        map.swap(i, j);
    }
    map
}

pub fn matrix_from_json<T: Scalar>(v: &serde_json::Value) -> RealMatrix<T> {
    let rows: Vec<Vec<f64>> = serde_json::from_value(v.clone()).unwrap();
    let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    RealMatrix::from_rows(&refs).unwrap()
}

pub fn golden() -> serde_json::Value {
    let text = include_str!("../data/golden.json");
    serde_json::from_str(text).unwrap()
}
