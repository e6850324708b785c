//! Query equivariance, key/value pair invariance and their composition.

mod common;

use common::{gaussian, random_permutation, rng};
use pbs_core::attention::{attention_oracle, attention_tiled, AttentionConfig, ElementMask};
use pbs_core::permutation::{Permutation, SegmentedPermutation};
use pbs_core::{RealMatrix, Scalar};
use proptest::prelude::*;

struct Case<T: Scalar> {
    q: RealMatrix<T>,
    k: RealMatrix<T>,
    v: RealMatrix<T>,
    sigma: Permutation,
    pi: Permutation,
    cfg: AttentionConfig,
}

fn case<T: Scalar>(seed: u64, n: usize, m: usize, d: usize, causal: bool) -> Case<T> {
    let mut r = rng(seed);
    let q = gaussian(&mut r, n, d);
    let k = gaussian(&mut r, m, d);
    let v = gaussian(&mut r, m, d);
    let sigma = Permutation::new(random_permutation(&mut r, n)).unwrap();
    let pi = Permutation::new(random_permutation(&mut r, m)).unwrap();
    Case {
        q,
        k,
        v,
        sigma,
        pi,
        cfg: AttentionConfig::new(16, d, causal).unwrap(),
    }
}

/// Position mask that reproduces plain causality after the given gathers;
/// `None` when attention is unmasked.
fn positions(c: &Case<impl Scalar>, sigma: &Permutation, pi: &Permutation) -> Option<ElementMask> {
    c.cfg
        .causal
        .then(|| ElementMask::new(sigma.map().to_vec(), pi.map().to_vec()).unwrap())
}

fn query_equivariance<T: Scalar>(c: &Case<T>) -> f64 {
    let id = Permutation::identity(c.k.rows());
    let reference = attention_oracle(&c.q, &c.k, &c.v, &c.cfg, None).unwrap();
    let mask = positions(c, &c.sigma, &id);
    let out = attention_oracle(&c.sigma.apply_rows(&c.q).unwrap(), &c.k, &c.v, &c.cfg, mask.as_ref()).unwrap();
    out.max_abs_diff(&c.sigma.apply_rows(&reference).unwrap()).unwrap()
}

fn pair_invariance<T: Scalar>(c: &Case<T>) -> f64 {
    let id = Permutation::identity(c.q.rows());
    let reference = attention_oracle(&c.q, &c.k, &c.v, &c.cfg, None).unwrap();
    let mask = positions(c, &id, &c.pi);
    let kp = c.pi.apply_rows(&c.k).unwrap();
    let vp = c.pi.apply_rows(&c.v).unwrap();
    let out = attention_oracle(&c.q, &kp, &vp, &c.cfg, mask.as_ref()).unwrap();
    out.max_abs_diff(&reference).unwrap()
}

fn composition<T: Scalar>(c: &Case<T>) -> f64 {
    let reference = attention_oracle(&c.q, &c.k, &c.v, &c.cfg, None).unwrap();
    let mask = positions(c, &c.sigma, &c.pi);
    let qp = c.sigma.apply_rows(&c.q).unwrap();
    let kp = c.pi.apply_rows(&c.k).unwrap();
    let vp = c.pi.apply_rows(&c.v).unwrap();
    let out = attention_tiled(&qp, &kp, &vp, &c.cfg, mask.as_ref()).unwrap();
    let back = c.sigma.inverse().apply_rows(&out).unwrap();
    back.max_abs_diff(&reference).unwrap()
}

fn all_laws<T: Scalar>(seed: u64, n: usize, m: usize, d: usize, causal: bool) -> Result<(), TestCaseError> {
    let c = case::<T>(seed, n, m, d, causal);
    prop_assert!(query_equivariance(&c) <= T::ATTN_TOLERANCE);
    prop_assert!(pair_invariance(&c) <= T::ATTN_TOLERANCE);
    prop_assert!(composition(&c) <= T::ATTN_TOLERANCE);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn laws_hold(seed in any::<u64>(), n in 1usize..40, m in 1usize..40, d in 1usize..12, causal in any::<bool>()) {
        all_laws::<f32>(seed, n, m, d, causal)?;
        all_laws::<f64>(seed, n, m, d, causal)?;
    }

    #[test]
    fn inverse_round_trips(seed in any::<u64>(), n in 0usize..64) {
        let p = Permutation::new(random_permutation(&mut rng(seed), n)).unwrap();
        prop_assert!(p.then(&p.inverse()).unwrap().is_identity());
        prop_assert!(p.inverse().then(&p).unwrap().is_identity());
        let xs: Vec<usize> = (100..100 + n).collect();
        prop_assert_eq!(p.inverse().apply_slice(&p.apply_slice(&xs).unwrap()).unwrap(), xs);
    }

    #[test]
    fn segmented_stays_in_segment(seed in any::<u64>(), n in 0usize..80, s in 1usize..12) {
        let mut r = rng(seed);
        let groups = SegmentedPermutation::group_count(n, s);
        let locals = (0..groups).map(|_| Permutation::new(random_permutation(&mut r, s)).unwrap()).collect();
        let flat = SegmentedPermutation::new(s, locals, n).unwrap().flatten();
        for (new, &old) in flat.map().iter().enumerate() {
            if new < groups * s {
                prop_assert_eq!(new / s, old / s);
            } else {
                prop_assert_eq!(new, old);
            }
        }
    }
}

#[test]
fn identity_permutations_are_noops() {
    let c = case::<f64>(5, 12, 12, 4, true);
    let id = Permutation::identity(12);
    assert_eq!(id.apply_rows(&c.q).unwrap(), c.q);
    let mask = positions(&c, &id, &id).unwrap();
    let a = attention_oracle(&c.q, &c.k, &c.v, &c.cfg, Some(&mask)).unwrap();
    let b = attention_oracle(&c.q, &c.k, &c.v, &c.cfg, None).unwrap();
    assert_eq!(a, b);
}

#[test]
fn reversal_of_three() {
    let p = Permutation::new(vec![2, 1, 0]).unwrap();
    let m = RealMatrix::<f64>::from_rows(&[&[1.0], &[2.0], &[3.0]]).unwrap();
    assert_eq!(p.apply_rows(&m).unwrap().as_slice(), &[3.0, 2.0, 1.0]);
    assert_eq!(p.inverse(), p);
}

#[test]
fn rejects_non_permutations() {
    assert!(Permutation::new(vec![0, 0, 1]).is_err());
    assert!(Permutation::new(vec![0, 3]).is_err());
}
