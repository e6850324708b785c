//! Comparisons against reference values computed outside the crate
//! (see `data/gen_golden.py`).

mod common;

use common::{golden, matrix_from_json};
use pbs_core::attention::{attention_oracle, attention_tiled, AttentionConfig};
use pbs_core::permutation::estimate_key_importance;
use pbs_core::selection::{build_block_causal_mask, meanpool_block_scores, BlockLayout};
use pbs_core::{RealMatrix, Scalar};

fn check_oracle<T: Scalar>() {
    let g = &golden()["oracle_seed42"];
    let q = matrix_from_json::<T>(&g["q"]);
    let k = matrix_from_json::<T>(&g["k"]);
    let v = matrix_from_json::<T>(&g["v"]);
    for (causal, key) in [(false, "noncausal"), (true, "causal")] {
        let expect = matrix_from_json::<T>(&g[key]);
        let cfg = AttentionConfig::new(2, 2, causal).unwrap();
        let oracle = attention_oracle(&q, &k, &v, &cfg, None).unwrap();
        let tiled = attention_tiled(&q, &k, &v, &cfg, None).unwrap();
        assert!(
            oracle.max_abs_diff(&expect).unwrap() <= T::ATTN_TOLERANCE,
            "{key} oracle"
        );
        assert!(tiled.max_abs_diff(&expect).unwrap() <= T::ATTN_TOLERANCE, "{key} tiled");
    }
}

#[test]
fn seed42_oracle_matches_reference() {
    check_oracle::<f32>();
    check_oracle::<f64>();
}

#[test]
fn causal_first_row_is_first_value() {
    let g = &golden()["oracle_seed42"];
    let expect = matrix_from_json::<f64>(&g["causal"]);
    let v = matrix_from_json::<f64>(&g["v"]);
    assert_eq!(expect.row(0), v.row(0));
}

#[test]
fn importance_matches_reference() {
    let g = &golden()["importance_n8_b2"];
    let q = matrix_from_json::<f64>(&g["q"]);
    let k = matrix_from_json::<f64>(&g["k"]);
    let expect: Vec<f64> = serde_json::from_value(g["scores"].clone()).unwrap();
    let cfg = AttentionConfig::new(2, 2, true).unwrap();
    let s = estimate_key_importance(&q, &k, &cfg).unwrap();
    assert_eq!(s.source_query_block(), 3);
    for (a, e) in s.values().iter().zip(&expect) {
        assert!((a - e).abs() <= 1e-12, "{a} vs {e}");
    }
    let total: f64 = s.values().iter().sum();
    assert!((total - 1.0).abs() <= 1e-12);
}

fn check_pooled(name: &str) {
    let g = &golden()[name];
    let q = matrix_from_json::<f64>(&g["q"]);
    let k = matrix_from_json::<f64>(&g["k"]);
    let expect = matrix_from_json::<f64>(&g["scores"]);
    let segment = g["segment_size"].as_u64().unwrap_or(0) as usize;
    let layout = BlockLayout::new(2, segment).unwrap();
    let causal = build_block_causal_mask::<f64>(4, 4, layout).unwrap();
    let scores = meanpool_block_scores(&q, &k, layout, &causal).unwrap();
    assert!(scores.scores().max_abs_diff(&expect).unwrap() <= 1e-12, "{name}");
}

#[test]
fn pooled_scores_match_reference() {
    check_pooled("meanpool_n8_b2");
    check_pooled("meanpool_n8_b2_s4");
}

#[test]
fn pooled_scores_hide_future_blocks() {
    let g = &golden()["meanpool_n8_b2"];
    let expect: RealMatrix<f64> = matrix_from_json(&g["scores"]);
    for i in 0..4 {
        for j in i + 1..4 {
            assert_eq!(expect.get(i, j), 0.0);
        }
    }
    assert_eq!(expect.get(0, 0), 1.0);
}
