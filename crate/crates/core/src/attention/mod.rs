//! Exact, tiled and block-sparse attention.
//!
//! All three paths take the same inputs and agree up to floating point
//! reassociation. The tiled paths share a single kernel, so the
//! block-sparse path with every tile selected is bitwise identical to
//! [`attention_tiled`].

mod config;
mod kernels;
mod mask;
mod state;

pub use config::AttentionConfig;
pub use kernels::{attention_block_sparse, attention_oracle, attention_probabilities, attention_tiled};
pub use mask::ElementMask;
pub use state::OnlineSoftmaxState;
