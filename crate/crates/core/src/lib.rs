//! Reference engine for permuted block-sparse attention.
//!
//! The crate is generic over the element type through [`Scalar`]
//! (`f32` or `f64`); the aliases below fix the common instantiations.
//!
//! - [`tensor`]: dense matrices, softmax and the `PBST` file format
//! - [`attention`]: exact, tiled and block-sparse attention
//! - [`permutation`]: permutations, segmented permutations and the
//!   key/query ordering strategies
//! - [`selection`]: block causal masks and mean-pooling block selection
//! - [`pipeline`]: the full permute → select → sparse attention → unpermute
//!   pass plus density and coverage metrics

pub mod attention;
pub mod error;
pub mod permutation;
pub mod pipeline;
pub mod scalar;
pub mod selection;
pub mod tensor;

pub use error::{Error, Result};
pub use scalar::{DType, Scalar};
pub use tensor::{RealMatrix, Tensor};

pub type Matrix32 = RealMatrix<f32>;
pub type Matrix64 = RealMatrix<f64>;
pub type Tensor32 = Tensor<f32>;
pub type Tensor64 = Tensor<f64>;
pub type OnlineSoftmaxState32 = attention::OnlineSoftmaxState<f32>;
pub type OnlineSoftmaxState64 = attention::OnlineSoftmaxState<f64>;
pub type PipelineRun32 = pipeline::PipelineRun<f32>;
pub type PipelineRun64 = pipeline::PipelineRun<f64>;
