//! Permutation algebra and the two token-ordering strategies.

mod importance;
mod perm;
mod query;
mod segmented;

pub use importance::{build_key_permutation, estimate_key_importance, ImportanceScores};
pub use perm::Permutation;
pub use query::{assign_queries_to_centroids, build_query_permutation};
pub use segmented::SegmentedPermutation;
