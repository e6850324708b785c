//! Block-level causal structure and mean-pooling block selection.

mod causal;
mod layout;
mod mask;
mod scores;
mod select;

pub use causal::{build_block_causal_mask, causal_block_density};
pub use layout::BlockLayout;
pub use mask::BlockMask;
pub use scores::{mean_pool_blocks, meanpool_block_scores, BlockScoreMatrix};
pub use select::{select_blocks, select_row, ForcedPolicy};
