//! Compression-oriented pre-processing: redundancy removal, uniform
//! truncation into unit blocks, block arrangement, and the inverse path.

mod arrange;
mod mask;
mod refill;
mod truncate;

pub use arrange::{
    arrange, arrange_cluster, arrange_linear, cluster_grid, inverse_arrange, slot_origin, ArrangedBuffer,
    Arrangement,
};
pub use mask::{remove_redundancy, BlockMask};
pub use refill::refill_redundant;
pub use truncate::{gather_blocks, kept_block_refs, scatter_blocks, truncate, BlockRef, UnitBlocks};
