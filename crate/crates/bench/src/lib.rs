//! Shared inputs for the benchmarks.

use amrpress_core::amr::synth::{generate_synthetic, Preset, SyntheticSpec};
use amrpress_core::amr::AmrDataset;
use amrpress_core::preprocess::{remove_redundancy, truncate, UnitBlocks};

pub fn dataset(preset: Preset, n: usize, unit: usize) -> AmrDataset {
    generate_synthetic(&SyntheticSpec {
        preset,
        dims: [n, n, n],
        levels: 2,
        unit_block_size: unit,
        refine_threshold: 0.9,
        seed: 0,
        max_grid_size: 32,
        field_count: 1,
    })
    .expect("benchmark dataset")
}

/// Kept unit blocks of level 0, field 0.
pub fn coarse_blocks(ds: &AmrDataset) -> UnitBlocks {
    let masks = remove_redundancy(&ds.skeleton());
    truncate(ds, &masks, 0, 0).1
}
