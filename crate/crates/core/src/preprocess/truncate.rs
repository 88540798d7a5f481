use serde::{Deserialize, Serialize};

use super::BlockMask;
use crate::amr::{AmrDataset, AmrSkeleton};

/// Source position of one unit block: owning box and block coordinates
/// inside that box (in units of blocks).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockRef {
    pub box_id: usize,
    pub block: [usize; 3],
}

/// Dense copies of unit blocks, concatenated. Block `i` occupies
/// `values[i * U³ .. (i + 1) * U³]`, x-fastest inside the block.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitBlocks {
    pub unit: usize,
    pub values: Vec<f64>,
}

impl UnitBlocks {
    pub fn new(unit: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len() % unit.pow(3), 0);
        Self { unit, values }
    }

    pub fn block_len(&self) -> usize {
        self.unit.pow(3)
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.block_len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn block(&self, i: usize) -> &[f64] {
        let n = self.block_len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.block_len())
    }
}

/// Kept blocks of the listed boxes, in the given box order and x-fastest
/// block order within each box. Derived from geometry alone so both
/// endpoints agree without storing block coordinates.
pub fn kept_block_refs(
    masks: &[BlockMask],
    level: usize,
    boxes: impl IntoIterator<Item = usize>,
) -> Vec<BlockRef> {
    let mask = &masks[level];
    let mut out = Vec::new();
    for box_id in boxes {
        let g = mask.grids[box_id];
        let mut n = 0;
        for bk in 0..g[2] {
            for bj in 0..g[1] {
                for bi in 0..g[0] {
                    if mask.kept[box_id][n] {
                        out.push(BlockRef { box_id, block: [bi, bj, bk] });
                    }
                    n += 1;
                }
            }
        }
    }
    out
}

/// Copies the listed blocks of one field out of the dataset.
pub fn gather_blocks(ds: &AmrDataset, level: usize, field: usize, refs: &[BlockRef]) -> UnitBlocks {
    let u = ds.unit_block_size;
    let lvl = &ds.levels[level];
    let mut values = Vec::with_capacity(refs.len() * u * u * u);
    for r in refs {
        let s = lvl.boxes[r.box_id].shape();
        let arr = &lvl.fields[field][r.box_id];
        let [ox, oy, oz] = r.block.map(|b| b * u);
        for k in 0..u {
            for j in 0..u {
                let start = ((oz + k) * s[1] + oy + j) * s[0] + ox;
                values.extend_from_slice(&arr[start..start + u]);
            }
        }
    }
    UnitBlocks::new(u, values)
}

/// Writes blocks back into per-box arrays of one level and field.
pub fn scatter_blocks(
    skel: &AmrSkeleton,
    level: usize,
    refs: &[BlockRef],
    blocks: &UnitBlocks,
    target: &mut [Vec<f64>],
) {
    let u = skel.unit_block_size;
    let boxes = &skel.levels[level].boxes;
    for (r, blk) in refs.iter().zip(blocks.iter()) {
        let s = boxes[r.box_id].shape();
        let arr = &mut target[r.box_id];
        let [ox, oy, oz] = r.block.map(|b| b * u);
        for k in 0..u {
            for j in 0..u {
                let start = ((oz + k) * s[1] + oy + j) * s[0] + ox;
                let src = (k * u + j) * u;
                arr[start..start + u].copy_from_slice(&blk[src..src + u]);
            }
        }
    }
}

/// Uniform truncation of one (level, field): all boxes in dataset order,
/// removed blocks skipped.
pub fn truncate(ds: &AmrDataset, masks: &[BlockMask], level: usize, field: usize) -> (Vec<BlockRef>, UnitBlocks) {
    let refs = kept_block_refs(masks, level, 0..ds.levels[level].boxes.len());
    let blocks = gather_blocks(ds, level, field, &refs);
    (refs, blocks)
}
