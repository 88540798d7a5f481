use crate::amr::synth::unit_blocks_of;
use crate::amr::{AmrBox, AmrSkeleton};

/// Per-unit-block keep flags of one level. `kept[b]` lists the blocks of box
/// `b` in x-fastest block order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockMask {
    pub level: usize,
    pub grids: Vec<[usize; 3]>,
    pub kept: Vec<Vec<bool>>,
}

impl BlockMask {
    pub fn kept_blocks(&self) -> usize {
        self.kept.iter().flatten().filter(|&&k| k).count()
    }

    pub fn total_blocks(&self) -> usize {
        self.kept.iter().map(Vec::len).sum()
    }

    pub fn removed_blocks(&self) -> usize {
        self.total_blocks() - self.kept_blocks()
    }

    pub fn is_kept(&self, box_id: usize, block: usize) -> bool {
        self.kept[box_id][block]
    }
}

/// Marks every coarse unit block that is fully covered by the next-finer
/// level. Only box geometry is consulted, never values. Partially covered
/// blocks are always kept.
pub fn remove_redundancy(skel: &AmrSkeleton) -> Vec<BlockMask> {
    let u = skel.unit_block_size;
    skel.levels
        .iter()
        .enumerate()
        .map(|(li, level)| {
            let covers: Vec<AmrBox> = match skel.levels.get(li + 1) {
                Some(finer) => finer
                    .boxes
                    .iter()
                    .filter_map(|b| b.coarsen_inner(level.refinement_ratio))
                    .collect(),
                None => Vec::new(),
            };
            let mut grids = Vec::with_capacity(level.boxes.len());
            let mut kept = Vec::with_capacity(level.boxes.len());
            for bx in &level.boxes {
                grids.push(bx.shape().map(|s| s / u));
                let near: Vec<&AmrBox> = covers.iter().filter(|c| c.intersects(bx)).collect();
                kept.push(
                    unit_blocks_of(bx, u)
                        .iter()
                        .map(|blk| {
                            let covered: usize = near
                                .iter()
                                .filter_map(|c| c.intersect(blk))
                                .map(|x| x.volume())
                                .sum();
                            covered < blk.volume()
                        })
                        .collect(),
                );
            }
            BlockMask { level: li, grids, kept }
        })
        .collect()
}
