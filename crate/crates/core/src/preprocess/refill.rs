use super::BlockMask;
use crate::amr::synth::unit_blocks_of;
use crate::amr::{AmrBox, AmrDataset};
use crate::error::{Error, Result};

/// Fills every removed coarse cell with the mean of the `ratio³` fine cells
/// covering it. Levels are processed finest-first so that refilled values
/// propagate downward through three-level hierarchies.
pub fn refill_redundant(ds: &mut AmrDataset, masks: &[BlockMask]) -> Result<()> {
    let u = ds.unit_block_size;
    for li in (0..ds.levels.len().saturating_sub(1)).rev() {
        let (coarse_part, fine_part) = ds.levels.split_at_mut(li + 1);
        let coarse = &mut coarse_part[li];
        let fine = &fine_part[0];
        let r = coarse.refinement_ratio as i64;
        let inv = 1.0 / (r * r * r) as f64;
        for (bi, bx) in coarse.boxes.iter().enumerate() {
            for (n, blk) in unit_blocks_of(bx, u).iter().enumerate() {
                if masks[li].kept[bi][n] {
                    continue;
                }
                let region = blk.refine(coarse.refinement_ratio);
                let near: Vec<(usize, &AmrBox)> = fine
                    .boxes
                    .iter()
                    .enumerate()
                    .filter(|(_, f)| f.intersects(&region))
                    .collect();
                for c in blk.cells() {
                    let dst = bx.offset_of(c);
                    let mut sums = vec![0.0; coarse.fields.len()];
                    for dz in 0..r {
                        for dy in 0..r {
                            for dx in 0..r {
                                let fc = [c[0] * r + dx, c[1] * r + dy, c[2] * r + dz];
                                let (fb, fbox) = near
                                    .iter()
                                    .find(|(_, f)| f.contains_cell(fc))
                                    .ok_or(Error::MissingCoverage { level: li, box_id: bi, cell: c })?;
                                let off = fbox.offset_of(fc);
                                for (f, s) in sums.iter_mut().enumerate() {
                                    *s += fine.fields[f][*fb][off];
                                }
                            }
                        }
                    }
                    for (f, s) in sums.into_iter().enumerate() {
                        coarse.fields[f][bi][dst] = s * inv;
                    }
                }
            }
        }
    }
    Ok(())
}
