//! Patch-based AMR hierarchy: levels of disjoint integer boxes, each box
//! holding one dense array per field.

mod boxes;
pub mod io;
pub mod synth;

use serde::{Deserialize, Serialize};

pub use boxes::{AmrBox, IVec3};

use crate::error::{Error, Result};

/// One refinement level. `fields[f][b]` is the array of field `f` on box `b`,
/// row-major with x fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct AmrLevel {
    pub index: usize,
    pub boxes: Vec<AmrBox>,
    /// Ratio to the next-finer level.
    pub refinement_ratio: u32,
    pub fields: Vec<Vec<Vec<f64>>>,
}

impl AmrLevel {
    pub fn geometry(&self) -> LevelGeometry {
        LevelGeometry {
            boxes: self.boxes.clone(),
            refinement_ratio: self.refinement_ratio,
        }
    }

    pub fn cell_count(&self) -> usize {
        self.boxes.iter().map(AmrBox::volume).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmrDataset {
    pub levels: Vec<AmrLevel>,
    pub domain: AmrBox,
    pub unit_block_size: usize,
    pub field_names: Vec<String>,
}

/// Box structure of one level without any values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelGeometry {
    pub boxes: Vec<AmrBox>,
    pub refinement_ratio: u32,
}

/// Everything about a dataset except its values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmrSkeleton {
    pub domain: AmrBox,
    pub unit_block_size: usize,
    pub field_names: Vec<String>,
    pub levels: Vec<LevelGeometry>,
}

impl AmrSkeleton {
    /// Domain of `level` in that level's cell indices.
    pub fn level_domain(&self, level: usize) -> AmrBox {
        let ratio: u32 = self.levels[..level].iter().map(|l| l.refinement_ratio).product();
        self.domain.refine(ratio.max(1))
    }

    /// Checks every geometric invariant; `field_count` is not inspected here.
    pub fn validate(&self) -> Result<()> {
        let u = self.unit_block_size;
        if u == 0 || !u.is_power_of_two() {
            return Err(Error::Invariant(format!("unit block size {u} is not a power of two")));
        }
        if self.levels.is_empty() {
            return Err(Error::Invariant("dataset has no levels".into()));
        }
        if self.field_names.is_empty() {
            return Err(Error::Invariant("dataset has no fields".into()));
        }
        for (li, level) in self.levels.iter().enumerate() {
            if li + 1 < self.levels.len() && level.refinement_ratio < 2 {
                return Err(Error::Invariant(format!(
                    "level {li} has refinement ratio {}",
                    level.refinement_ratio
                )));
            }
            let dom = self.level_domain(li);
            for (bi, bx) in level.boxes.iter().enumerate() {
                if !dom.contains_box(bx) {
                    return Err(Error::Invariant(format!(
                        "level {li} box {bi} {bx:?} lies outside the level domain {dom:?}"
                    )));
                }
                if bx.shape().iter().any(|&s| s % u != 0) {
                    return Err(Error::Invariant(format!(
                        "level {li} box {bi} shape {:?} is not a multiple of unit block size {u}",
                        bx.shape()
                    )));
                }
                for (bj, other) in level.boxes.iter().enumerate().skip(bi + 1) {
                    if bx.intersects(other) {
                        return Err(Error::Invariant(format!(
                            "level {li} boxes {bi} and {bj} overlap"
                        )));
                    }
                }
            }
            if li > 0 {
                let parent = &self.levels[li - 1];
                for (bi, bx) in level.boxes.iter().enumerate() {
                    let coarse = bx.coarsen(parent.refinement_ratio).map_err(|_| {
                        Error::Invariant(format!(
                            "level {li} box {bi} is not aligned to refinement ratio {}",
                            parent.refinement_ratio
                        ))
                    })?;
                    let covered: usize = parent
                        .boxes
                        .iter()
                        .filter_map(|p| p.intersect(&coarse))
                        .map(|x| x.volume())
                        .sum();
                    if covered != coarse.volume() {
                        return Err(Error::Invariant(format!(
                            "level {li} box {bi} is not nested inside level {}",
                            li - 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

impl AmrDataset {
    pub fn skeleton(&self) -> AmrSkeleton {
        AmrSkeleton {
            domain: self.domain,
            unit_block_size: self.unit_block_size,
            field_names: self.field_names.clone(),
            levels: self.levels.iter().map(AmrLevel::geometry).collect(),
        }
    }

    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.field_names.iter().position(|f| f == name)
    }

    pub fn validate(&self) -> Result<()> {
        self.skeleton().validate()?;
        for (li, level) in self.levels.iter().enumerate() {
            if level.index != li {
                return Err(Error::Invariant(format!(
                    "level at position {li} carries index {}",
                    level.index
                )));
            }
            if level.fields.len() != self.field_names.len() {
                return Err(Error::Invariant(format!(
                    "level {li} has {} fields, dataset declares {}",
                    level.fields.len(),
                    self.field_names.len()
                )));
            }
            for per_box in &level.fields {
                if per_box.len() != level.boxes.len() {
                    return Err(Error::Invariant(format!(
                        "level {li} has {} boxes but {} arrays",
                        level.boxes.len(),
                        per_box.len()
                    )));
                }
                for (bi, (bx, arr)) in level.boxes.iter().zip(per_box).enumerate() {
                    if arr.len() != bx.volume() {
                        return Err(Error::SizeMismatch {
                            level: li,
                            box_id: bi,
                            expected: bx.volume(),
                            found: arr.len(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Total number of scalar values over all levels and fields.
    pub fn value_count(&self) -> usize {
        self.levels.iter().map(|l| l.cell_count()).sum::<usize>() * self.field_names.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_level() -> AmrDataset {
        let coarse = AmrBox::from_dims([8, 8, 8]).unwrap();
        let fine = AmrBox::new([0; 3], [8; 3]).unwrap();
        AmrDataset {
            levels: vec![
                AmrLevel { index: 0, boxes: vec![coarse], refinement_ratio: 2, fields: vec![vec![vec![0.0; 512]]] },
                AmrLevel { index: 1, boxes: vec![fine], refinement_ratio: 2, fields: vec![vec![vec![1.0; 512]]] },
            ],
            domain: coarse,
            unit_block_size: 4,
            field_names: vec!["rho".into()],
        }
    }

    #[test]
    fn valid_dataset_passes() {
        two_level().validate().unwrap();
    }

    #[test]
    fn overlapping_boxes_named() {
        let mut ds = two_level();
        ds.levels[0].boxes = vec![
            AmrBox::new([0; 3], [4, 8, 8]).unwrap(),
            AmrBox::new([0; 3], [8, 4, 8]).unwrap(),
        ];
        ds.levels[0].fields = vec![vec![vec![0.0; 256], vec![0.0; 256]]];
        let err = ds.validate().unwrap_err().to_string();
        assert!(err.contains("boxes 0 and 1 overlap"), "{err}");
    }

    #[test]
    fn size_mismatch_reported() {
        let mut ds = two_level();
        ds.levels[1].fields[0][0].pop();
        assert!(matches!(
            ds.validate(),
            Err(Error::SizeMismatch { level: 1, box_id: 0, expected: 512, found: 511 })
        ));
    }

    #[test]
    fn unnested_fine_box_rejected() {
        let mut ds = two_level();
        ds.levels[0].boxes = vec![AmrBox::new([0; 3], [8, 8, 4]).unwrap(), AmrBox::new([0, 0, 4], [4, 4, 8]).unwrap()];
        ds.levels[0].fields = vec![vec![vec![0.0; 256], vec![0.0; 64]]];
        ds.levels[1].boxes = vec![AmrBox::new([8, 8, 8], [16, 16, 16]).unwrap()];
        assert!(ds.validate().is_err());
    }

    #[test]
    fn level_domain_scales() {
        let sk = two_level().skeleton();
        assert_eq!(sk.level_domain(1), AmrBox::from_dims([16; 3]).unwrap());
    }
}
