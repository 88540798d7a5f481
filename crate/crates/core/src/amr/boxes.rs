use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer cell index in three dimensions.
pub type IVec3 = [i64; 3];

/// Half-open integer box `[lo, hi)` in cell indices of one level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AmrBox {
    pub lo: IVec3,
    pub hi: IVec3,
}

impl AmrBox {
    pub fn new(lo: IVec3, hi: IVec3) -> Result<Self> {
        if (0..3).any(|d| lo[d] >= hi[d]) {
            return Err(Error::Structural(format!(
                "empty box lo={lo:?} hi={hi:?}"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// Box spanning `[0, dims)`.
    pub fn from_dims(dims: [usize; 3]) -> Result<Self> {
        Self::new([0; 3], dims.map(|d| d as i64))
    }

    pub fn shape(&self) -> [usize; 3] {
        [0, 1, 2].map(|d| (self.hi[d] - self.lo[d]) as usize)
    }

    pub fn volume(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn contains_cell(&self, c: IVec3) -> bool {
        (0..3).all(|d| self.lo[d] <= c[d] && c[d] < self.hi[d])
    }

    pub fn contains_box(&self, other: &AmrBox) -> bool {
        (0..3).all(|d| self.lo[d] <= other.lo[d] && other.hi[d] <= self.hi[d])
    }

    /// Largest box contained in both, or `None` when the interiors are disjoint.
    pub fn intersect(&self, other: &AmrBox) -> Option<AmrBox> {
        let mut lo = [0; 3];
        let mut hi = [0; 3];
        for d in 0..3 {
            lo[d] = self.lo[d].max(other.lo[d]);
            hi[d] = self.hi[d].min(other.hi[d]);
            if lo[d] >= hi[d] {
                return None;
            }
        }
        Some(AmrBox { lo, hi })
    }

    pub fn intersects(&self, other: &AmrBox) -> bool {
        self.intersect(other).is_some()
    }

    /// Exact coarsening; both corners must be multiples of `ratio`.
    pub fn coarsen(&self, ratio: u32) -> Result<AmrBox> {
        if ratio < 2 {
            return Err(Error::Structural(format!("coarsening ratio {ratio} < 2")));
        }
        let r = ratio as i64;
        if (0..3).any(|d| self.lo[d].rem_euclid(r) != 0 || self.hi[d].rem_euclid(r) != 0) {
            return Err(Error::Structural(format!(
                "box {:?}..{:?} not divisible by ratio {ratio}",
                self.lo, self.hi
            )));
        }
        Ok(AmrBox {
            lo: self.lo.map(|v| v.div_euclid(r)),
            hi: self.hi.map(|v| v.div_euclid(r)),
        })
    }

    /// Coarse cells entirely covered by this box: `ceil(lo/r)..floor(hi/r)`.
    /// Unlike [`AmrBox::coarsen`] this accepts unaligned boxes.
    pub fn coarsen_inner(&self, ratio: u32) -> Option<AmrBox> {
        let r = ratio as i64;
        let lo = self.lo.map(|v| v.div_euclid(r) + i64::from(v.rem_euclid(r) != 0));
        let hi = self.hi.map(|v| v.div_euclid(r));
        if (0..3).any(|d| lo[d] >= hi[d]) {
            None
        } else {
            Some(AmrBox { lo, hi })
        }
    }

    pub fn refine(&self, ratio: u32) -> AmrBox {
        let r = ratio as i64;
        AmrBox {
            lo: self.lo.map(|v| v * r),
            hi: self.hi.map(|v| v * r),
        }
    }

    /// Row-major offset of a global cell inside this box (x fastest).
    pub fn offset_of(&self, c: IVec3) -> usize {
        let s = self.shape();
        let i = (c[0] - self.lo[0]) as usize;
        let j = (c[1] - self.lo[1]) as usize;
        let k = (c[2] - self.lo[2]) as usize;
        (k * s[1] + j) * s[0] + i
    }

    /// Every cell of the box in x-fastest order.
    pub fn cells(&self) -> impl Iterator<Item = IVec3> + '_ {
        let (lo, hi) = (self.lo, self.hi);
        (lo[2]..hi[2]).flat_map(move |k| {
            (lo[1]..hi[1]).flat_map(move |j| (lo[0]..hi[0]).map(move |i| [i, j, k]))
        })
    }
}
