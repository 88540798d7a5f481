//! Deterministic synthetic AMR datasets.
//!
//! Level 0 is a sum of low-frequency cosine modes over the whole domain
//! (`Smooth`), optionally multiplied by a lognormal factor built from
//! mid-frequency modes and white noise (`Rough`). A unit block is refined
//! when its maximum ranks in the top `1 - refine_threshold` fraction of all
//! block maxima of the level; the refined block becomes one fine box whose
//! values are a trilinear upsample of the parent plus small detail noise.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{AmrBox, AmrDataset, AmrLevel, IVec3};
use crate::error::{Error, Result};

const REFINEMENT_RATIO: u32 = 2;

const DEFAULT_FIELD_NAMES: [&str; 6] = [
    "baryon_density",
    "dark_matter_density",
    "temperature",
    "velocity_x",
    "velocity_y",
    "velocity_z",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Smooth,
    Rough,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub preset: Preset,
    pub dims: [usize; 3],
    pub levels: usize,
    pub unit_block_size: usize,
    /// Fraction of unit blocks left unrefined on each level, in `[0, 1]`.
    pub refine_threshold: f64,
    pub seed: u64,
    /// Edge length of the level-0 tiles; rounded up to a multiple of the unit block size.
    pub max_grid_size: usize,
    pub field_count: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            preset: Preset::Smooth,
            dims: [64, 64, 64],
            levels: 2,
            unit_block_size: 8,
            refine_threshold: 0.95,
            seed: 0,
            max_grid_size: 32,
            field_count: 1,
        }
    }
}

pub fn default_field_name(i: usize) -> String {
    DEFAULT_FIELD_NAMES
        .get(i)
        .map(|s| s.to_string())
        .unwrap_or_else(|| format!("field_{i}"))
}

struct Mode {
    k: [f64; 3],
    amp: f64,
    phase: f64,
}

fn random_modes(rng: &mut ChaCha8Rng, count: usize, kmin: i32, kmax: i32) -> Vec<Mode> {
    (0..count)
        .map(|_| loop {
            let k = [0; 3].map(|_: i32| rng.random_range(-kmax..=kmax) as f64);
            let norm = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
            if norm >= kmin as f64 && norm <= kmax as f64 {
                break Mode {
                    k,
                    amp: rng.random_range(0.5..1.0) / norm,
                    phase: rng.random_range(0.0..TAU),
                };
            }
        })
        .collect()
}

fn eval_modes(modes: &[Mode], dims: [usize; 3], c: [usize; 3]) -> f64 {
    let x = [0, 1, 2].map(|d| (c[d] as f64 + 0.5) / dims[d] as f64);
    modes
        .iter()
        .map(|m| m.amp * (TAU * (m.k[0] * x[0] + m.k[1] * x[1] + m.k[2] * x[2]) + m.phase).cos())
        .sum()
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard normal sample addressed by a key, so fine-level noise can be
/// evaluated lazily at any cell.
fn hash_normal(key: u64) -> f64 {
    let a = splitmix64(key);
    let b = splitmix64(a);
    let u1 = ((a >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
    let u2 = (b >> 11) as f64 / (1u64 << 53) as f64;
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

fn cell_key(seed: u64, level: usize, field: usize, c: IVec3) -> u64 {
    let mut h = splitmix64(seed ^ 0x5151_0000_0000_0000);
    for v in [level as i64, field as i64, c[0], c[1], c[2]] {
        h = splitmix64(h ^ v as u64);
    }
    h
}

/// Lazily evaluated per-level field: level 0 is a dense array over the
/// domain, finer levels upsample their parent.
struct FieldModel {
    dims0: [usize; 3],
    base: Vec<f64>,
    detail_amp: f64,
    seed: u64,
    field: usize,
}

impl FieldModel {
    fn value(&self, level: usize, c: IVec3) -> f64 {
        if level == 0 {
            let d = self.dims0;
            let clamp = |v: i64, n: usize| v.clamp(0, n as i64 - 1) as usize;
            let (i, j, k) = (clamp(c[0], d[0]), clamp(c[1], d[1]), clamp(c[2], d[2]));
            return self.base[(k * d[1] + j) * d[0] + i];
        }
        let r = REFINEMENT_RATIO as f64;
        let mut lo = [0i64; 3];
        let mut t = [0f64; 3];
        for d in 0..3 {
            let p = (c[d] as f64 + 0.5) / r - 0.5;
            let f = p.floor();
            lo[d] = f as i64;
            t[d] = p - f;
        }
        let mut acc = 0.0;
        for corner in 0..8 {
            let mut w = 1.0;
            let mut q = lo;
            for d in 0..3 {
                if corner >> d & 1 == 1 {
                    q[d] += 1;
                    w *= t[d];
                } else {
                    w *= 1.0 - t[d];
                }
            }
            if w != 0.0 {
                acc += w * self.value(level - 1, q);
            }
        }
        acc + self.detail_amp * hash_normal(cell_key(self.seed, level, self.field, c))
    }
}

fn build_field(spec: &SyntheticSpec, field: usize) -> FieldModel {
    let dims = spec.dims;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_mul(1000).wrapping_add(field as u64));
    let low = random_modes(&mut rng, 8, 1, 3);
    let norm: f64 = low.iter().map(|m| m.amp).sum();
    let n = dims.iter().product::<usize>();
    let mut base = Vec::with_capacity(n);
    for k in 0..dims[2] {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                base.push(2.0 + eval_modes(&low, dims, [i, j, k]) / norm);
            }
        }
    }
    if spec.preset == Preset::Rough {
        let mid = random_modes(&mut rng, 24, 3, 10);
        let mid_norm = (mid.iter().map(|m| m.amp * m.amp).sum::<f64>() / 2.0).sqrt();
        let mut idx = 0;
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let g_mid = eval_modes(&mid, dims, [i, j, k]) / mid_norm;
                    let g_white: f64 = rng.sample(StandardNormal);
                    base[idx] *= (0.45 * g_mid + 0.15 * g_white).exp();
                    idx += 1;
                }
            }
        }
    }
    let (lo, hi) = base
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let rel = match spec.preset {
        Preset::Smooth => 2e-4,
        Preset::Rough => 5e-3,
    };
    FieldModel {
        dims0: dims,
        base,
        detail_amp: rel * (hi - lo),
        seed: spec.seed,
        field,
    }
}

fn tile_domain(dims: [usize; 3], tile: usize) -> Vec<AmrBox> {
    let mut boxes = Vec::new();
    let mut k = 0;
    while k < dims[2] {
        let mut j = 0;
        while j < dims[1] {
            let mut i = 0;
            while i < dims[0] {
                let lo = [i, j, k].map(|v| v as i64);
                let hi = [
                    (i + tile).min(dims[0]) as i64,
                    (j + tile).min(dims[1]) as i64,
                    (k + tile).min(dims[2]) as i64,
                ];
                boxes.push(AmrBox { lo, hi });
                i += tile;
            }
            j += tile;
        }
        k += tile;
    }
    boxes
}

/// Unit blocks of a box, x-fastest, in global cell coordinates.
pub(crate) fn unit_blocks_of(bx: &AmrBox, u: usize) -> Vec<AmrBox> {
    let s = bx.shape();
    let u64_ = u as i64;
    let mut out = Vec::with_capacity(s.iter().map(|v| v / u).product());
    for bk in 0..s[2] / u {
        for bj in 0..s[1] / u {
            for bi in 0..s[0] / u {
                let lo = [
                    bx.lo[0] + bi as i64 * u64_,
                    bx.lo[1] + bj as i64 * u64_,
                    bx.lo[2] + bk as i64 * u64_,
                ];
                out.push(AmrBox { lo, hi: lo.map(|v| v + u64_) });
            }
        }
    }
    out
}

/// Number of blocks refined for `n` candidates at threshold `t`.
pub fn refined_block_count(n: usize, t: f64) -> usize {
    (((1.0 - t) * n as f64) + 0.5).floor().clamp(0.0, n as f64) as usize
}

fn fill_level(models: &[FieldModel], level: usize, boxes: &[AmrBox]) -> Vec<Vec<Vec<f64>>> {
    models
        .iter()
        .map(|m| {
            boxes
                .iter()
                .map(|b| b.cells().map(|c| m.value(level, c)).collect())
                .collect()
        })
        .collect()
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<AmrDataset> {
    let u = spec.unit_block_size;
    if u == 0 || !u.is_power_of_two() {
        return Err(Error::Config(format!("unit block size {u} is not a power of two")));
    }
    if spec.dims.iter().any(|&d| d == 0 || d % u != 0) {
        return Err(Error::Structural(format!(
            "dims {:?} are not divisible by unit block size {u}",
            spec.dims
        )));
    }
    if !(1..=3).contains(&spec.levels) {
        return Err(Error::Config(format!("levels must be 1..=3, got {}", spec.levels)));
    }
    if !(0.0..=1.0).contains(&spec.refine_threshold) {
        return Err(Error::Config(format!(
            "refine threshold {} outside [0, 1]",
            spec.refine_threshold
        )));
    }
    if spec.field_count == 0 {
        return Err(Error::Config("field count must be positive".into()));
    }

    let models: Vec<FieldModel> = (0..spec.field_count).map(|f| build_field(spec, f)).collect();
    let tile = spec.max_grid_size.max(u).div_ceil(u) * u;
    let domain = AmrBox::from_dims(spec.dims)?;

    let mut boxes = tile_domain(spec.dims, tile);
    let mut levels = Vec::with_capacity(spec.levels);
    for li in 0..spec.levels {
        let fields = fill_level(&models, li, &boxes);
        let next = if li + 1 < spec.levels {
            select_refined(&boxes, &fields[0], u, spec.refine_threshold)
        } else {
            Vec::new()
        };
        levels.push(AmrLevel {
            index: li,
            boxes: std::mem::take(&mut boxes),
            refinement_ratio: REFINEMENT_RATIO,
            fields,
        });
        if next.is_empty() {
            break;
        }
        boxes = next.iter().map(|b| b.refine(REFINEMENT_RATIO)).collect();
    }

    let ds = AmrDataset {
        levels,
        domain,
        unit_block_size: u,
        field_names: (0..spec.field_count).map(default_field_name).collect(),
    };
    debug_assert!(ds.validate().is_ok());
    Ok(ds)
}

/// Unit blocks (in the level's coordinates) selected for refinement, sorted z-major.
fn select_refined(boxes: &[AmrBox], data: &[Vec<f64>], u: usize, threshold: f64) -> Vec<AmrBox> {
    let mut scored: Vec<(f64, AmrBox)> = Vec::new();
    for (bx, arr) in boxes.iter().zip(data) {
        for blk in unit_blocks_of(bx, u) {
            let max = blk
                .cells()
                .map(|c| arr[bx.offset_of(c)])
                .fold(f64::NEG_INFINITY, f64::max);
            scored.push((max, blk));
        }
    }
    let take = refined_block_count(scored.len(), threshold);
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut chosen: Vec<AmrBox> = scored.into_iter().take(take).map(|(_, b)| b).collect();
    chosen.sort_by_key(|b| (b.lo[2], b.lo[1], b.lo[0]));
    chosen
}
