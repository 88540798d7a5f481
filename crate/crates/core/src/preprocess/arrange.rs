use serde::{Deserialize, Serialize};

use super::UnitBlocks;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arrangement {
    /// Blocks stacked along z.
    Linear,
    /// Blocks packed into a near-cubic grid.
    Cluster,
}

impl Arrangement {
    pub fn name(self) -> &'static str {
        match self {
            Arrangement::Linear => "linear",
            Arrangement::Cluster => "cluster",
        }
    }
}

/// Unit blocks packed into one 3D volume. Slot `s` of the block grid holds
/// block `s` for `s < block_count`; trailing slots repeat the last block.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrangedBuffer {
    pub data: Vec<f64>,
    /// Volume extent (x, y, z).
    pub shape: [usize; 3],
    pub unit: usize,
    pub block_count: usize,
    pub pad_blocks: usize,
    pub arrangement: Arrangement,
}

impl ArrangedBuffer {
    /// Grid extent in blocks.
    pub fn grid(&self) -> [usize; 3] {
        self.shape.map(|s| s / self.unit)
    }
}

/// Smallest `g` with `g³ >= n`.
fn ceil_cbrt(n: usize) -> usize {
    let mut g = (n as f64).cbrt().round() as usize;
    while g * g * g < n {
        g += 1;
    }
    while g > 1 && (g - 1).pow(3) >= n {
        g -= 1;
    }
    g.max(1)
}

/// Block grid `[gx, gy, gz]` used by the cluster arrangement:
/// `gz = ⌈n^(1/3)⌉`, `gy = ⌈√(n/gz)⌉`, `gx = ⌈n/(gz·gy)⌉`.
pub fn cluster_grid(n: usize) -> [usize; 3] {
    let gz = ceil_cbrt(n);
    let mut gy = ((n as f64 / gz as f64).sqrt().round() as usize).max(1);
    while gy * gy * gz < n {
        gy += 1;
    }
    while gy > 1 && (gy - 1) * (gy - 1) * gz >= n {
        gy -= 1;
    }
    let gx = n.div_ceil(gz * gy);
    [gx, gy, gz]
}

fn place(blocks: &UnitBlocks, grid: [usize; 3], arrangement: Arrangement) -> ArrangedBuffer {
    let u = blocks.unit;
    let n = blocks.len();
    let shape = grid.map(|g| g * u);
    let slots = grid.iter().product::<usize>();
    let mut data = vec![0.0; shape.iter().product()];
    for s in 0..slots {
        let src = blocks.block(s.min(n - 1));
        let [ox, oy, oz] = slot_origin(s, grid, u);
        for k in 0..u {
            for j in 0..u {
                let dst = ((oz + k) * shape[1] + oy + j) * shape[0] + ox;
                let at = (k * u + j) * u;
                data[dst..dst + u].copy_from_slice(&src[at..at + u]);
            }
        }
    }
    ArrangedBuffer {
        data,
        shape,
        unit: u,
        block_count: n,
        pad_blocks: slots - n,
        arrangement,
    }
}

/// Cell origin of block slot `s` in a grid, slots in x-fastest order.
pub fn slot_origin(s: usize, grid: [usize; 3], u: usize) -> [usize; 3] {
    [s % grid[0], (s / grid[0]) % grid[1], s / (grid[0] * grid[1])].map(|v| v * u)
}

pub fn arrange_linear(blocks: &UnitBlocks) -> Result<ArrangedBuffer> {
    if blocks.is_empty() {
        return Err(Error::Config("cannot arrange an empty block list".into()));
    }
    Ok(place(blocks, [1, 1, blocks.len()], Arrangement::Linear))
}

pub fn arrange_cluster(blocks: &UnitBlocks) -> Result<ArrangedBuffer> {
    if blocks.is_empty() {
        return Err(Error::Config("cannot arrange an empty block list".into()));
    }
    Ok(place(blocks, cluster_grid(blocks.len()), Arrangement::Cluster))
}

pub fn arrange(blocks: &UnitBlocks, arrangement: Arrangement) -> Result<ArrangedBuffer> {
    match arrangement {
        Arrangement::Linear => arrange_linear(blocks),
        Arrangement::Cluster => arrange_cluster(blocks),
    }
}

/// Reads the first `block_count` slots back out; padding is dropped.
pub fn inverse_arrange(buf: &ArrangedBuffer) -> Result<UnitBlocks> {
    let u = buf.unit;
    let grid = buf.grid();
    let slots = grid.iter().product::<usize>();
    if u == 0
        || buf.shape.iter().any(|s| s % u != 0)
        || buf.block_count == 0
        || buf.block_count > slots
        || buf.data.len() != buf.shape.iter().product::<usize>()
    {
        return Err(Error::Config(format!(
            "inconsistent arranged buffer: shape {:?}, unit {u}, {} blocks, {} values",
            buf.shape,
            buf.block_count,
            buf.data.len()
        )));
    }
    let shape = buf.shape;
    let mut values = Vec::with_capacity(buf.block_count * u * u * u);
    for s in 0..buf.block_count {
        let [ox, oy, oz] = slot_origin(s, grid, u);
        for k in 0..u {
            for j in 0..u {
                let src = ((oz + k) * shape[1] + oy + j) * shape[0] + ox;
                values.extend_from_slice(&buf.data[src..src + u]);
            }
        }
    }
    Ok(UnitBlocks::new(u, values))
}
