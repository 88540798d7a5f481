//! Simulated multi-rank write: round-robin box ownership, rank-parallel
//! chunk compression, and a start-up cost model for filter invocations.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::amr::{AmrDataset, AmrSkeleton};
use crate::container::{container_write, WriteOutput};
use crate::error::{Error, Result};
use crate::sz::{Algorithm, CompressorConfig};

/// Box ownership: `assignment[level][box]` is the owning rank.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankPlan {
    pub ranks: usize,
    pub assignment: Vec<Vec<usize>>,
}

impl RankPlan {
    /// Box `b` of every level goes to rank `b mod R`.
    pub fn round_robin(skel: &AmrSkeleton, ranks: usize) -> Result<Self> {
        if ranks == 0 {
            return Err(Error::Config("rank count must be at least 1".into()));
        }
        let assignment = skel
            .levels
            .iter()
            .map(|l| (0..l.boxes.len()).map(|b| b % ranks).collect())
            .collect();
        Ok(Self { ranks, assignment })
    }

    pub fn boxes_of(&self, level: usize, rank: usize) -> Vec<usize> {
        self.assignment[level]
            .iter()
            .enumerate()
            .filter(|&(_, &r)| r == rank)
            .map(|(b, _)| b)
            .collect()
    }

    pub fn validate(&self, skel: &AmrSkeleton) -> Result<()> {
        if self.ranks == 0 || self.assignment.len() != skel.levels.len() {
            return Err(Error::Config("rank plan does not match the dataset levels".into()));
        }
        for (l, (a, g)) in self.assignment.iter().zip(&skel.levels).enumerate() {
            if a.len() != g.boxes.len() || a.iter().any(|&r| r >= self.ranks) {
                return Err(Error::Config(format!("rank plan for level {l} is inconsistent")));
            }
        }
        Ok(())
    }

    /// Cells owned by each rank over all levels.
    pub fn cell_counts(&self, skel: &AmrSkeleton) -> Vec<usize> {
        let mut out = vec![0; self.ranks];
        for (a, g) in self.assignment.iter().zip(&skel.levels) {
            for (&r, bx) in a.iter().zip(&g.boxes) {
                out[r] += bx.volume();
            }
        }
        out
    }

    /// max/min of per-rank cell counts; infinite when a rank owns nothing.
    pub fn imbalance(&self, skel: &AmrSkeleton) -> f64 {
        let c = self.cell_counts(skel);
        let max = c.iter().copied().max().unwrap_or(0);
        let min = c.iter().copied().min().unwrap_or(0);
        if min == 0 {
            f64::INFINITY
        } else {
            max as f64 / min as f64
        }
    }
}

pub fn partition(ds: &AmrDataset, ranks: usize) -> Result<RankPlan> {
    RankPlan::round_robin(&ds.skeleton(), ranks)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub rank: usize,
    pub raw_bytes: u64,
    pub compressed_bytes: u64,
    pub invocations: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WriteReport {
    pub ranks: Vec<RankReport>,
    /// `[level][field]` global chunk size in elements.
    pub chunk_elements: Vec<Vec<usize>>,
    pub padding_elements: u64,
    pub invocations: u64,
    pub t_start: f64,
    pub modeled_startup_seconds: f64,
    pub payload_bytes: u64,
    pub file_bytes: u64,
    pub raw_kept_bytes: u64,
    pub compression_ratio: f64,
    pub imbalance: f64,
    pub wall_seconds: f64,
}

impl WriteReport {
    pub fn invocations_per_rank(&self) -> Vec<u64> {
        self.ranks.iter().map(|r| r.invocations).collect()
    }
}

/// Filter invocations for one chunk: one for the grouped layout, one per
/// `baseline_chunk` elements for the 1D baseline.
pub fn invocations_for(algorithm: Algorithm, actual: usize, baseline_chunk: usize) -> u64 {
    match algorithm {
        Algorithm::Baseline1d => actual.div_ceil(baseline_chunk) as u64,
        _ => 1,
    }
}

/// Modeled start-up cost saved by going from `before` to `after` invocations.
pub fn modeled_saving(before: u64, after: u64, t_start: f64) -> f64 {
    (before as f64 - after as f64) * t_start
}

pub fn run_simulated_write(
    ds: &AmrDataset,
    cfg: &CompressorConfig,
    ranks: usize,
    t_start: f64,
    baseline_chunk: usize,
) -> Result<(WriteOutput, WriteReport)> {
    let start = Instant::now();
    let plan = partition(ds, ranks)?;
    let out = container_write(ds, cfg, &plan, baseline_chunk)?;
    let wall_seconds = start.elapsed().as_secs_f64();
    let report = build_report(&out, cfg, &plan, ds, t_start, baseline_chunk, wall_seconds);
    Ok((out, report))
}

fn build_report(
    out: &WriteOutput,
    cfg: &CompressorConfig,
    plan: &RankPlan,
    ds: &AmrDataset,
    t_start: f64,
    baseline_chunk: usize,
    wall_seconds: f64,
) -> WriteReport {
    let mut ranks: Vec<RankReport> = (0..plan.ranks)
        .map(|rank| RankReport {
            rank,
            raw_bytes: 0,
            compressed_bytes: 0,
            invocations: 0,
        })
        .collect();
    let mut padding = 0u64;
    for rec in &out.records {
        let r = &mut ranks[rec.rank as usize];
        r.raw_bytes += rec.actual_elements * 8;
        r.compressed_bytes += rec.compressed_len;
        r.invocations += invocations_for(cfg.algorithm, rec.actual_elements as usize, baseline_chunk);
        padding += out.header.chunk_elements[rec.level as usize][rec.field as usize] as u64 - rec.actual_elements;
    }
    let invocations = ranks.iter().map(|r| r.invocations).sum();
    let payload_bytes = out.records.iter().map(|r| r.compressed_len).sum();
    let raw_kept_bytes = ranks.iter().map(|r| r.raw_bytes).sum::<u64>();
    WriteReport {
        chunk_elements: out.header.chunk_elements.clone(),
        padding_elements: padding,
        invocations,
        t_start,
        modeled_startup_seconds: invocations as f64 * t_start,
        payload_bytes,
        file_bytes: out.bytes.len() as u64,
        raw_kept_bytes,
        compression_ratio: raw_kept_bytes as f64 / out.bytes.len() as f64,
        imbalance: plan.imbalance(&ds.skeleton()),
        wall_seconds,
        ranks,
    }
}
