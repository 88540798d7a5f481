//! Chunked container file.
//!
//! Layout (little-endian): magic `AMRC`, u16 version, u64 header length, a
//! JSON header, a chunk table of 32-byte records (offset u64, length u64,
//! actual elements u64, rank u32, level u16, field u16), then the payloads in
//! table order. Offsets are absolute. There is one chunk per
//! (level, field, rank), committed in that order.

mod filter;
mod layout;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use filter::{filter_apply, filter_inverse, FilterInfo};
pub use layout::{group_order, layout_group_fields, select_chunk_elements};

use crate::amr::{AmrDataset, AmrLevel, AmrSkeleton};
use crate::error::{Error, Result};
use crate::harness::RankPlan;
use crate::preprocess::{gather_blocks, kept_block_refs, refill_redundant, remove_redundancy, scatter_blocks, BlockMask, UnitBlocks};
use crate::sz::bits::{ByteReader, ByteWriter};
use crate::sz::{Algorithm, CompressorConfig};

pub const MAGIC: &[u8; 4] = b"AMRC";
pub const VERSION: u16 = 1;
const RECORD_LEN: usize = 32;
const PREFIX_LEN: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChunkRecord {
    pub offset: u64,
    pub compressed_len: u64,
    pub actual_elements: u64,
    pub rank: u32,
    pub level: u16,
    pub field: u16,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkMeta {
    pub level: usize,
    pub field: usize,
    pub rank: usize,
    pub block_count: usize,
    pub pad_blocks: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContainerHeader {
    pub skeleton: AmrSkeleton,
    pub config: CompressorConfig,
    pub plan: RankPlan,
    /// Coarse blocks under finer levels are dropped before compression.
    pub redundancy_removed: bool,
    pub baseline_chunk_elems: usize,
    /// `[level][field]` global chunk size.
    pub chunk_elements: Vec<Vec<usize>>,
    /// Elements each rank handed to the filter, over all its chunks.
    pub rank_original_elements: Vec<u64>,
    pub chunks: Vec<ChunkMeta>,
}

pub struct WriteOutput {
    pub bytes: Vec<u8>,
    pub header: ContainerHeader,
    pub records: Vec<ChunkRecord>,
}

impl WriteOutput {
    pub fn payload_bytes(&self) -> u64 {
        self.records.iter().map(|r| r.compressed_len).sum()
    }

    pub fn raw_kept_bytes(&self) -> u64 {
        self.records.iter().map(|r| r.actual_elements * 8).sum()
    }

    /// Raw kept bytes over total file bytes.
    pub fn compression_ratio(&self) -> f64 {
        self.raw_kept_bytes() as f64 / self.bytes.len() as f64
    }
}

pub(crate) fn masks_for(skel: &AmrSkeleton, removed: bool) -> Vec<BlockMask> {
    let mut masks = remove_redundancy(skel);
    if !removed {
        for m in &mut masks {
            for k in &mut m.kept {
                k.iter_mut().for_each(|b| *b = true);
            }
        }
    }
    masks
}

/// Values of one rank's chunk for one (level, field), in box order.
pub(crate) fn chunk_values(ds: &AmrDataset, masks: &[BlockMask], plan: &RankPlan, level: usize, field: usize, rank: usize, removed: bool) -> Vec<f64> {
    let boxes = plan.boxes_of(level, rank);
    if removed {
        let refs = kept_block_refs(masks, level, boxes);
        gather_blocks(ds, level, field, &refs).values
    } else {
        boxes
            .iter()
            .flat_map(|&b| ds.levels[level].fields[field][b].iter().copied())
            .collect()
    }
}

pub fn container_write(ds: &AmrDataset, cfg: &CompressorConfig, plan: &RankPlan, baseline_chunk_elems: usize) -> Result<WriteOutput> {
    ds.validate()?;
    cfg.validate()?;
    let skel = ds.skeleton();
    plan.validate(&skel)?;
    if cfg.unit_block_size != ds.unit_block_size {
        return Err(Error::Config(format!(
            "config unit block size {} != dataset {}",
            cfg.unit_block_size, ds.unit_block_size
        )));
    }
    let removed = cfg.algorithm != Algorithm::Baseline1d;
    let masks = masks_for(&skel, removed);
    let n_fields = ds.field_names.len();

    let tasks: Vec<(usize, usize, usize)> = (0..ds.levels.len())
        .flat_map(|l| (0..n_fields).flat_map(move |f| (0..plan.ranks).map(move |r| (l, f, r))))
        .collect();
    let values: Vec<Vec<f64>> = tasks
        .par_iter()
        .map(|&(l, f, r)| chunk_values(ds, &masks, plan, l, f, r, removed))
        .collect();

    let mut chunk_elements = vec![vec![0usize; n_fields]; ds.levels.len()];
    for (l, row) in chunk_elements.iter_mut().enumerate() {
        for (f, c) in row.iter_mut().enumerate() {
            let counts: Vec<usize> = (0..plan.ranks).map(|r| values[(l * n_fields + f) * plan.ranks + r].len()).collect();
            *c = select_chunk_elements(&counts)?;
        }
    }

    let compressed: Vec<(Vec<u8>, FilterInfo)> = tasks
        .par_iter()
        .zip(values.par_iter())
        .map(|(&(l, f, _), v)| {
            let actual = v.len();
            let mut buf = Vec::with_capacity(chunk_elements[l][f]);
            buf.extend_from_slice(v);
            buf.resize(chunk_elements[l][f], 0.0);
            filter_apply(&buf, actual, cfg, baseline_chunk_elems)
        })
        .collect::<Result<_>>()?;

    let mut rank_original_elements = vec![0u64; plan.ranks];
    let mut chunks = Vec::with_capacity(tasks.len());
    for (&(l, f, r), ((_, info), v)) in tasks.iter().zip(compressed.iter().zip(&values)) {
        rank_original_elements[r] += v.len() as u64;
        chunks.push(ChunkMeta {
            level: l,
            field: f,
            rank: r,
            block_count: info.block_count,
            pad_blocks: info.pad_blocks,
        });
    }
    let header = ContainerHeader {
        skeleton: skel,
        config: cfg.clone(),
        plan: plan.clone(),
        redundancy_removed: removed,
        baseline_chunk_elems,
        chunk_elements,
        rank_original_elements,
        chunks,
    };
    let json = serde_json::to_vec(&header)?;

    let mut offset = (PREFIX_LEN + json.len() + RECORD_LEN * tasks.len()) as u64;
    let mut records = Vec::with_capacity(tasks.len());
    for (&(l, f, r), ((bytes, _), v)) in tasks.iter().zip(compressed.iter().zip(&values)) {
        records.push(ChunkRecord {
            offset,
            compressed_len: bytes.len() as u64,
            actual_elements: v.len() as u64,
            rank: r as u32,
            level: l as u16,
            field: f as u16,
        });
        offset += bytes.len() as u64;
    }

    let mut w = ByteWriter::new();
    w.bytes(MAGIC);
    w.u16(VERSION);
    w.u64(json.len() as u64);
    w.bytes(&json);
    for rec in &records {
        w.u64(rec.offset);
        w.u64(rec.compressed_len);
        w.u64(rec.actual_elements);
        w.u32(rec.rank);
        w.u16(rec.level);
        w.u16(rec.field);
    }
    for (bytes, _) in &compressed {
        w.bytes(bytes);
    }
    debug_assert_eq!(w.buf.len() as u64, offset);
    Ok(WriteOutput {
        bytes: w.buf,
        header,
        records,
    })
}

/// Parses and cross-checks the header and chunk table.
pub fn read_container_header(bytes: &[u8]) -> Result<(ContainerHeader, Vec<ChunkRecord>)> {
    let mut r = ByteReader::new(bytes);
    if r.take(4).map_err(|_| Error::Header("file too short".into()))? != MAGIC {
        return Err(Error::Header("bad magic".into()));
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(Error::Header(format!("unsupported container version {version}")));
    }
    let hlen = r.len_prefix(1)?;
    let header: ContainerHeader =
        serde_json::from_slice(r.take(hlen)?).map_err(|e| Error::Header(format!("header json: {e}")))?;
    header.skeleton.validate()?;
    header.config.validate()?;
    header.plan.validate(&header.skeleton)?;
    let n_levels = header.skeleton.levels.len();
    let n_fields = header.skeleton.field_names.len();
    let expected = n_levels * n_fields * header.plan.ranks;
    if header.chunks.len() != expected
        || header.chunk_elements.len() != n_levels
        || header.chunk_elements.iter().any(|c| c.len() != n_fields)
        || header.rank_original_elements.len() != header.plan.ranks
    {
        return Err(Error::Header("chunk layout does not match the skeleton".into()));
    }
    let mut records = Vec::with_capacity(expected);
    let mut next = (PREFIX_LEN + hlen + RECORD_LEN * expected) as u64;
    let mut per_rank = vec![0u64; header.plan.ranks];
    for meta in &header.chunks {
        let rec = ChunkRecord {
            offset: r.u64()?,
            compressed_len: r.u64()?,
            actual_elements: r.u64()?,
            rank: r.u32()?,
            level: r.u16()?,
            field: r.u16()?,
        };
        if (rec.level as usize, rec.field as usize, rec.rank as usize) != (meta.level, meta.field, meta.rank)
            || rec.offset != next
            || rec.offset.checked_add(rec.compressed_len).is_none_or(|end| end > bytes.len() as u64)
        {
            return Err(Error::corrupt(format!("chunk table entry {rec:?} is inconsistent")));
        }
        if rec.actual_elements > header.chunk_elements[meta.level][meta.field] as u64 {
            return Err(Error::corrupt(format!(
                "chunk {rec:?} holds more than the global chunk size"
            )));
        }
        per_rank[meta.rank] += rec.actual_elements;
        next += rec.compressed_len;
        records.push(rec);
    }
    if next != bytes.len() as u64 {
        return Err(Error::corrupt(format!("file has {} bytes, table ends at {next}", bytes.len())));
    }
    if per_rank != header.rank_original_elements {
        return Err(Error::corrupt("per-rank sizes disagree with the chunk table"));
    }
    Ok((header, records))
}

pub fn container_read(bytes: &[u8]) -> Result<AmrDataset> {
    let (header, records) = read_container_header(bytes)?;
    let skel = &header.skeleton;
    let cfg = &header.config;
    let masks = masks_for(skel, header.redundancy_removed);
    let decoded: Vec<Vec<f64>> = records
        .par_iter()
        .map(|rec| {
            let payload = &bytes[rec.offset as usize..(rec.offset + rec.compressed_len) as usize];
            filter_inverse(payload, rec.actual_elements as usize, cfg)
        })
        .collect::<Result<_>>()?;

    let u = skel.unit_block_size;
    let mut levels: Vec<AmrLevel> = skel
        .levels
        .iter()
        .enumerate()
        .map(|(i, g)| AmrLevel {
            index: i,
            boxes: g.boxes.clone(),
            refinement_ratio: g.refinement_ratio,
            fields: vec![g.boxes.iter().map(|b| vec![0.0; b.volume()]).collect(); skel.field_names.len()],
        })
        .collect();
    for ((rec, meta), values) in records.iter().zip(&header.chunks).zip(decoded) {
        let (l, f, r) = (meta.level, meta.field, meta.rank);
        let boxes = header.plan.boxes_of(l, r);
        let target = &mut levels[l].fields[f];
        if header.redundancy_removed {
            let refs = kept_block_refs(&masks, l, boxes);
            if refs.len() * u * u * u != values.len() || refs.len() != meta.block_count {
                return Err(Error::corrupt(format!("chunk {rec:?} does not match its kept blocks")));
            }
            scatter_blocks(skel, l, &refs, &UnitBlocks::new(u, values), target);
        } else {
            let total: usize = boxes.iter().map(|&b| skel.levels[l].boxes[b].volume()).sum();
            if total != values.len() {
                return Err(Error::corrupt(format!("chunk {rec:?} does not match its boxes")));
            }
            let mut at = 0;
            for b in boxes {
                let n = target[b].len();
                target[b].copy_from_slice(&values[at..at + n]);
                at += n;
            }
        }
    }
    let mut ds = AmrDataset {
        levels,
        domain: skel.domain,
        unit_block_size: u,
        field_names: skel.field_names.clone(),
    };
    if header.redundancy_removed {
        refill_redundant(&mut ds, &masks)?;
    }
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amr::synth::{generate_synthetic, Preset, SyntheticSpec};
    use crate::sz::EbMode;

    fn dataset(levels: usize, fields: usize) -> AmrDataset {
        generate_synthetic(&SyntheticSpec {
            preset: Preset::Rough,
            dims: [32, 32, 32],
            levels,
            unit_block_size: 8,
            refine_threshold: 0.8,
            seed: 4,
            max_grid_size: 16,
            field_count: fields,
        })
        .unwrap()
    }

    fn max_err(a: &AmrDataset, b: &AmrDataset, masks: &[BlockMask], level: usize, field: usize) -> f64 {
        let (_, x) = crate::preprocess::truncate(a, masks, level, field);
        let (_, y) = crate::preprocess::truncate(b, masks, level, field);
        x.values.iter().zip(&y.values).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn round_trip_two_levels() {
        let ds = dataset(2, 2);
        for ranks in [1, 3] {
            let plan = RankPlan::round_robin(&ds.skeleton(), ranks).unwrap();
            let cfg = CompressorConfig::new(Algorithm::Lr, EbMode::Absolute, 1e-3, 8);
            let out = container_write(&ds, &cfg, &plan, 1024).unwrap();
            assert_eq!(out.records.len(), 2 * 2 * ranks);
            let back = container_read(&out.bytes).unwrap();
            assert_eq!(back.skeleton(), ds.skeleton());
            let masks = remove_redundancy(&ds.skeleton());
            for l in 0..2 {
                for f in 0..2 {
                    assert!(max_err(&ds, &back, &masks, l, f) <= 1e-3);
                }
            }
            let kept: usize = masks.iter().map(|m| m.kept_blocks() * 512).sum::<usize>() * 2;
            assert_eq!(out.records.iter().map(|r| r.actual_elements as usize).sum::<usize>(), kept);
            assert_eq!(
                out.header.rank_original_elements.iter().sum::<u64>(),
                out.records.iter().map(|r| r.actual_elements).sum::<u64>()
            );
        }
    }

    #[test]
    fn one_level_dataset() {
        let ds = dataset(1, 1);
        let plan = RankPlan::round_robin(&ds.skeleton(), 2).unwrap();
        let cfg = CompressorConfig::new(Algorithm::Interp, EbMode::RangeRelative, 1e-2, 8);
        let out = container_write(&ds, &cfg, &plan, 1024).unwrap();
        assert!(out.records.iter().all(|r| r.level == 0));
        container_read(&out.bytes).unwrap();
    }

    #[test]
    fn baseline_keeps_everything() {
        let ds = dataset(2, 1);
        let plan = RankPlan::round_robin(&ds.skeleton(), 2).unwrap();
        let cfg = CompressorConfig::new(Algorithm::Baseline1d, EbMode::Absolute, 1e-3, 8);
        let out = container_write(&ds, &cfg, &plan, 1024).unwrap();
        assert_eq!(out.raw_kept_bytes() as usize, ds.value_count() * 8);
        let back = container_read(&out.bytes).unwrap();
        for (a, b) in ds.levels.iter().zip(&back.levels) {
            for (x, y) in a.fields[0].iter().flatten().zip(b.fields[0].iter().flatten()) {
                assert!((x - y).abs() <= 1e-3);
            }
        }
    }

    #[test]
    fn empty_ranks_write_empty_chunks() {
        let ds = dataset(1, 1);
        let n_boxes = ds.levels[0].boxes.len();
        let plan = RankPlan::round_robin(&ds.skeleton(), n_boxes + 2).unwrap();
        let cfg = CompressorConfig::new(Algorithm::Lr, EbMode::Absolute, 1e-3, 8);
        let out = container_write(&ds, &cfg, &plan, 1024).unwrap();
        let empty: Vec<_> = out.records.iter().filter(|r| r.actual_elements == 0).collect();
        assert_eq!(empty.len(), 2);
        assert!(empty.iter().all(|r| r.compressed_len == 0));
        container_read(&out.bytes).unwrap();
    }

    #[test]
    fn corruption_detected() {
        let ds = dataset(2, 1);
        let plan = RankPlan::round_robin(&ds.skeleton(), 2).unwrap();
        let cfg = CompressorConfig::new(Algorithm::Lr, EbMode::Absolute, 1e-3, 8);
        let out = container_write(&ds, &cfg, &plan, 1024).unwrap();
        let mut b = out.bytes.clone();
        b[0] = b'X';
        assert!(matches!(container_read(&b), Err(Error::Header(_))));
        let mut b = out.bytes.clone();
        b[4] = 9;
        assert!(matches!(container_read(&b), Err(Error::Header(_))));
        assert!(container_read(&out.bytes[..out.bytes.len() - 1]).is_err());
        // Chunk table: bump the first record's actual element count.
        let table = PREFIX_LEN + serde_json::to_vec(&out.header).unwrap().len();
        let mut b = out.bytes.clone();
        b[table + 16] ^= 1;
        assert!(container_read(&b).is_err());
        // Payload bit flip.
        let mut b = out.bytes.clone();
        let last = b.len() - 10;
        b[last] ^= 0x40;
        assert!(container_read(&b).is_err());
    }

    #[test]
    fn deterministic_bytes() {
        let ds = dataset(2, 2);
        let plan = RankPlan::round_robin(&ds.skeleton(), 4).unwrap();
        let cfg = CompressorConfig::new(Algorithm::Lr, EbMode::RangeRelative, 1e-3, 8);
        let a = container_write(&ds, &cfg, &plan, 1024).unwrap().bytes;
        let b = container_write(&ds, &cfg, &plan, 1024).unwrap().bytes;
        assert_eq!(a, b);
    }
}
