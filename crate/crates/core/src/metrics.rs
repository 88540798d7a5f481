//! Quality metrics, rate-distortion sweeps and error maps.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::amr::{AmrDataset, AmrSkeleton};
use crate::container::{chunk_values, container_read, container_write, ChunkRecord};
use crate::error::{Error, Result};
use crate::harness::RankPlan;
use crate::preprocess::{remove_redundancy, truncate, Arrangement, BlockMask};
use crate::sz::{Algorithm, CompressorConfig, EbMode, Encoding};

/// PSNR in dB with R = max − min of `original`:
/// `20·log10(R) − 10·log10(Σe²/N)`. Identical inputs give `+inf`; a zero
/// range with nonzero error gives `-inf`.
pub fn psnr(original: &[f64], reconstructed: &[f64]) -> Result<f64> {
    if original.len() != reconstructed.len() || original.is_empty() {
        return Err(Error::Config(format!(
            "psnr needs equal nonempty inputs, got {} and {}",
            original.len(),
            reconstructed.len()
        )));
    }
    let (lo, hi) = min_max(original);
    let sse: f64 = original.iter().zip(reconstructed).map(|(a, b)| (a - b) * (a - b)).sum();
    if sse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(psnr_from_parts(hi - lo, sse, original.len()))
}

/// The PSNR formula on its ingredients: value range, sum of squared errors
/// and point count.
pub fn psnr_from_parts(range: f64, sse: f64, n: usize) -> f64 {
    if sse == 0.0 {
        f64::INFINITY
    } else if range == 0.0 {
        f64::NEG_INFINITY
    } else {
        20.0 * range.log10() - 10.0 * (sse / n as f64).log10()
    }
}

pub fn max_abs_error(original: &[f64], reconstructed: &[f64]) -> f64 {
    original.iter().zip(reconstructed).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Kept elements of `level` over the elements of its whole domain.
pub fn density(skel: &AmrSkeleton, masks: &[BlockMask], level: usize) -> f64 {
    let u = skel.unit_block_size;
    let kept = masks[level].kept_blocks() * u * u * u;
    kept as f64 / skel.level_domain(level).volume() as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityRow {
    /// `None` for rows pooled over levels.
    pub level: Option<usize>,
    /// `None` for the all-fields row.
    pub field: Option<String>,
    pub psnr: f64,
    pub max_abs_error: f64,
    pub compression_ratio: f64,
    pub bitrate: f64,
    pub value_range: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    /// One row per (level, field).
    pub rows: Vec<QualityRow>,
    /// One row per field, pooled over levels.
    pub fields: Vec<QualityRow>,
    /// All fields: ratio and bitrate over the whole file, PSNR as the
    /// arithmetic mean of the per-field dB values.
    pub total: QualityRow,
    /// Pooled per-field PSNR values averaged in the linear MSE domain
    /// instead, then converted to dB.
    pub mean_mse_psnr: f64,
}

/// Kept values of (level, field), in truncation order.
fn kept_values(ds: &AmrDataset, masks: &[BlockMask], level: usize, field: usize) -> Vec<f64> {
    truncate(ds, masks, level, field).1.values
}

fn ratio(raw_values: u64, compressed_bytes: u64) -> f64 {
    if compressed_bytes == 0 {
        f64::INFINITY
    } else {
        raw_values as f64 * 8.0 / compressed_bytes as f64
    }
}

fn bitrate(compressed_bytes: u64, values: u64) -> f64 {
    if values == 0 {
        0.0
    } else {
        compressed_bytes as f64 * 8.0 / values as f64
    }
}

/// Quality of `reconstructed` against `original` over kept points. Ratio
/// and bitrate use the elements each chunk handed to the filter.
pub fn quality_report(
    original: &AmrDataset,
    reconstructed: &AmrDataset,
    records: &[ChunkRecord],
    file_bytes: u64,
) -> Result<QualityReport> {
    let skel = original.skeleton();
    if reconstructed.skeleton() != skel {
        return Err(Error::Config("datasets have different structure".into()));
    }
    let masks = remove_redundancy(&skel);
    let mut rows = Vec::new();
    let mut fields = Vec::new();
    for (f, name) in skel.field_names.iter().enumerate() {
        let mut pooled_a = Vec::new();
        let mut pooled_b = Vec::new();
        let (mut raw_f, mut comp_f) = (0u64, 0u64);
        for l in 0..skel.levels.len() {
            let a = kept_values(original, &masks, l, f);
            let b = kept_values(reconstructed, &masks, l, f);
            let (raw, comp) = records
                .iter()
                .filter(|r| r.level as usize == l && r.field as usize == f)
                .fold((0, 0), |(x, y), r| (x + r.actual_elements, y + r.compressed_len));
            raw_f += raw;
            comp_f += comp;
            rows.push(row(Some(l), Some(name.clone()), &a, &b, raw, comp)?);
            pooled_a.extend(a);
            pooled_b.extend(b);
        }
        fields.push(row(None, Some(name.clone()), &pooled_a, &pooled_b, raw_f, comp_f)?);
    }
    let raw: u64 = records.iter().map(|r| r.actual_elements).sum();
    let n = fields.len() as f64;
    let mean_db = fields.iter().map(|r| r.psnr).sum::<f64>() / n;
    // Per-field MSE normalized by range², averaged, back to dB.
    let mean_nmse = fields
        .iter()
        .map(|r| 10f64.powf(-r.psnr / 10.0))
        .sum::<f64>()
        / n;
    let total = QualityRow {
        level: None,
        field: None,
        psnr: mean_db,
        max_abs_error: fields.iter().map(|r| r.max_abs_error).fold(0.0, f64::max),
        compression_ratio: ratio(raw, file_bytes),
        bitrate: bitrate(file_bytes, raw),
        value_range: fields.iter().map(|r| r.value_range).fold(0.0, f64::max),
        points: fields.iter().map(|r| r.points).sum(),
    };
    Ok(QualityReport {
        rows,
        fields,
        total,
        mean_mse_psnr: -10.0 * mean_nmse.log10(),
    })
}

fn row(level: Option<usize>, field: Option<String>, a: &[f64], b: &[f64], raw: u64, comp: u64) -> Result<QualityRow> {
    let (lo, hi) = min_max(a);
    Ok(QualityRow {
        level,
        field,
        psnr: if a.is_empty() { f64::INFINITY } else { psnr(a, b)? },
        max_abs_error: max_abs_error(a, b),
        compression_ratio: ratio(raw, comp),
        bitrate: bitrate(comp, raw),
        value_range: if a.is_empty() { 0.0 } else { hi - lo },
        points: a.len(),
    })
}

/// Points of `reconstructed` farther from `original` than the effective
/// bound of the chunk that carried them. Range-relative bounds resolve per
/// chunk, so each chunk is checked against its own bound.
pub fn bound_violations(original: &AmrDataset, reconstructed: &AmrDataset, cfg: &CompressorConfig, plan: &RankPlan) -> usize {
    let skel = original.skeleton();
    let removed = cfg.algorithm != Algorithm::Baseline1d;
    let masks = remove_redundancy(&skel);
    let mut bad = 0;
    for l in 0..skel.levels.len() {
        for f in 0..skel.field_names.len() {
            for r in 0..plan.ranks {
                let a = chunk_values(original, &masks, plan, l, f, r, removed);
                let b = chunk_values(reconstructed, &masks, plan, l, f, r, removed);
                let eb = cfg.effective_eb(&a);
                let within = |d: f64| d <= eb;
                bad += a.iter().zip(&b).filter(|(x, y)| !within((*x - *y).abs())).count();
            }
        }
    }
    bad
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub algorithms: Vec<Algorithm>,
    pub encodings: Vec<Encoding>,
    pub arrangements: Vec<Arrangement>,
    pub eb_mode: EbMode,
    pub error_bounds: Vec<f64>,
    pub ranks: usize,
    pub baseline_chunk_elems: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub algorithm: Algorithm,
    pub encoding: Encoding,
    pub arrangement: Arrangement,
    pub eb_mode: EbMode,
    pub eb: f64,
    pub bitrate: f64,
    pub psnr: f64,
    pub ratio: f64,
    pub max_abs_error: f64,
}

pub const SWEEP_COLUMNS: [&str; 9] = [
    "algorithm",
    "encoding",
    "arrangement",
    "eb_mode",
    "eb",
    "bitrate",
    "psnr",
    "ratio",
    "max_abs_error",
];

/// One row per (algorithm, encoding, arrangement, eb), in that nesting order.
pub fn sweep(ds: &AmrDataset, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    let plan = RankPlan::round_robin(&ds.skeleton(), spec.ranks)?;
    let mut rows = Vec::new();
    for &algorithm in &spec.algorithms {
        for &encoding in &spec.encodings {
            for &arrangement in &spec.arrangements {
                for &eb in &spec.error_bounds {
                    let mut cfg = CompressorConfig::new(algorithm, spec.eb_mode, eb, ds.unit_block_size);
                    cfg.encoding = encoding;
                    cfg.arrangement = arrangement;
                    let out = container_write(ds, &cfg, &plan, spec.baseline_chunk_elems)?;
                    let back = container_read(&out.bytes)?;
                    let q = quality_report(ds, &back, &out.records, out.bytes.len() as u64)?;
                    rows.push(SweepRow {
                        algorithm,
                        encoding,
                        arrangement,
                        eb_mode: spec.eb_mode,
                        eb,
                        bitrate: q.total.bitrate,
                        psnr: q.total.psnr,
                        ratio: q.total.compression_ratio,
                        max_abs_error: q.total.max_abs_error,
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// `inf` and `-inf` for infinities, shortest round-trip form otherwise.
pub fn fmt_f64(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:?}")
    }
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(SWEEP_COLUMNS).map_err(err)?;
    for r in rows {
        w.write_record([
            r.algorithm.name().to_string(),
            r.encoding.name().to_string(),
            r.arrangement.name().to_string(),
            r.eb_mode.name().to_string(),
            fmt_f64(r.eb),
            fmt_f64(r.bitrate),
            fmt_f64(r.psnr),
            fmt_f64(r.ratio),
            fmt_f64(r.max_abs_error),
        ])
        .map_err(err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorMap {
    pub axis: Axis,
    pub index: usize,
    /// Fast dimension first.
    pub width: usize,
    pub height: usize,
    /// Row-major, `NaN` where the slice has no data.
    #[serde(skip)]
    pub values: Vec<f64>,
}

/// |a − b| on one slice of an x-fastest volume of `shape`. The remaining
/// two axes keep their order (x before y before z), the first one fastest.
pub fn error_map(original: &[f64], reconstructed: &[f64], shape: [usize; 3], axis: Axis, index: usize) -> Result<ErrorMap> {
    let n = shape.iter().product::<usize>();
    if original.len() != n || reconstructed.len() != n {
        return Err(Error::Config(format!("volume of shape {shape:?} needs {n} values")));
    }
    let a = axis as usize;
    if index >= shape[a] {
        return Err(Error::Config(format!("slice {index} out of range for axis {axis:?} of extent {}", shape[a])));
    }
    let (u, v) = match axis {
        Axis::X => (1, 2),
        Axis::Y => (0, 2),
        Axis::Z => (0, 1),
    };
    let (width, height) = (shape[u], shape[v]);
    let mut values = Vec::with_capacity(width * height);
    for q in 0..height {
        for p in 0..width {
            let mut c = [0; 3];
            c[a] = index;
            c[u] = p;
            c[v] = q;
            let i = (c[2] * shape[1] + c[1]) * shape[0] + c[0];
            values.push((original[i] - reconstructed[i]).abs());
        }
    }
    Ok(ErrorMap {
        axis,
        index,
        width,
        height,
        values,
    })
}

/// One level of one field pasted onto its level-domain grid; uncovered cells
/// are `NaN`. Returns the shape and x-fastest values.
pub fn level_volume(ds: &AmrDataset, level: usize, field: usize) -> ([usize; 3], Vec<f64>) {
    let skel = ds.skeleton();
    let dom = skel.level_domain(level);
    let shape = dom.shape();
    let mut out = vec![f64::NAN; dom.volume()];
    let lvl = &ds.levels[level];
    for (bx, arr) in lvl.boxes.iter().zip(&lvl.fields[field]) {
        for (c, v) in bx.cells().zip(arr) {
            out[dom.offset_of(c)] = *v;
        }
    }
    (shape, out)
}

/// Writes `<stem>.f64` (raw little-endian values) and `<stem>.json`.
pub fn write_error_map(map: &ErrorMap, stem: &Path) -> Result<()> {
    let raw: Vec<u8> = map.values.iter().flat_map(|v| v.to_le_bytes()).collect();
    std::fs::write(stem.with_extension("f64"), raw)?;
    std::fs::write(stem.with_extension("json"), serde_json::to_vec_pretty(map)?)?;
    Ok(())
}
