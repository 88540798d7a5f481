//! Directory interchange format: `header.json` plus one little-endian `f64`
//! file per (level, box, field), named `L{level}_B{box}_{field}.f64`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AmrBox, AmrDataset, AmrLevel};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

/// Ratio recorded for the finest level, which has no finer neighbour.
const FINEST_RATIO: u32 = 2;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    version: u32,
    domain: BoxEntry,
    unit_block_size: usize,
    refinement_ratios: Vec<u32>,
    field_names: Vec<String>,
    levels: Vec<Vec<BoxEntry>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct BoxEntry {
    lo: [i64; 3],
    hi: [i64; 3],
}

impl From<&AmrBox> for BoxEntry {
    fn from(b: &AmrBox) -> Self {
        Self { lo: b.lo, hi: b.hi }
    }
}

pub fn array_file_name(level: usize, box_id: usize, field: &str) -> String {
    format!("L{level}_B{box_id}_{field}.f64")
}

pub fn export_dataset(ds: &AmrDataset, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    ds.validate()?;
    fs::create_dir_all(dir)?;
    let header = Header {
        version: FORMAT_VERSION,
        domain: (&ds.domain).into(),
        unit_block_size: ds.unit_block_size,
        refinement_ratios: ds.levels[..ds.levels.len() - 1]
            .iter()
            .map(|l| l.refinement_ratio)
            .collect(),
        field_names: ds.field_names.clone(),
        levels: ds.levels.iter().map(|l| l.boxes.iter().map(Into::into).collect()).collect(),
    };
    fs::write(dir.join("header.json"), serde_json::to_vec_pretty(&header)?)?;
    for level in &ds.levels {
        for (fi, name) in ds.field_names.iter().enumerate() {
            for (bi, arr) in level.fields[fi].iter().enumerate() {
                let bytes: Vec<u8> = arr.iter().flat_map(|v| v.to_le_bytes()).collect();
                fs::write(dir.join(array_file_name(level.index, bi, name)), bytes)?;
            }
        }
    }
    Ok(())
}

pub fn import_dataset(dir: impl AsRef<Path>) -> Result<AmrDataset> {
    let dir = dir.as_ref();
    let raw = fs::read(dir.join("header.json"))?;
    let header: Header =
        serde_json::from_slice(&raw).map_err(|e| Error::Header(e.to_string()))?;
    if header.version != FORMAT_VERSION {
        return Err(Error::Header(format!("unsupported version {}", header.version)));
    }
    if header.levels.is_empty() {
        return Err(Error::Header("no levels".into()));
    }
    if header.refinement_ratios.len() + 1 != header.levels.len() {
        return Err(Error::Header(format!(
            "{} levels need {} refinement ratios, found {}",
            header.levels.len(),
            header.levels.len() - 1,
            header.refinement_ratios.len()
        )));
    }
    let to_box = |e: &BoxEntry, what: String| {
        AmrBox::new(e.lo, e.hi).map_err(|err| Error::Header(format!("{what}: {err}")))
    };
    let domain = to_box(&header.domain, "domain".into())?;

    let mut levels = Vec::with_capacity(header.levels.len());
    for (li, entries) in header.levels.iter().enumerate() {
        let boxes = entries
            .iter()
            .enumerate()
            .map(|(bi, e)| to_box(e, format!("level {li} box {bi}")))
            .collect::<Result<Vec<_>>>()?;
        let mut fields = Vec::with_capacity(header.field_names.len());
        for name in &header.field_names {
            let mut per_box = Vec::with_capacity(boxes.len());
            for (bi, bx) in boxes.iter().enumerate() {
                let bytes = fs::read(dir.join(array_file_name(li, bi, name)))?;
                if bytes.len() != bx.volume() * 8 {
                    return Err(Error::SizeMismatch {
                        level: li,
                        box_id: bi,
                        expected: bx.volume(),
                        found: bytes.len() / 8,
                    });
                }
                per_box.push(
                    bytes
                        .chunks_exact(8)
                        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                        .collect(),
                );
            }
            fields.push(per_box);
        }
        levels.push(AmrLevel {
            index: li,
            boxes,
            refinement_ratio: header.refinement_ratios.get(li).copied().unwrap_or(FINEST_RATIO),
            fields,
        });
    }
    let ds = AmrDataset {
        levels,
        domain,
        unit_block_size: header.unit_block_size,
        field_names: header.field_names,
    };
    ds.validate()?;
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amr::synth::{generate_synthetic, Preset, SyntheticSpec};

    fn sample() -> AmrDataset {
        let spec = SyntheticSpec {
            preset: Preset::Rough,
            dims: [16, 16, 16],
            levels: 2,
            unit_block_size: 4,
            refine_threshold: 0.9,
            seed: 3,
            ..SyntheticSpec::default()
        };
        generate_synthetic(&spec).unwrap()
    }

    #[test]
    fn round_trip_bit_identical() {
        let ds = sample();
        let dir = tempfile::tempdir().unwrap();
        export_dataset(&ds, dir.path()).unwrap();
        let back = import_dataset(dir.path()).unwrap();
        assert_eq!(back.levels.len(), ds.levels.len());
        for (a, b) in ds.levels.iter().zip(&back.levels) {
            assert_eq!(a.boxes, b.boxes);
            for (fa, fb) in a.fields.iter().zip(&b.fields) {
                for (x, y) in fa.iter().zip(fb) {
                    let xb: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
                    let yb: Vec<u64> = y.iter().map(|v| v.to_bits()).collect();
                    assert_eq!(xb, yb);
                }
            }
        }
        assert_eq!(back, ds);
    }

    #[test]
    fn truncated_array_is_size_mismatch() {
        let ds = sample();
        let dir = tempfile::tempdir().unwrap();
        export_dataset(&ds, dir.path()).unwrap();
        let path = dir.path().join(array_file_name(0, 0, &ds.field_names[0]));
        let mut bytes = fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 8);
        fs::write(&path, bytes).unwrap();
        assert!(matches!(
            import_dataset(dir.path()),
            Err(Error::SizeMismatch { level: 0, box_id: 0, .. })
        ));
    }

    #[test]
    fn overlapping_boxes_rejected_with_indices() {
        let dir = tempfile::tempdir().unwrap();
        let header = r#"{"version":1,"domain":{"lo":[0,0,0],"hi":[8,8,8]},"unit_block_size":4,
            "refinement_ratios":[],"field_names":["t"],
            "levels":[[{"lo":[0,0,0],"hi":[4,8,8]},{"lo":[0,0,0],"hi":[8,4,8]}]]}"#;
        fs::write(dir.path().join("header.json"), header).unwrap();
        fs::write(dir.path().join("L0_B0_t.f64"), vec![0u8; 256 * 8]).unwrap();
        fs::write(dir.path().join("L0_B1_t.f64"), vec![0u8; 256 * 8]).unwrap();
        let err = import_dataset(dir.path()).unwrap_err().to_string();
        assert!(err.contains("boxes 0 and 1"), "{err}");
    }

    #[test]
    fn malformed_header() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("header.json"), b"{\"version\": 1").unwrap();
        assert!(matches!(import_dataset(dir.path()), Err(Error::Header(_))));
    }
}
