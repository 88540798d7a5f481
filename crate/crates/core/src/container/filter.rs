//! Compression filter applied to one chunk buffer.

use crate::error::{Error, Result};
use crate::preprocess::{arrange, inverse_arrange, UnitBlocks};
use crate::sz::{compress_1d_baseline, compress_level, decompress_1d_baseline, decompress_level, Algorithm, CompressorConfig};

/// Arrangement facts of a compressed chunk.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FilterInfo {
    pub block_count: usize,
    pub pad_blocks: usize,
}

/// Compresses the first `actual` values of `buffer`; the rest of the buffer
/// is padding and never reaches the compressor. For the 3D algorithms the
/// values are consecutive U³ unit blocks. `actual == 0` yields an empty payload.
pub fn filter_apply(
    buffer: &[f64],
    actual: usize,
    cfg: &CompressorConfig,
    baseline_chunk: usize,
) -> Result<(Vec<u8>, FilterInfo)> {
    if actual > buffer.len() {
        return Err(Error::Config(format!(
            "actual size {actual} exceeds chunk capacity {}",
            buffer.len()
        )));
    }
    if actual == 0 {
        return Ok((Vec::new(), FilterInfo::default()));
    }
    let data = &buffer[..actual];
    match cfg.algorithm {
        Algorithm::Baseline1d => Ok((compress_1d_baseline(data, cfg, baseline_chunk)?, FilterInfo::default())),
        Algorithm::Lr | Algorithm::Interp => {
            let u = cfg.unit_block_size;
            let len = u * u * u;
            if !actual.is_multiple_of(len) {
                return Err(Error::Config(format!("{actual} values are not whole {u}³ blocks")));
            }
            let buf = arrange(&UnitBlocks::new(u, data.to_vec()), cfg.arrangement)?;
            let info = FilterInfo {
                block_count: buf.block_count,
                pad_blocks: buf.pad_blocks,
            };
            Ok((compress_level(&buf, cfg)?, info))
        }
    }
}

/// Inverse of [`filter_apply`]: exactly `actual` values.
pub fn filter_inverse(bytes: &[u8], actual: usize, cfg: &CompressorConfig) -> Result<Vec<f64>> {
    if actual == 0 {
        if !bytes.is_empty() {
            return Err(Error::corrupt("payload present for an empty chunk"));
        }
        return Ok(Vec::new());
    }
    let values = match cfg.algorithm {
        Algorithm::Baseline1d => decompress_1d_baseline(bytes)?,
        Algorithm::Lr | Algorithm::Interp => {
            let buf = decompress_level(bytes)?;
            if buf.unit != cfg.unit_block_size {
                return Err(Error::corrupt(format!("chunk unit {} != {}", buf.unit, cfg.unit_block_size)));
            }
            inverse_arrange(&buf)?.values
        }
    };
    if values.len() != actual {
        return Err(Error::corrupt(format!(
            "chunk decoded to {} values, metadata says {actual}",
            values.len()
        )));
    }
    Ok(values)
}
