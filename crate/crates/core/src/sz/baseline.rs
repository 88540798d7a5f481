//! 1D reference path: the flattened data is cut into fixed-size chunks and
//! each chunk becomes an independent stream with its own Huffman tree.

use super::bits::{ByteReader, ByteWriter};
use super::config::{Algorithm, CompressorConfig, Encoding};
use super::quant::{Quantizer, OUTLIER};
use super::stream::{read_stream, write_stream, QuantStream, StreamHeader};
use crate::error::{Error, Result};
use crate::preprocess::Arrangement;

pub const DEFAULT_CHUNK_ELEMS: usize = 1024;

fn compress_chunk(data: &[f64], cfg: &CompressorConfig, eb: f64) -> Result<Vec<u8>> {
    let q = Quantizer::new(eb, cfg.quant_capacity);
    let mut codes = Vec::with_capacity(data.len());
    let mut outliers = Vec::new();
    let mut prev = 0.0;
    for (i, &v) in data.iter().enumerate() {
        let (code, r) = q.quantize(v, prev);
        if code == OUTLIER {
            outliers.push((i as u64, v.to_bits()));
        }
        codes.push(code);
        prev = r;
    }
    let h = StreamHeader {
        algorithm: Algorithm::Baseline1d,
        encoding: Encoding::Sle,
        codec: cfg.codec,
        arrangement: Arrangement::Linear,
        eb,
        sz_block_size: 1,
        unit: 1,
        block_count: 1,
        shape: [data.len() as u32, 1, 1],
        quant_capacity: cfg.quant_capacity,
    };
    write_stream(
        &h,
        &QuantStream {
            groups: vec![codes],
            outliers,
            aux: Vec::new(),
        },
    )
}

fn decompress_chunk(bytes: &[u8]) -> Result<Vec<f64>> {
    let (h, s) = read_stream(bytes)?;
    if h.algorithm != Algorithm::Baseline1d || h.shape[1] != 1 || h.shape[2] != 1 || s.groups.len() != 1 {
        return Err(Error::corrupt("not a 1D baseline chunk"));
    }
    let codes = &s.groups[0];
    if codes.len() != h.shape[0] as usize {
        return Err(Error::corrupt("chunk symbol count mismatch"));
    }
    let q = Quantizer::new(h.eb, h.quant_capacity);
    let mut out = Vec::with_capacity(codes.len());
    let mut outliers = s.outliers.iter();
    let mut prev = 0.0;
    for (i, &c) in codes.iter().enumerate() {
        prev = if c == OUTLIER {
            match outliers.next() {
                Some(&(p, bits)) if p == i as u64 => f64::from_bits(bits),
                _ => return Err(Error::corrupt(format!("no outlier recorded for position {i}"))),
            }
        } else {
            q.recover(prev, c)
        };
        out.push(prev);
    }
    if outliers.next().is_some() {
        return Err(Error::corrupt("unused outliers"));
    }
    Ok(out)
}

/// Compresses `data` in chunks of `chunk_elems` values. A relative bound is
/// resolved once over the whole slice.
pub fn compress_1d_baseline(data: &[f64], cfg: &CompressorConfig, chunk_elems: usize) -> Result<Vec<u8>> {
    cfg.validate()?;
    if chunk_elems == 0 {
        return Err(Error::Config("chunk size must be positive".into()));
    }
    let eb = cfg.effective_eb(data);
    let mut w = ByteWriter::new();
    w.u64(data.len().div_ceil(chunk_elems) as u64);
    for chunk in data.chunks(chunk_elems) {
        let c = compress_chunk(chunk, cfg, eb)?;
        w.u64(c.len() as u64);
        w.bytes(&c);
    }
    Ok(w.buf)
}

pub fn decompress_1d_baseline(bytes: &[u8]) -> Result<Vec<f64>> {
    let mut r = ByteReader::new(bytes);
    let n = r.len_prefix(8)?;
    let mut out = Vec::new();
    for _ in 0..n {
        let len = r.len_prefix(1)?;
        out.extend(decompress_chunk(r.take(len)?)?);
    }
    if r.remaining() != 0 {
        return Err(Error::corrupt("trailing bytes after last chunk"));
    }
    Ok(out)
}

/// Number of chunks in a baseline stream.
pub fn baseline_chunk_count(bytes: &[u8]) -> Result<usize> {
    let mut r = ByteReader::new(bytes);
    r.len_prefix(8)
}
