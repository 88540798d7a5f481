//! `SZLV` stream framing.
//!
//! Layout (little-endian): a fixed raw header, then a body run through the
//! lossless backend, then a CRC-32 of everything before it. The body holds
//! the Huffman groups (table, symbol count, bit length, packed codes), the
//! point outliers as `(position, raw bits)` pairs, and an algorithm-specific
//! auxiliary section (predictor flags and coefficients, or anchors).

use super::bits::{ByteReader, ByteWriter};
use super::config::{Algorithm, Codec, Encoding};
use super::huffman::{histogram, huffman_decode, huffman_encode, HuffmanTable};
use super::lossless::{lossless_compress, lossless_decompress};
use crate::error::{Error, Result};
use crate::preprocess::Arrangement;

pub const MAGIC: &[u8; 4] = b"SZLV";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 54;
const CRC_LEN: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct StreamHeader {
    pub algorithm: Algorithm,
    pub encoding: Encoding,
    pub codec: Codec,
    pub arrangement: Arrangement,
    /// Absolute bound the stream was produced with.
    pub eb: f64,
    pub sz_block_size: u32,
    pub unit: u32,
    pub block_count: u32,
    pub shape: [u32; 3],
    pub quant_capacity: u32,
}

/// Entropy-coder input: symbol groups (one Huffman tree each), outliers and
/// the auxiliary section.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QuantStream {
    pub groups: Vec<Vec<u32>>,
    pub outliers: Vec<(u64, u64)>,
    pub aux: Vec<u8>,
}

fn arrangement_id(a: Arrangement) -> u8 {
    match a {
        Arrangement::Linear => 0,
        Arrangement::Cluster => 1,
    }
}

fn arrangement_from_id(id: u8) -> Result<Arrangement> {
    match id {
        0 => Ok(Arrangement::Linear),
        1 => Ok(Arrangement::Cluster),
        _ => Err(Error::corrupt(format!("unknown arrangement id {id}"))),
    }
}

fn encode_body(q: &QuantStream) -> Result<Vec<u8>> {
    let mut w = ByteWriter::new();
    w.u32(q.groups.len() as u32);
    for g in &q.groups {
        if g.is_empty() {
            w.varint(0);
            continue;
        }
        let table = HuffmanTable::from_histogram(&histogram(g))?;
        let (bytes, bits) = huffman_encode(g, &table)?;
        w.varint(g.len() as u64);
        table.write(&mut w);
        w.varint(bits);
        w.bytes(&bytes);
    }
    w.u64(q.outliers.len() as u64);
    for &(pos, bits) in &q.outliers {
        w.u64(pos);
        w.u64(bits);
    }
    w.u64(q.aux.len() as u64);
    w.bytes(&q.aux);
    Ok(w.buf)
}

fn decode_body(body: &[u8]) -> Result<QuantStream> {
    let mut r = ByteReader::new(body);
    let n_groups = r.u32()? as usize;
    if n_groups > r.remaining() {
        return Err(Error::corrupt(format!("{n_groups} symbol groups in {} bytes", r.remaining())));
    }
    let mut groups = Vec::with_capacity(n_groups);
    for _ in 0..n_groups {
        let count = r.varint()?;
        if count == 0 {
            groups.push(Vec::new());
            continue;
        }
        let table = HuffmanTable::read(&mut r)?;
        let bits = r.varint()?;
        let nbytes = bits.div_ceil(8);
        if nbytes > r.remaining() as u64 || count > bits {
            return Err(Error::corrupt(format!("group of {count} symbols claims {bits} bits")));
        }
        let bytes = r.take(nbytes as usize)?;
        groups.push(huffman_decode(bytes, bits, count as usize, &table)?);
    }
    let n_out = r.len_prefix(16)?;
    let mut outliers = Vec::with_capacity(n_out);
    for _ in 0..n_out {
        outliers.push((r.u64()?, r.u64()?));
    }
    let n_aux = r.len_prefix(1)?;
    let aux = r.take(n_aux)?.to_vec();
    if r.remaining() != 0 {
        return Err(Error::corrupt(format!("{} trailing body bytes", r.remaining())));
    }
    Ok(QuantStream { groups, outliers, aux })
}

pub fn write_stream(h: &StreamHeader, q: &QuantStream) -> Result<Vec<u8>> {
    let body = encode_body(q)?;
    let packed = lossless_compress(&body, h.codec);
    let mut w = ByteWriter::new();
    w.bytes(MAGIC);
    w.u16(VERSION);
    w.u8(h.algorithm.id());
    w.u8(h.encoding.id());
    w.u8(h.codec.id());
    w.u8(arrangement_id(h.arrangement));
    w.f64(h.eb);
    w.u32(h.sz_block_size);
    w.u32(h.unit);
    w.u32(h.block_count);
    for s in h.shape {
        w.u32(s);
    }
    w.u32(h.quant_capacity);
    w.u64(body.len() as u64);
    debug_assert_eq!(w.buf.len(), HEADER_LEN);
    w.bytes(&packed);
    let crc = crc32fast::hash(&w.buf);
    w.u32(crc);
    Ok(w.buf)
}

pub fn read_header(bytes: &[u8]) -> Result<StreamHeader> {
    if bytes.len() < HEADER_LEN + CRC_LEN {
        return Err(Error::corrupt(format!("stream of {} bytes is shorter than its header", bytes.len())));
    }
    let mut r = ByteReader::new(bytes);
    if r.take(4)? != MAGIC {
        return Err(Error::corrupt("bad magic"));
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(Error::corrupt(format!("unsupported stream version {version}")));
    }
    let algorithm = Algorithm::from_id(r.u8()?)?;
    let encoding = Encoding::from_id(r.u8()?)?;
    let codec = Codec::from_id(r.u8()?)?;
    let arrangement = arrangement_from_id(r.u8()?)?;
    let eb = r.f64()?;
    let sz_block_size = r.u32()?;
    let unit = r.u32()?;
    let block_count = r.u32()?;
    let shape = [r.u32()?, r.u32()?, r.u32()?];
    let quant_capacity = r.u32()?;
    if !(eb > 0.0 && eb.is_finite()) || quant_capacity < 4 || !quant_capacity.is_power_of_two() {
        return Err(Error::corrupt(format!("bad header: eb {eb}, capacity {quant_capacity}")));
    }
    Ok(StreamHeader {
        algorithm,
        encoding,
        codec,
        arrangement,
        eb,
        sz_block_size,
        unit,
        block_count,
        shape,
        quant_capacity,
    })
}

/// Verifies the checksum, parses the header and decodes the body.
pub fn read_stream(bytes: &[u8]) -> Result<(StreamHeader, QuantStream)> {
    let h = read_header(bytes)?;
    let (data, tail) = bytes.split_at(bytes.len() - CRC_LEN);
    let stored = u32::from_le_bytes(tail.try_into().unwrap());
    if crc32fast::hash(data) != stored {
        return Err(Error::corrupt("checksum mismatch"));
    }
    let body_len = u64::from_le_bytes(data[HEADER_LEN - 8..HEADER_LEN].try_into().unwrap());
    // Deflate cannot expand more than ~1032:1.
    let limit = (data.len() - HEADER_LEN) as u64 * 1100 + 64;
    if body_len > limit {
        return Err(Error::corrupt(format!("body length {body_len} is implausible")));
    }
    let body = lossless_decompress(&data[HEADER_LEN..], h.codec, body_len as usize)?;
    Ok((h, decode_body(&body)?))
}

/// Number of Huffman trees in a stream.
pub fn tree_count(bytes: &[u8]) -> Result<usize> {
    let (_, q) = read_stream(bytes)?;
    Ok(q.groups.iter().filter(|g| !g.is_empty()).count())
}

/// Packs booleans LSB-first.
pub(crate) fn pack_flags(flags: &[bool], w: &mut ByteWriter) {
    w.u64(flags.len() as u64);
    for chunk in flags.chunks(8) {
        w.u8(chunk.iter().enumerate().fold(0u8, |acc, (i, &f)| acc | (u8::from(f) << i)));
    }
}

pub(crate) fn unpack_flags(r: &mut ByteReader) -> Result<Vec<bool>> {
    let n = r.u64()?;
    if n.div_ceil(8) > r.remaining() as u64 {
        return Err(Error::corrupt(format!("{n} predictor flags exceed section")));
    }
    let bytes = r.take(n.div_ceil(8) as usize)?;
    Ok((0..n as usize).map(|i| bytes[i / 8] >> (i % 8) & 1 == 1).collect())
}
