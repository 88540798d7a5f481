//! Canonical Huffman coding over `u32` symbols.
//!
//! Code lengths come from a standard two-queue merge with deterministic tie
//! breaking; codes are then assigned canonically (shorter first, ties by
//! smaller symbol) so only the length table needs to be stored.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::bits::{BitReader, BitWriter, ByteReader, ByteWriter};
use crate::error::{Error, Result};

pub const MAX_CODE_LEN: u8 = 30;
const LOOKUP_BITS: u32 = 11;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HuffmanTable {
    /// Symbols in canonical order: by length, then by value.
    symbols: Vec<u32>,
    lengths: Vec<u8>,
}

fn code_lengths(weights: &[(u32, u64)]) -> Vec<u8> {
    let n = weights.len();
    if n == 1 {
        return vec![1];
    }
    // parent links; leaves are 0..n, internal nodes n..
    let mut parent = vec![usize::MAX; 2 * n - 1];
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> =
        weights.iter().enumerate().map(|(i, &(_, w))| Reverse((w, i))).collect();
    let mut next = n;
    while heap.len() > 1 {
        let Reverse((wa, a)) = heap.pop().unwrap();
        let Reverse((wb, b)) = heap.pop().unwrap();
        parent[a] = next;
        parent[b] = next;
        heap.push(Reverse((wa + wb, next)));
        next += 1;
    }
    let mut depth = vec![0u8; 2 * n - 1];
    for node in (0..2 * n - 2).rev() {
        depth[node] = depth[parent[node]].saturating_add(1);
    }
    depth.truncate(n);
    depth
}

impl HuffmanTable {
    /// Builds a table from a dense histogram indexed by symbol. Symbols with
    /// zero count receive no code.
    pub fn from_histogram(hist: &[u64]) -> Result<Self> {
        let mut weights: Vec<(u32, u64)> = hist
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(s, &c)| (s as u32, c))
            .collect();
        if weights.is_empty() {
            return Err(Error::Config("huffman histogram is empty".into()));
        }
        loop {
            let lens = code_lengths(&weights);
            if lens.iter().all(|&l| l <= MAX_CODE_LEN) {
                let pairs = weights.iter().zip(lens).map(|(&(s, _), l)| (s, l)).collect();
                return Self::from_lengths(pairs);
            }
            // Flatten the distribution until the deepest code fits.
            for w in &mut weights {
                w.1 = (w.1 >> 1).max(1);
            }
        }
    }

    /// Table from explicit `(symbol, length)` pairs; rejects over-subscribed sets.
    pub fn from_lengths(mut pairs: Vec<(u32, u8)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::corrupt("empty huffman table"));
        }
        if pairs.iter().any(|&(_, l)| l == 0 || l > MAX_CODE_LEN) {
            return Err(Error::corrupt("huffman code length out of range"));
        }
        pairs.sort_by_key(|&(s, l)| (l, s));
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::corrupt("duplicate symbol in huffman table"));
        }
        let t = Self {
            symbols: pairs.iter().map(|p| p.0).collect(),
            lengths: pairs.iter().map(|p| p.1).collect(),
        };
        if t.kraft_sum() > 1.0 {
            return Err(Error::corrupt("huffman lengths violate the Kraft inequality"));
        }
        Ok(t)
    }

    pub fn kraft_sum(&self) -> f64 {
        self.lengths.iter().map(|&l| (-(l as f64)).exp2()).sum()
    }

    pub fn symbol_count(&self) -> usize {
        self.symbols.len()
    }

    /// `(symbol, length)` sorted by symbol.
    pub fn code_lengths(&self) -> Vec<(u32, u8)> {
        let mut v: Vec<(u32, u8)> = self.symbols.iter().copied().zip(self.lengths.iter().copied()).collect();
        v.sort_unstable_by_key(|p| p.0);
        v
    }

    /// Canonical codes in table order.
    fn codes(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.symbols.len());
        let mut code = 0u32;
        let mut prev = self.lengths[0];
        for &l in &self.lengths {
            code <<= l - prev;
            prev = l;
            out.push(code);
            code += 1;
        }
        out
    }

    pub fn write(&self, w: &mut ByteWriter) {
        let pairs = self.code_lengths();
        w.varint(pairs.len() as u64);
        let mut prev = 0u32;
        for (i, (s, l)) in pairs.into_iter().enumerate() {
            w.varint(u64::from(if i == 0 { s } else { s - prev - 1 }));
            w.u8(l);
            prev = s;
        }
    }

    pub fn read(r: &mut ByteReader) -> Result<Self> {
        let n = r.varint()?;
        if n == 0 || n as usize > r.remaining() {
            return Err(Error::corrupt(format!("huffman table with {n} entries")));
        }
        let mut pairs = Vec::with_capacity(n as usize);
        let mut prev: u64 = 0;
        for i in 0..n {
            let d = r.varint()?;
            let s = if i == 0 { d } else { prev + d + 1 };
            if s > u64::from(u32::MAX) {
                return Err(Error::corrupt("huffman symbol overflow"));
            }
            pairs.push((s as u32, r.u8()?));
            prev = s;
        }
        Self::from_lengths(pairs)
    }
}

pub struct Encoder {
    /// `(code, len)` indexed by symbol; len 0 marks a symbol without a code.
    table: Vec<(u32, u8)>,
}

impl Encoder {
    pub fn new(t: &HuffmanTable) -> Self {
        let max = t.symbols.iter().copied().max().unwrap_or(0) as usize;
        let mut table = vec![(0, 0); max + 1];
        for ((&s, &l), c) in t.symbols.iter().zip(&t.lengths).zip(t.codes()) {
            table[s as usize] = (c, l);
        }
        Self { table }
    }

    pub fn encode(&self, symbols: &[u32], w: &mut BitWriter) -> Result<()> {
        for &s in symbols {
            let (c, l) = self.table.get(s as usize).copied().unwrap_or((0, 0));
            if l == 0 {
                return Err(Error::Config(format!("symbol {s} has no huffman code")));
            }
            w.write(c, u32::from(l));
        }
        Ok(())
    }
}

pub struct Decoder {
    symbols: Vec<u32>,
    /// Per length: first canonical code, index of its symbol, and count.
    first_code: [u32; MAX_CODE_LEN as usize + 1],
    first_index: [u32; MAX_CODE_LEN as usize + 1],
    count: [u32; MAX_CODE_LEN as usize + 1],
    min_len: u8,
    max_len: u8,
    /// `(symbol index, len)` for every `LOOKUP_BITS` prefix of a short code.
    lookup: Vec<(u32, u8)>,
}

impl Decoder {
    pub fn new(t: &HuffmanTable) -> Self {
        let mut first_code = [0u32; MAX_CODE_LEN as usize + 1];
        let mut first_index = [0u32; MAX_CODE_LEN as usize + 1];
        let mut count = [0u32; MAX_CODE_LEN as usize + 1];
        let codes = t.codes();
        for (i, (&l, &c)) in t.lengths.iter().zip(&codes).enumerate() {
            let l = l as usize;
            if count[l] == 0 {
                first_code[l] = c;
                first_index[l] = i as u32;
            }
            count[l] += 1;
        }
        let mut lookup = vec![(0u32, 0u8); 1 << LOOKUP_BITS];
        for (i, (&l, &c)) in t.lengths.iter().zip(&codes).enumerate() {
            if u32::from(l) <= LOOKUP_BITS {
                let shift = LOOKUP_BITS - u32::from(l);
                let base = (c << shift) as usize;
                for e in &mut lookup[base..base + (1 << shift)] {
                    *e = (i as u32, l);
                }
            }
        }
        Self {
            symbols: t.symbols.clone(),
            first_code,
            first_index,
            count,
            min_len: t.lengths[0],
            max_len: *t.lengths.last().unwrap(),
            lookup,
        }
    }

    #[inline]
    pub fn decode_one(&self, r: &mut BitReader) -> Result<u32> {
        let start = r.position();
        let peek = r.peek32();
        let (idx, len) = self.lookup[(peek >> (32 - LOOKUP_BITS)) as usize];
        let (idx, len) = if len != 0 {
            (idx, u32::from(len))
        } else {
            let mut found = None;
            for l in self.min_len.max(1)..=self.max_len {
                let code = peek >> (32 - u32::from(l));
                let li = l as usize;
                if self.count[li] > 0 && code >= self.first_code[li] && code - self.first_code[li] < self.count[li] {
                    found = Some((self.first_index[li] + code - self.first_code[li], u32::from(l)));
                    break;
                }
            }
            found.ok_or_else(|| Error::Decode {
                bit_offset: start,
                reason: "no code matches".into(),
            })?
        };
        if u64::from(len) > r.remaining() {
            return Err(Error::Decode {
                bit_offset: start,
                reason: "bitstream ends inside a code".into(),
            });
        }
        r.consume(len);
        Ok(self.symbols[idx as usize])
    }
}

/// Encodes `symbols`; returns the packed bytes and the exact bit length.
pub fn huffman_encode(symbols: &[u32], table: &HuffmanTable) -> Result<(Vec<u8>, u64)> {
    let mut w = BitWriter::new();
    Encoder::new(table).encode(symbols, &mut w)?;
    let n = w.bit_len();
    Ok((w.finish(), n))
}

pub fn huffman_decode(bytes: &[u8], bit_len: u64, count: usize, table: &HuffmanTable) -> Result<Vec<u32>> {
    let dec = Decoder::new(table);
    let mut r = BitReader::new(bytes, bit_len);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(dec.decode_one(&mut r)?);
    }
    if r.remaining() != 0 {
        return Err(Error::Decode {
            bit_offset: r.position(),
            reason: format!("{} trailing bits", r.remaining()),
        });
    }
    Ok(out)
}

pub fn histogram(symbols: &[u32]) -> Vec<u64> {
    let max = symbols.iter().copied().max().map_or(0, |m| m as usize + 1);
    let mut h = vec![0u64; max];
    for &s in symbols {
        h[s as usize] += 1;
    }
    h
}
