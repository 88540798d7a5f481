//! Block-wise Lorenzo / regression compressor.
//!
//! A prediction domain is one unit block (SLE and per-block encodings) or the
//! whole arranged volume (linear merge). Each domain is tiled with SZ blocks
//! of edge `B`, visited z, y, x; every SZ block picks its predictor, and
//! Lorenzo reads reconstructed values with zeros outside the domain.

use rayon::prelude::*;

use super::bits::{ByteReader, ByteWriter};
use super::config::{Algorithm, CompressorConfig, Encoding};
use super::predict::{
    dequantize_coeffs, lorenzo_predict, quantize_coeffs, regression_fit, select_predictor, Predictor, Region,
    RegressionCoeffs,
};
use super::quant::{Quantizer, OUTLIER};
use super::stream::{pack_flags, read_stream, unpack_flags, write_stream, QuantStream, StreamHeader};
use crate::error::{Error, Result};
use crate::preprocess::{arrange, inverse_arrange, ArrangedBuffer, UnitBlocks};

#[derive(Default)]
struct DomainOut {
    codes: Vec<u32>,
    outliers: Vec<(u64, u64)>,
    coeff_verbatim: Vec<f64>,
    flags: Vec<bool>,
}

fn sz_blocks(shape: [usize; 3], b: usize) -> impl Iterator<Item = Region> {
    let steps = shape.map(|s| s.div_ceil(b));
    (0..steps[2]).flat_map(move |bz| {
        (0..steps[1]).flat_map(move |by| {
            (0..steps[0]).map(move |bx| {
                let origin = [bx * b, by * b, bz * b];
                let extent = [0, 1, 2].map(|d| b.min(shape[d] - origin[d]));
                Region { origin, extent }
            })
        })
    })
}

/// Visits block-local and domain coordinates, x fastest.
fn try_for_each_point(r: Region, mut f: impl FnMut([usize; 3], [usize; 3]) -> Result<()>) -> Result<()> {
    for z in 0..r.extent[2] {
        for y in 0..r.extent[1] {
            for x in 0..r.extent[0] {
                f([x, y, z], [r.origin[0] + x, r.origin[1] + y, r.origin[2] + z])?;
            }
        }
    }
    Ok(())
}

#[inline]
pub(super) fn lin(shape: [usize; 3], p: [usize; 3]) -> usize {
    (p[2] * shape[1] + p[1]) * shape[0] + p[0]
}

fn compress_domain(orig: &[f64], shape: [usize; 3], b: usize, q: &Quantizer, qc: &Quantizer, offset: u64) -> DomainOut {
    let mut out = DomainOut::default();
    let mut recon = vec![0.0; orig.len()];
    let mut prev = RegressionCoeffs([0.0; 4]);
    for region in sz_blocks(shape, b) {
        let fit = regression_fit(orig, shape, region);
        let (ccodes, deq) = quantize_coeffs(&fit, &prev, qc);
        let choice = select_predictor(orig, shape, [0; 3], region, &deq);
        out.flags.push(choice == Predictor::Regression);
        if choice == Predictor::Regression {
            for (i, &c) in ccodes.iter().enumerate() {
                out.codes.push(c);
                if c == OUTLIER {
                    out.coeff_verbatim.push(fit.0[i]);
                }
            }
            prev = deq;
        }
        let _ = try_for_each_point(region, |local, p| {
            let i = lin(shape, p);
            let pred = match choice {
                Predictor::Regression => deq.predict(local[0], local[1], local[2]),
                Predictor::Lorenzo => lorenzo_predict(&recon, shape, [0; 3], p),
            };
            let (code, r) = q.quantize(orig[i], pred);
            if code == OUTLIER {
                out.outliers.push((offset + i as u64, orig[i].to_bits()));
            }
            out.codes.push(code);
            recon[i] = r;
            Ok(())
        });
    }
    out
}

/// Sequential readers over the decoded sections.
struct Cursors<'a> {
    codes: &'a [u32],
    code_pos: usize,
    outliers: &'a [(u64, u64)],
    out_pos: usize,
    coeffs: ByteReader<'a>,
    coeff_left: u64,
    flags: &'a [bool],
    flag_pos: usize,
}

impl Cursors<'_> {
    fn code(&mut self) -> Result<u32> {
        let c = *self
            .codes
            .get(self.code_pos)
            .ok_or_else(|| Error::corrupt("symbol stream exhausted"))?;
        self.code_pos += 1;
        Ok(c)
    }

    fn outlier(&mut self, pos: u64) -> Result<f64> {
        match self.outliers.get(self.out_pos) {
            Some(&(p, bits)) if p == pos => {
                self.out_pos += 1;
                Ok(f64::from_bits(bits))
            }
            _ => Err(Error::corrupt(format!("no outlier recorded for position {pos}"))),
        }
    }

    fn flag(&mut self) -> Result<bool> {
        let f = *self
            .flags
            .get(self.flag_pos)
            .ok_or_else(|| Error::corrupt("predictor flags exhausted"))?;
        self.flag_pos += 1;
        Ok(f)
    }

    fn coeff(&mut self) -> Option<f64> {
        if self.coeff_left == 0 {
            return None;
        }
        self.coeff_left -= 1;
        self.coeffs.f64().ok()
    }
}

fn decompress_domain(
    cur: &mut Cursors,
    shape: [usize; 3],
    b: usize,
    q: &Quantizer,
    qc: &Quantizer,
    offset: u64,
) -> Result<Vec<f64>> {
    let mut recon = vec![0.0; shape.iter().product()];
    let mut prev = RegressionCoeffs([0.0; 4]);
    for region in sz_blocks(shape, b) {
        let coeffs = if cur.flag()? {
            let codes = [cur.code()?, cur.code()?, cur.code()?, cur.code()?];
            let c = dequantize_coeffs(codes, &prev, qc, || cur.coeff())
                .ok_or_else(|| Error::corrupt("coefficient section exhausted"))?;
            prev = c;
            Some(c)
        } else {
            None
        };
        try_for_each_point(region, |local, p| {
            let i = lin(shape, p);
            let code = cur.code()?;
            recon[i] = if code == OUTLIER {
                cur.outlier(offset + i as u64)?
            } else {
                let pred = match &coeffs {
                    Some(c) => c.predict(local[0], local[1], local[2]),
                    None => lorenzo_predict(&recon, shape, [0; 3], p),
                };
                q.recover(pred, code)
            };
            Ok(())
        })?;
    }
    Ok(recon)
}

fn check_lr(cfg: &CompressorConfig) -> Result<()> {
    cfg.validate()?;
    if cfg.algorithm != Algorithm::Lr {
        return Err(Error::Config(format!("{:?} config passed to the LR compressor", cfg.algorithm)));
    }
    Ok(())
}

pub(super) fn check_buffer(buf: &ArrangedBuffer) -> Result<()> {
    let n: usize = buf.shape.iter().product();
    if buf.data.len() != n || n == 0 || buf.block_count == 0 {
        return Err(Error::Config(format!(
            "buffer of {} values does not match shape {:?}",
            buf.data.len(),
            buf.shape
        )));
    }
    Ok(())
}

pub(super) fn header(buf: &ArrangedBuffer, cfg: &CompressorConfig, eb: f64) -> StreamHeader {
    StreamHeader {
        algorithm: cfg.algorithm,
        encoding: cfg.encoding,
        codec: cfg.codec,
        arrangement: buf.arrangement,
        eb,
        sz_block_size: cfg.sz_block_size as u32,
        unit: buf.unit as u32,
        block_count: buf.block_count as u32,
        shape: buf.shape.map(|s| s as u32),
        quant_capacity: cfg.quant_capacity,
    }
}

fn coeff_quantizer(eb: f64, b: usize, cap: u32) -> Quantizer {
    Quantizer::new(eb / (2.0 * b as f64), cap)
}

pub fn compress_level_lr(buf: &ArrangedBuffer, cfg: &CompressorConfig) -> Result<Vec<u8>> {
    check_lr(cfg)?;
    check_buffer(buf)?;
    let eb = cfg.effective_eb(&buf.data);
    let b = cfg.sz_block_size;
    let q = Quantizer::new(eb, cfg.quant_capacity);
    let qc = coeff_quantizer(eb, b, cfg.quant_capacity);
    let outs: Vec<DomainOut> = match cfg.encoding {
        Encoding::LinearMerge => vec![compress_domain(&buf.data, buf.shape, b, &q, &qc, 0)],
        Encoding::Sle | Encoding::PerBlock => {
            let blocks = inverse_arrange(buf)?;
            let u = blocks.unit;
            let len = blocks.block_len();
            blocks
                .values
                .par_chunks(len)
                .enumerate()
                .map(|(i, blk)| compress_domain(blk, [u; 3], b, &q, &qc, (i * len) as u64))
                .collect()
        }
    };

    let mut stream = QuantStream::default();
    let mut flags = Vec::new();
    let mut verbatim = Vec::new();
    for o in outs {
        match cfg.encoding {
            Encoding::PerBlock => stream.groups.push(o.codes),
            _ => {
                if stream.groups.is_empty() {
                    stream.groups.push(Vec::new());
                }
                stream.groups[0].extend_from_slice(&o.codes);
            }
        }
        stream.outliers.extend(o.outliers);
        flags.extend(o.flags);
        verbatim.extend(o.coeff_verbatim);
    }
    let mut aux = ByteWriter::new();
    pack_flags(&flags, &mut aux);
    aux.u64(verbatim.len() as u64);
    for v in verbatim {
        aux.f64(v);
    }
    stream.aux = aux.buf;
    write_stream(&header(buf, cfg, eb), &stream)
}

/// Decodes an LR stream back into the arranged volume.
pub fn decompress_lr(bytes: &[u8]) -> Result<ArrangedBuffer> {
    let (h, stream) = read_stream(bytes)?;
    if h.algorithm != Algorithm::Lr {
        return Err(Error::corrupt(format!("expected an LR stream, found {:?}", h.algorithm)));
    }
    let b = h.sz_block_size as usize;
    let u = h.unit as usize;
    let shape = h.shape.map(|s| s as usize);
    let n = h.block_count as usize;
    if !matches!(b, 4 | 6) || u == 0 || n == 0 || shape.iter().any(|&s| s == 0 || s % u != 0) {
        return Err(Error::corrupt(format!("inconsistent LR header {h:?}")));
    }
    let q = Quantizer::new(h.eb, h.quant_capacity);
    let qc = coeff_quantizer(h.eb, b, h.quant_capacity);

    let mut aux = ByteReader::new(&stream.aux);
    let flags = unpack_flags(&mut aux)?;
    let coeff_left = aux.len_prefix(8)? as u64;
    let mut cur = Cursors {
        codes: &[],
        code_pos: 0,
        outliers: &stream.outliers,
        out_pos: 0,
        coeffs: aux,
        coeff_left,
        flags: &flags,
        flag_pos: 0,
    };
    let expected_groups = match h.encoding {
        Encoding::PerBlock => n,
        _ => 1,
    };
    if stream.groups.len() != expected_groups {
        return Err(Error::corrupt(format!(
            "{} symbol groups, expected {expected_groups}",
            stream.groups.len()
        )));
    }

    let result = match h.encoding {
        Encoding::LinearMerge => {
            cur.codes = &stream.groups[0];
            let data = decompress_domain(&mut cur, shape, b, &q, &qc, 0)?;
            let grid = shape.map(|s| s / u);
            let slots = grid.iter().product::<usize>();
            if n > slots {
                return Err(Error::corrupt("block count exceeds volume"));
            }
            ArrangedBuffer {
                data,
                shape,
                unit: u,
                block_count: n,
                pad_blocks: slots - n,
                arrangement: h.arrangement,
            }
        }
        Encoding::Sle | Encoding::PerBlock => {
            let len = u * u * u;
            let mut values = Vec::with_capacity(n * len);
            for i in 0..n {
                if h.encoding == Encoding::PerBlock {
                    if cur.code_pos != cur.codes.len() {
                        return Err(Error::corrupt("unused symbols in a block group"));
                    }
                    cur.codes = &stream.groups[i];
                    cur.code_pos = 0;
                } else if i == 0 {
                    cur.codes = &stream.groups[0];
                }
                values.extend(decompress_domain(&mut cur, [u; 3], b, &q, &qc, (i * len) as u64)?);
            }
            let buf = arrange(&UnitBlocks::new(u, values), h.arrangement)?;
            if buf.shape != shape {
                return Err(Error::corrupt(format!(
                    "blocks arrange to {:?}, header says {shape:?}",
                    buf.shape
                )));
            }
            buf
        }
    };
    if cur.code_pos != cur.codes.len()
        || cur.out_pos != stream.outliers.len()
        || cur.flag_pos != flags.len()
        || cur.coeff_left != 0
    {
        return Err(Error::corrupt("stream sections not fully consumed"));
    }
    Ok(result)
}

/// Like [`decompress_lr`], but checks the stream against the expected
/// configuration and volume shape.
pub fn decompress_level_lr(bytes: &[u8], cfg: &CompressorConfig, shape: [usize; 3]) -> Result<ArrangedBuffer> {
    check_lr(cfg)?;
    let h = super::stream::read_header(bytes)?;
    if h.encoding != cfg.encoding || h.sz_block_size as usize != cfg.sz_block_size {
        return Err(Error::Config(format!(
            "stream uses {:?} with B={}, config asks for {:?} with B={}",
            h.encoding, h.sz_block_size, cfg.encoding, cfg.sz_block_size
        )));
    }
    if h.shape.map(|s| s as usize) != shape {
        return Err(Error::Config(format!("stream shape {:?} != expected {shape:?}", h.shape)));
    }
    decompress_lr(bytes)
}
