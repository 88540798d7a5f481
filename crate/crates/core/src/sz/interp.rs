//! Multilevel interpolation compressor over the whole arranged volume.
//!
//! Anchors on a lattice of stride `S` are stored verbatim. For each level
//! `h = S/2, …, 1` the points at odd multiples of `h` are predicted along z,
//! then y, then x from already reconstructed lattice points.

use super::bits::{ByteReader, ByteWriter};
use super::config::{Algorithm, CompressorConfig};
use super::lr::{check_buffer, header, lin};
use super::quant::{Quantizer, OUTLIER};
use super::stream::{read_stream, write_stream, QuantStream};
use crate::error::{Error, Result};
use crate::preprocess::ArrangedBuffer;

const MAX_STRIDE: usize = 64;

/// Anchor stride for a volume: the next power of two of its largest
/// extent, clamped to `[2, 64]`.
pub fn anchor_stride(shape: [usize; 3]) -> usize {
    let m = shape.into_iter().max().unwrap_or(1);
    m.next_power_of_two().clamp(2, MAX_STRIDE)
}

/// Cubic midpoint weights for samples at offsets −3, −1, 1, 3.
#[inline]
pub fn cubic_midpoint(a: f64, b: f64, c: f64, d: f64) -> f64 {
    (-a + 9.0 * b + 9.0 * c - d) / 16.0
}

fn anchors(shape: [usize; 3], s: usize) -> impl Iterator<Item = [usize; 3]> {
    (0..shape[2]).step_by(s).flat_map(move |z| {
        (0..shape[1])
            .step_by(s)
            .flat_map(move |y| (0..shape[0]).step_by(s).map(move |x| [x, y, z]))
    })
}

/// Calls `f(point, prediction)` for every non-anchor point in sweep order.
/// `vol` must hold reconstructed values for all previously visited points;
/// `f` writes the reconstruction of the current point.
fn sweep(vol: &mut [f64], shape: [usize; 3], s: usize, mut f: impl FnMut(&mut [f64], usize, f64) -> Result<()>) -> Result<()> {
    let mut h = s / 2;
    while h >= 1 {
        for axis in [2usize, 1, 0] {
            // Axes already swept at this level step by h, the others by 2h.
            let step = [0, 1, 2].map(|d| if d == axis { 2 * h } else if d > axis { h } else { 2 * h });
            let start = [0, 1, 2].map(|d| if d == axis { h } else { 0 });
            let stride = [1, shape[0], shape[0] * shape[1]][axis];
            let n = shape[axis];
            for z in (start[2]..shape[2]).step_by(step[2]) {
                for y in (start[1]..shape[1]).step_by(step[1]) {
                    for x in (start[0]..shape[0]).step_by(step[0]) {
                        let p = [x, y, z];
                        let c = p[axis];
                        let i = lin(shape, p);
                        let pred = if c >= 3 * h && c + 3 * h < n {
                            cubic_midpoint(vol[i - 3 * h * stride], vol[i - h * stride], vol[i + h * stride], vol[i + 3 * h * stride])
                        } else if c + h < n {
                            0.5 * (vol[i - h * stride] + vol[i + h * stride])
                        } else {
                            vol[i - h * stride]
                        };
                        f(vol, i, pred)?;
                    }
                }
            }
        }
        h /= 2;
    }
    Ok(())
}

pub fn compress_level_interp(buf: &ArrangedBuffer, cfg: &CompressorConfig) -> Result<Vec<u8>> {
    cfg.validate()?;
    if cfg.algorithm != Algorithm::Interp {
        return Err(Error::Config(format!("{:?} config passed to the interpolation compressor", cfg.algorithm)));
    }
    check_buffer(buf)?;
    let eb = cfg.effective_eb(&buf.data);
    let q = Quantizer::new(eb, cfg.quant_capacity);
    let shape = buf.shape;
    let s = anchor_stride(shape);
    let orig = &buf.data;
    let mut recon = vec![0.0; orig.len()];
    let mut aux = ByteWriter::new();
    let anchor_list: Vec<_> = anchors(shape, s).collect();
    aux.u64(anchor_list.len() as u64);
    for p in anchor_list {
        let i = lin(shape, p);
        aux.f64(orig[i]);
        recon[i] = orig[i];
    }
    let mut codes = Vec::with_capacity(orig.len());
    let mut outliers = Vec::new();
    sweep(&mut recon, shape, s, |vol, i, pred| {
        let (code, r) = q.quantize(orig[i], pred);
        if code == OUTLIER {
            outliers.push((i as u64, orig[i].to_bits()));
        }
        codes.push(code);
        vol[i] = r;
        Ok(())
    })?;
    let stream = QuantStream {
        groups: vec![codes],
        outliers,
        aux: aux.buf,
    };
    write_stream(&header(buf, cfg, eb), &stream)
}

pub fn decompress_level_interp(bytes: &[u8]) -> Result<ArrangedBuffer> {
    let (h, stream) = read_stream(bytes)?;
    if h.algorithm != Algorithm::Interp {
        return Err(Error::corrupt(format!("expected an interpolation stream, found {:?}", h.algorithm)));
    }
    let shape = h.shape.map(|s| s as usize);
    let u = h.unit as usize;
    let n = h.block_count as usize;
    if u == 0 || shape.iter().any(|&s| s == 0 || s % u != 0) {
        return Err(Error::corrupt(format!("inconsistent interpolation header {h:?}")));
    }
    let slots: usize = shape.map(|s| s / u).iter().product();
    if n == 0 || n > slots || stream.groups.len() != 1 {
        return Err(Error::corrupt("interpolation stream block count or group count"));
    }
    let q = Quantizer::new(h.eb, h.quant_capacity);
    let s = anchor_stride(shape);
    let mut vol = vec![0.0; shape.iter().product()];
    let mut aux = ByteReader::new(&stream.aux);
    let n_anchor = aux.len_prefix(8)?;
    let mut count = 0;
    for p in anchors(shape, s) {
        if count == n_anchor {
            return Err(Error::corrupt("anchor section too short"));
        }
        vol[lin(shape, p)] = aux.f64()?;
        count += 1;
    }
    if count != n_anchor || aux.remaining() != 0 {
        return Err(Error::corrupt("anchor section length mismatch"));
    }
    let codes = &stream.groups[0];
    let mut ci = 0;
    let mut oi = 0;
    sweep(&mut vol, shape, s, |vol, i, pred| {
        let code = *codes.get(ci).ok_or_else(|| Error::corrupt("symbol stream exhausted"))?;
        ci += 1;
        vol[i] = if code == OUTLIER {
            match stream.outliers.get(oi) {
                Some(&(p, bits)) if p == i as u64 => {
                    oi += 1;
                    f64::from_bits(bits)
                }
                _ => return Err(Error::corrupt(format!("no outlier recorded for position {i}"))),
            }
        } else {
            q.recover(pred, code)
        };
        Ok(())
    })?;
    if ci != codes.len() || oi != stream.outliers.len() {
        return Err(Error::corrupt("stream sections not fully consumed"));
    }
    Ok(ArrangedBuffer {
        data: vol,
        shape,
        unit: u,
        block_count: n,
        pad_blocks: slots - n,
        arrangement: h.arrangement,
    })
}
