//! Lorenzo and linear-regression predictors.

use super::quant::{Quantizer, OUTLIER};

/// Rectangular region of a row-major volume, used as a prediction domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Region {
    pub origin: [usize; 3],
    pub extent: [usize; 3],
}

/// 3D Lorenzo prediction of point `p` from already reconstructed neighbours.
/// Neighbours before `domain_origin` on any axis read as 0, which reduces the
/// stencil to its 2D/1D forms on the first plane, row and column.
#[inline]
pub fn lorenzo_predict(vol: &[f64], shape: [usize; 3], domain_origin: [usize; 3], p: [usize; 3]) -> f64 {
    let sx = 1;
    let sy = shape[0];
    let sz = shape[0] * shape[1];
    let idx = (p[2] * shape[1] + p[1]) * shape[0] + p[0];
    let hx = p[0] > domain_origin[0];
    let hy = p[1] > domain_origin[1];
    let hz = p[2] > domain_origin[2];
    let at = |off: usize| vol[idx - off];
    let mut pred = 0.0;
    if hx {
        pred += at(sx);
    }
    if hy {
        pred += at(sy);
    }
    if hz {
        pred += at(sz);
    }
    if hx && hy {
        pred -= at(sx + sy);
    }
    if hx && hz {
        pred -= at(sx + sz);
    }
    if hy && hz {
        pred -= at(sy + sz);
    }
    if hx && hy && hz {
        pred += at(sx + sy + sz);
    }
    pred
}

/// Coefficients of `f ≈ a·x + b·y + c·z + d` over block-local coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegressionCoeffs(pub [f64; 4]);

impl RegressionCoeffs {
    #[inline]
    pub fn predict(&self, x: usize, y: usize, z: usize) -> f64 {
        let [a, b, c, d] = self.0;
        a * x as f64 + b * y as f64 + c * z as f64 + d
    }
}

/// Least-squares plane fit over a full rectangular block. The design is a
/// tensor grid, so centred coordinates decouple the normal equations.
pub fn regression_fit(vol: &[f64], shape: [usize; 3], region: Region) -> RegressionCoeffs {
    let [ex, ey, ez] = region.extent;
    let [ox, oy, oz] = region.origin;
    let n = (ex * ey * ez) as f64;
    let mean_c = [ex, ey, ez].map(|e| (e as f64 - 1.0) / 2.0);
    let mut sum = 0.0;
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sz = 0.0;
    for z in 0..ez {
        let dz = z as f64 - mean_c[2];
        for y in 0..ey {
            let dy = y as f64 - mean_c[1];
            let row = ((oz + z) * shape[1] + oy + y) * shape[0] + ox;
            for (x, &f) in vol[row..row + ex].iter().enumerate() {
                sum += f;
                sx += (x as f64 - mean_c[0]) * f;
                sy += dy * f;
                sz += dz * f;
            }
        }
    }
    // Σ(x − x̄)² over the grid = (other extents) · e(e² − 1)/12.
    let var = |e: usize| (e * (e * e - 1)) as f64 / 12.0;
    let slope = |s: f64, e: usize, others: usize| {
        if e > 1 {
            s / (var(e) * others as f64)
        } else {
            0.0
        }
    };
    let a = slope(sx, ex, ey * ez);
    let b = slope(sy, ey, ex * ez);
    let c = slope(sz, ez, ex * ey);
    let d = sum / n - a * mean_c[0] - b * mean_c[1] - c * mean_c[2];
    RegressionCoeffs([a, b, c, d])
}

/// Quantizes coefficients against the previous block's. Returns the codes and
/// the dequantized values; a code of [`OUTLIER`] keeps that coefficient exact.
pub fn quantize_coeffs(c: &RegressionCoeffs, prev: &RegressionCoeffs, q: &Quantizer) -> ([u32; 4], RegressionCoeffs) {
    let mut codes = [0u32; 4];
    let mut deq = [0.0; 4];
    for i in 0..4 {
        (codes[i], deq[i]) = q.quantize(c.0[i], prev.0[i]);
    }
    (codes, RegressionCoeffs(deq))
}

/// Inverse of [`quantize_coeffs`]; `verbatim` yields the exact values of outliers.
pub fn dequantize_coeffs(
    codes: [u32; 4],
    prev: &RegressionCoeffs,
    q: &Quantizer,
    mut verbatim: impl FnMut() -> Option<f64>,
) -> Option<RegressionCoeffs> {
    let mut out = [0.0; 4];
    for i in 0..4 {
        out[i] = if codes[i] == OUTLIER { verbatim()? } else { q.recover(prev.0[i], codes[i]) };
    }
    Some(RegressionCoeffs(out))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Predictor {
    Lorenzo,
    Regression,
}

/// Absolute-error sums `(lorenzo, regression)` over `region`. Lorenzo is
/// evaluated on the original values (zeros before `domain_origin`), the
/// plane with the coefficients the decoder will see.
pub fn predictor_costs(
    vol: &[f64],
    shape: [usize; 3],
    domain_origin: [usize; 3],
    region: Region,
    coeffs: &RegressionCoeffs,
) -> (f64, f64) {
    let mut lor = 0.0;
    let mut reg = 0.0;
    for z in 0..region.extent[2] {
        for y in 0..region.extent[1] {
            for x in 0..region.extent[0] {
                let p = [region.origin[0] + x, region.origin[1] + y, region.origin[2] + z];
                let f = vol[(p[2] * shape[1] + p[1]) * shape[0] + p[0]];
                lor += (f - lorenzo_predict(vol, shape, domain_origin, p)).abs();
                reg += (f - coeffs.predict(x, y, z)).abs();
            }
        }
    }
    (lor, reg)
}

/// Picks the predictor with the smaller error sum; ties go to Lorenzo.
pub fn select_predictor(
    vol: &[f64],
    shape: [usize; 3],
    domain_origin: [usize; 3],
    region: Region,
    coeffs: &RegressionCoeffs,
) -> Predictor {
    let (lor, reg) = predictor_costs(vol, shape, domain_origin, region, coeffs);
    if reg < lor {
        Predictor::Regression
    } else {
        Predictor::Lorenzo
    }
}
