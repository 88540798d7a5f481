//! Linear quantization of prediction residuals into bins of width `2·eb`.
//! Code 0 is reserved for unpredictable points stored verbatim; other codes
//! are the bin index offset by `capacity / 2`.

pub const OUTLIER: u32 = 0;

#[derive(Clone, Copy, Debug)]
pub struct Quantizer {
    eb: f64,
    step: f64,
    radius: i64,
}

impl Quantizer {
    pub fn new(eb: f64, capacity: u32) -> Self {
        Self {
            eb,
            step: 2.0 * eb,
            radius: i64::from(capacity / 2),
        }
    }

    pub fn eb(&self) -> f64 {
        self.eb
    }

    /// Quantizes `orig` against `pred`. Returns the code and the value the
    /// decoder will reconstruct; outliers reconstruct to `orig` exactly.
    #[inline]
    pub fn quantize(&self, orig: f64, pred: f64) -> (u32, f64) {
        let q = ((orig - pred) / self.step).round();
        if q.abs() < self.radius as f64 {
            let recon = pred + q * self.step;
            if (recon - orig).abs() <= self.eb {
                return ((q as i64 + self.radius) as u32, recon);
            }
        }
        (OUTLIER, orig)
    }

    /// Reconstruction for a non-outlier code.
    #[inline]
    pub fn recover(&self, pred: f64, code: u32) -> f64 {
        pred + (i64::from(code) - self.radius) as f64 * self.step
    }
}

/// Code for a bare residual, `None` when it overflows the capacity.
pub fn quantize(residual: f64, eb: f64, capacity: u32) -> Option<u32> {
    match Quantizer::new(eb, capacity).quantize(residual, 0.0) {
        (OUTLIER, _) => None,
        (code, _) => Some(code),
    }
}

pub fn dequantize(code: u32, eb: f64, capacity: u32) -> f64 {
    Quantizer::new(eb, capacity).recover(0.0, code)
}
