use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::Arrangement;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Per-block Lorenzo or linear-regression prediction.
    Lr,
    /// Multilevel cubic interpolation over the whole volume.
    Interp,
    /// 1D Lorenzo over fixed-size chunks of the flattened data.
    Baseline1d,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EbMode {
    Absolute,
    /// Bound is `eb_value · (max − min)` of the data handed to the compressor.
    RangeRelative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    /// Unit blocks predicted independently, one shared Huffman tree.
    Sle,
    /// Unit blocks predicted independently, one tree each.
    PerBlock,
    /// Blocks merged into one volume and predicted across block borders.
    LinearMerge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Codec {
    Store,
    Lz,
}

impl Algorithm {
    pub fn id(self) -> u8 {
        match self {
            Algorithm::Lr => 0,
            Algorithm::Interp => 1,
            Algorithm::Baseline1d => 2,
        }
    }

    pub fn from_id(id: u8) -> Result<Self> {
        Ok(match id {
            0 => Algorithm::Lr,
            1 => Algorithm::Interp,
            2 => Algorithm::Baseline1d,
            _ => return Err(Error::corrupt(format!("unknown algorithm id {id}"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Lr => "lr",
            Algorithm::Interp => "interp",
            Algorithm::Baseline1d => "baseline1d",
        }
    }

    /// Arrangement paired with each algorithm when none is requested.
    pub fn default_arrangement(self) -> Arrangement {
        match self {
            Algorithm::Interp => Arrangement::Cluster,
            _ => Arrangement::Linear,
        }
    }
}

impl EbMode {
    pub fn name(self) -> &'static str {
        match self {
            EbMode::Absolute => "abs",
            EbMode::RangeRelative => "rel",
        }
    }
}

impl Encoding {
    pub fn name(self) -> &'static str {
        match self {
            Encoding::Sle => "sle",
            Encoding::PerBlock => "per-block",
            Encoding::LinearMerge => "lm",
        }
    }

    pub fn id(self) -> u8 {
        match self {
            Encoding::Sle => 0,
            Encoding::PerBlock => 1,
            Encoding::LinearMerge => 2,
        }
    }

    pub fn from_id(id: u8) -> Result<Self> {
        Ok(match id {
            0 => Encoding::Sle,
            1 => Encoding::PerBlock,
            2 => Encoding::LinearMerge,
            _ => return Err(Error::corrupt(format!("unknown encoding id {id}"))),
        })
    }
}

impl Codec {
    pub fn id(self) -> u8 {
        match self {
            Codec::Store => 0,
            Codec::Lz => 1,
        }
    }

    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            0 => Ok(Codec::Store),
            1 => Ok(Codec::Lz),
            _ => Err(Error::UnknownCodec(id)),
        }
    }
}

/// Prediction block edge for a given unit block size:
/// 4 when `U mod 6 <= 2` (and `U < 64`), otherwise 6.
pub fn adaptive_block_size(unit_block_size: usize) -> usize {
    if unit_block_size >= 64 || unit_block_size % 6 > 2 {
        6
    } else {
        4
    }
}

pub const DEFAULT_QUANT_CAPACITY: u32 = 65536;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompressorConfig {
    pub algorithm: Algorithm,
    pub eb_mode: EbMode,
    pub eb_value: f64,
    pub unit_block_size: usize,
    pub sz_block_size: usize,
    pub quant_capacity: u32,
    pub encoding: Encoding,
    pub codec: Codec,
    pub arrangement: Arrangement,
}

impl CompressorConfig {
    pub fn new(algorithm: Algorithm, eb_mode: EbMode, eb_value: f64, unit_block_size: usize) -> Self {
        Self {
            algorithm,
            eb_mode,
            eb_value,
            unit_block_size,
            sz_block_size: adaptive_block_size(unit_block_size),
            quant_capacity: DEFAULT_QUANT_CAPACITY,
            encoding: Encoding::Sle,
            codec: Codec::Lz,
            arrangement: algorithm.default_arrangement(),
        }
    }

    pub fn with_encoding(mut self, encoding: Encoding) -> Self {
        self.encoding = encoding;
        self
    }

    pub fn with_arrangement(mut self, arrangement: Arrangement) -> Self {
        self.arrangement = arrangement;
        self
    }

    pub fn with_sz_block_size(mut self, b: usize) -> Self {
        self.sz_block_size = b;
        self
    }

    pub fn with_codec(mut self, codec: Codec) -> Self {
        self.codec = codec;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eb_value > 0.0 && self.eb_value.is_finite()) {
            return Err(Error::Config(format!("error bound {} must be positive", self.eb_value)));
        }
        if !matches!(self.sz_block_size, 4 | 6) {
            return Err(Error::Config(format!("block size {} not in {{4, 6}}", self.sz_block_size)));
        }
        if self.quant_capacity < 4 || !self.quant_capacity.is_power_of_two() {
            return Err(Error::Config(format!(
                "quantization capacity {} must be a power of two >= 4",
                self.quant_capacity
            )));
        }
        if self.unit_block_size == 0 {
            return Err(Error::Config("unit block size must be positive".into()));
        }
        Ok(())
    }

    /// Absolute bound for the given data slice.
    pub fn effective_eb(&self, data: &[f64]) -> f64 {
        match self.eb_mode {
            EbMode::Absolute => self.eb_value,
            EbMode::RangeRelative => {
                let (lo, hi) = value_range(data);
                let r = hi - lo;
                if r > 0.0 && r.is_finite() {
                    self.eb_value * r
                } else {
                    self.eb_value
                }
            }
        }
    }
}

pub fn value_range(data: &[f64]) -> (f64, f64) {
    data.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)))
}
