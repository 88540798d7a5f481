//! Error-bounded prediction-based compressor.

pub mod baseline;
pub mod bits;
pub mod config;
pub mod huffman;
pub mod interp;
pub mod lossless;
pub mod lr;
pub mod predict;
pub mod quant;
pub mod stream;

pub use config::{adaptive_block_size, Algorithm, Codec, CompressorConfig, EbMode, Encoding, DEFAULT_QUANT_CAPACITY};
pub use huffman::{histogram, huffman_decode, huffman_encode, HuffmanTable};
pub use lossless::{lossless_compress, lossless_decompress};
pub use predict::{lorenzo_predict, regression_fit, select_predictor, Predictor, Region, RegressionCoeffs};
pub use quant::{dequantize, quantize, Quantizer, OUTLIER};
pub use stream::{read_header, tree_count, QuantStream, StreamHeader};
pub use lr::{compress_level_lr, decompress_level_lr, decompress_lr};
pub use baseline::{baseline_chunk_count, compress_1d_baseline, decompress_1d_baseline, DEFAULT_CHUNK_ELEMS};
pub use interp::{compress_level_interp, decompress_level_interp};

use crate::error::{Error, Result};
use crate::preprocess::ArrangedBuffer;

/// Compresses an arranged volume with the configured 3D algorithm.
pub fn compress_level(buf: &ArrangedBuffer, cfg: &CompressorConfig) -> Result<Vec<u8>> {
    match cfg.algorithm {
        Algorithm::Lr => compress_level_lr(buf, cfg),
        Algorithm::Interp => compress_level_interp(buf, cfg),
        Algorithm::Baseline1d => Err(Error::Config("the 1D baseline compresses flat data, not volumes".into())),
    }
}

/// Decodes an `SZLV` volume stream of either 3D algorithm.
pub fn decompress_level(bytes: &[u8]) -> Result<ArrangedBuffer> {
    match read_header(bytes)?.algorithm {
        Algorithm::Lr => decompress_lr(bytes),
        Algorithm::Interp => decompress_level_interp(bytes),
        Algorithm::Baseline1d => Err(Error::corrupt("1D baseline chunk where a volume stream was expected")),
    }
}
