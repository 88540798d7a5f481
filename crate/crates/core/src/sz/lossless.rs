//! Byte-level lossless stage applied after entropy coding.

use miniz_oxide::deflate::compress_to_vec;
use miniz_oxide::inflate::decompress_to_vec_with_limit;

use super::config::Codec;
use crate::error::{Error, Result};

const LZ_LEVEL: u8 = 6;

pub fn lossless_compress(bytes: &[u8], codec: Codec) -> Vec<u8> {
    match codec {
        Codec::Store => bytes.to_vec(),
        Codec::Lz => compress_to_vec(bytes, LZ_LEVEL),
    }
}

/// Inverse of [`lossless_compress`]; `expected_len` bounds the output.
pub fn lossless_decompress(bytes: &[u8], codec: Codec, expected_len: usize) -> Result<Vec<u8>> {
    let out = match codec {
        Codec::Store => bytes.to_vec(),
        Codec::Lz => decompress_to_vec_with_limit(bytes, expected_len)
            .map_err(|e| Error::corrupt(format!("lz body: {:?}", e.status)))?,
    };
    if out.len() != expected_len {
        return Err(Error::corrupt(format!(
            "body decoded to {} bytes, header says {expected_len}",
            out.len()
        )));
    }
    Ok(out)
}
