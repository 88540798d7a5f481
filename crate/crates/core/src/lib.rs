//! Error-bounded lossy compression for patch-based adaptive mesh refinement
//! data: redundancy removal, unit-block truncation and arrangement, a
//! block-prediction compressor with shared entropy coding, and a chunked
//! container with per-chunk actual-size metadata.

pub mod amr;
pub mod container;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod preprocess;
pub mod sz;

pub use error::{Error, Result};
