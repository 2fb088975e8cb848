//! Semantic statement retrieval: text processing, term weighting, latent
//! semantic analysis, Word Mover's Distance and paragraph vectors.
//!
//! Everything here is `no_std` with `alloc`; file formats, persistence and
//! the command line live in the companion `wmdsearch` crate.

#![no_std]

extern crate alloc;

use alloc::vec::Vec;

pub mod embedding;
pub mod emd;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod lsa;
pub mod pv;
pub mod retrieval;
pub mod search;
pub mod svd;
pub mod text;
pub mod transport;
pub mod weighting;

pub use error::{Error, Result};

/// Highest scores first, ties by ascending id, truncated to `k`.
pub(crate) fn top_k_descending(mut scored: Vec<(usize, f64)>, k: usize) -> Vec<(usize, f64)> {
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}

/// Smallest distances first, ties by ascending id, truncated to `k`.
pub(crate) fn top_k_ascending(mut scored: Vec<(usize, f64)>, k: usize) -> Vec<(usize, f64)> {
    scored.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}
