//! File formats, persistence, evaluation runner and command-line interface
//! over [`wmdsearch_core`].

pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod inputs;
pub mod persist;
pub mod pipeline;

pub use error::{Error, Result};
pub use wmdsearch_core as core;
