//! Command-line harness for feature-assisted graphon estimation: file
//! formats, TOML experiment configuration, and the benchmark and λ-sweep
//! drivers built on [`fans_core`].

pub mod config;
pub mod error;
pub mod experiment;
pub mod io;

pub use error::{FansError, Result};
