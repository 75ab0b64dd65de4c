//! IO, pipeline, CLI and HTTP service around [`railodm_core`].

pub mod error;
pub mod fixtures;
pub mod hashing;
pub mod model_file;
pub mod pipeline;
pub mod report_file;
pub mod route_file;
pub mod run_file;
pub mod service;
pub mod weights_file;

pub use error::{Error, Result};
pub use railodm_core as core;
