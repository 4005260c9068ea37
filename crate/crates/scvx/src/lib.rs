//! Std companion to `scvx-core`: datasets, file formats, model bundles, the
//! HTTP bundle server and the `scvx` command line.

pub mod bundle;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod formats;
pub mod parallel;
pub mod serve;
pub mod verify;

pub use error::{Result, ScvxError};
