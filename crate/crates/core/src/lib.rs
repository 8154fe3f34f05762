//! Weak values, weak operators and their non-normality.

pub mod config;
pub mod error;
pub mod linalg;
pub mod meter;
pub mod oracles;
pub mod preset;
pub mod quantum;
pub mod random;
pub mod sweep;
pub mod verify;
pub mod weak;

pub use error::{Error, Result};
