//! Integer relation detection with PSLQ, multi-pair PSLQ and multi-level
//! mixed precision.

pub mod cli;
pub mod config;
pub mod constants;
pub mod error;
pub mod kernel;
pub mod lq;
pub mod matrix;
pub mod multilevel;
pub mod multipair;
pub mod parallel;
pub mod precision;
pub mod pslq;

pub use error::{Error, Result};
pub use pslq::{RelationOutcome, Status};
