//! Simulation and analysis of driven two-level-system (TLS) defect ensembles.
//!
//! Frequencies at the public interface are linear (Hz); operators are built in
//! angular units (rad/s).

pub mod analysis;
pub mod cli;
pub mod config;
pub mod error;
pub mod floquet;
pub mod io;
pub mod linalg;
pub mod lindblad;
pub mod model;
pub mod selftest;
pub mod special;
pub mod sweep;
pub mod waveguide;

pub use error::{Error, ErrorCategory, Result};
