//! Dictionary-driven illumination patterns for single-pixel imaging.
//!
//! Training images are stacked into a dictionary, their principal components
//! become the illumination patterns, and a simulated single-pixel detector
//! measures test objects with those patterns (and, for comparison, with
//! phase-shifted Fourier patterns). Reconstructions are scored by PSNR.

pub mod cli;
pub mod config;
pub mod dataset;
pub mod eigen;
pub mod error;
pub mod linalg;
pub mod patterns;
pub mod pgm;
pub mod recon;
pub mod sim;

pub use error::{Error, Result};
