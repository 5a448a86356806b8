//! Compressed sensing with redundant, coherent dictionaries by l1-analysis.
//!
//! A signal `f` in `C^n` is observed as `y = A f + z` with `m << n`
//! measurements and recovered as the solution of
//!
//! ```text
//! minimize |D^* f|_1  subject to  |A f - y|_2 <= eps
//! ```
//!
//! where `D` is an `n x d` frame, typically a tight and highly redundant one.
//!
//! * [`frames`]: dictionaries (identity, DFT, oversampled DFT, Gabor,
//!   concatenations), frame bounds, canonical tightening, coherence.
//! * [`sensing`]: random sensing operators and noisy measurements.
//! * [`signals`]: test signals and error metrics.
//! * [`solvers`]: l1-analysis, reweighted analysis, synthesis, split analysis.
//! * [`certify`]: D-RIP estimates and the constants of the error bound.
//! * [`experiments`]: the reproducible numerical studies behind the `l1a` tool.

pub mod certify;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod frames;
pub mod io;
pub mod linop;
pub mod rng;
pub mod sensing;
pub mod signals;
pub mod solvers;

pub use error::{Error, Result};
