//! Algebraic-geometry codes on Hermitian-type curves, the qudit stabilizer
//! codes they induce, and a two-stage (greedy, then learned) syndrome decoder
//! with a Monte Carlo evaluation harness.

pub mod agcode;
pub mod audit;
pub mod channel;
pub mod config;
pub mod curve;
pub mod decoder;
pub mod decoder_greedy;
pub mod decoder_rl;
pub mod error;
pub mod gf;
pub mod linalg;
pub mod presets;
pub mod simharness;
pub mod stabilizer;

pub use error::{Error, Result};
