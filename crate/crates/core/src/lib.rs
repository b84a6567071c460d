//! Blind watermarking of grayscale images in the extended Hadamard domain.
//!
//! A binary watermark of side `m` is embedded into an `n x n` cover one bit
//! per block: each `floor(n/m)` block carries a `4t x 4t` sub-block whose
//! two-sided Hadamard transform has the relative order of two coefficients
//! forced to encode the bit. Extraction only needs the watermarked image and
//! a [`WatermarkKey`].
//!
//! Before embedding, the watermark can be scrambled by a steady-state
//! order-based genetic algorithm ([`ga`]) that searches for a permutation of
//! the mark minimally correlated with the original.
//!
//! With the default `parallel` feature, block-level embedding/extraction and
//! independent GA runs fan out over rayon. Disabling it gives a sequential
//! build with bit-identical results.

pub mod attacks;
pub mod codec;
mod error;
pub mod ga;
pub mod hadamard;
pub mod harness;
pub mod image;
pub mod metrics;
mod par;
pub mod rng;

pub use crate::attacks::{attack, robustness_report, AttackSpec, NoiseScale, RobustnessRow};
pub use crate::codec::{
    default_b, embed, embed_block, extract, extract_block, load_key, save_key, EmbedParams, WatermarkKey,
};
pub use crate::error::{Error, Result};
pub use crate::ga::{evolve, CrossoverKind, GaConfig, Individual, MutationKind, Permutation, RunStats};
pub use crate::hadamard::{select_order, sylvester, Block, HadamardMatrix};
pub use crate::image::{
    convert_encoding, load_gray, load_watermark, save_gray, save_watermark, BinaryWatermark, Encoding, GrayImage,
};
pub use crate::metrics::{mse, nc, psnr, QualityReport};
