//! Patch-based low-rank despeckling.
//!
//! The crate provides the pieces of a speckle-denoising pipeline for
//! grayscale images:
//!
//! - [`image`] and [`io`]: a `[0, 1]` raster type, masks, PGM/PNG I/O;
//! - [`noise`]: reproducible multiplicative speckle synthesis;
//! - [`block_match`]: reference grid and nearest-patch search;
//! - [`wnnm`]: weighted nuclear norm shrinkage, aggregation and the
//!   iterative denoiser with its baseline and tuned presets;
//! - [`metrics`]: PSNR and SSIM;
//! - [`bench`] and [`pairs`]: dataset benchmarking and training-pair export.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`). The aliases below
//! name the usual instantiations.

pub mod bench;
pub mod block_match;
pub mod config;
pub mod error;
pub mod image;
pub mod io;
pub mod metrics;
pub mod noise;
pub mod pairs;
pub mod scalar;
pub mod wnnm;

pub use error::{Error, Result};
pub use scalar::Real;

/// Single-precision image, the working type of the denoiser and CLI.
pub type GrayImage = image::Image<f32>;
/// Double-precision image for reference computations.
pub type GrayImage64 = image::Image<f64>;
pub type PatchStack = block_match::PatchStack<f32>;
pub type PatchStack64 = block_match::PatchStack<f64>;
pub type StackEstimate = wnnm::StackEstimate<f32>;
pub type StackEstimate64 = wnnm::StackEstimate<f64>;

pub use block_match::{match_block, reference_positions, PatchGeometry};
pub use image::{crop_masked, pad_to, Image, Mask};
pub use io::{load_image, save_image};
pub use metrics::{psnr, ssim, SsimParams};
pub use noise::{add_speckle, NoiseSpec};
pub use wnnm::{denoising_intensity_preset, wnnm_denoise, Intensity, Method, WnnmParams};
