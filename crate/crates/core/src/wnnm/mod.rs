//! Weighted nuclear norm minimization denoiser.

mod aggregate;
mod denoise;
mod params;
mod shrink;

pub use aggregate::{aggregate, Accumulator};
pub use denoise::{residual_sigma, speckle_nsig, wnnm_denoise};
pub use params::{denoising_intensity_preset, Intensity, Method, WnnmParams};
pub use shrink::{shrink_matrix, shrink_singular_values, shrink_stack, StackEstimate};
