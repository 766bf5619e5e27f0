//! Synthetic multiplicative speckle.
//!
//! A noisy pixel is `y = x + n * x` with `n = sqrt(12 * sigma) * u` and
//! `u ~ U(-0.5, 0.5)`, so `Var(n) = sigma`. The uniform draws come from a
//! ChaCha8 stream seeded with `seed_from_u64(seed)`, one draw per pixel in
//! row-major order, each draw being `(next_u64 >> 11) * 2^-53 - 0.5`.
//! The stream is platform independent; the same spec always reproduces the
//! same field.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        let spec = Self { sigma, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sigma.is_nan() || self.sigma < 0.0 || self.sigma.is_infinite() {
            return Err(Error::NegativeSigma(self.sigma));
        }
        Ok(())
    }

    /// Stream of multiplicative noise values `n` for this spec.
    pub fn field(&self) -> SpeckleField {
        SpeckleField {
            rng: ChaCha8Rng::seed_from_u64(self.seed),
            scale: (12.0 * self.sigma).sqrt(),
        }
    }
}

/// Infinite iterator over the multiplicative noise values of a [`NoiseSpec`].
pub struct SpeckleField {
    rng: ChaCha8Rng,
    scale: f64,
}

impl Iterator for SpeckleField {
    type Item = f64;

    #[inline]
    fn next(&mut self) -> Option<f64> {
        let u: f64 = self.rng.random::<f64>() - 0.5;
        Some(self.scale * u)
    }
}

/// Adds speckle to a `[0, 1]` image and clamps the result to `[0, 1]`.
pub fn add_speckle<T: Real>(img: &Image<T>, spec: NoiseSpec) -> Result<Image<T>> {
    spec.validate()?;
    if spec.sigma == 0.0 {
        return Ok(img.clone());
    }
    let data = img
        .data()
        .iter()
        .zip(spec.field())
        .map(|(&x, n)| {
            let x = x.to_f64_lossy();
            T::of((x + n * x).clamp(0.0, 1.0))
        })
        .collect();
    Image::new(img.height(), img.width(), data)
}
