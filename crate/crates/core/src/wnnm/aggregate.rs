//! Collaborative aggregation of overlapping patch estimates.

use crate::error::{Error, Result};
use crate::image::Image;
use crate::scalar::Real;
use crate::wnnm::StackEstimate;

/// Running weighted sums of patch estimates over an `h x w` canvas.
///
/// Sums are kept in `f64` whatever the sample type. Estimates must be added
/// in a fixed order for the result to be bitwise reproducible.
#[derive(Clone, Debug)]
pub struct Accumulator<T> {
    height: usize,
    width: usize,
    numerator: Vec<f64>,
    denominator: Vec<f64>,
    _sample: std::marker::PhantomData<T>,
}

impl<T: Real> Accumulator<T> {
    pub fn new(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            numerator: vec![0.0; height * width],
            denominator: vec![0.0; height * width],
            _sample: std::marker::PhantomData,
        }
    }

    pub fn add(&mut self, est: &StackEstimate<T>) -> Result<()> {
        let p = est.patch_size;
        if est.denoised.nrows() != p * p || est.denoised.ncols() != est.positions.len() {
            return Err(Error::InvalidParams("estimate matrix does not match its positions".into()));
        }
        let w = est.weight.to_f64_lossy();
        for (j, &(r, c)) in est.positions.iter().enumerate() {
            if r + p > self.height || c + p > self.width {
                return Err(Error::InvalidParams(format!(
                    "patch at ({r}, {c}) exceeds the {}x{} canvas",
                    self.height, self.width
                )));
            }
            let col = est.denoised.column(j);
            for i in 0..p {
                let base = (r + i) * self.width + c;
                let num = &mut self.numerator[base..base + p];
                let den = &mut self.denominator[base..base + p];
                for k in 0..p {
                    num[k] += w * col[i * p + k].to_f64_lossy();
                    den[k] += w;
                }
            }
        }
        Ok(())
    }

    pub fn finish(self) -> Result<Image<T>> {
        let mut data = Vec::with_capacity(self.numerator.len());
        for (i, (n, d)) in self.numerator.iter().zip(&self.denominator).enumerate() {
            if *d <= 0.0 {
                return Err(Error::Uncovered {
                    row: i / self.width,
                    col: i % self.width,
                });
            }
            data.push(T::of(n / d));
        }
        Ok(Image::from_raw(self.height, self.width, data))
    }
}

/// Weighted average of every patch estimate covering each pixel.
pub fn aggregate<T: Real>(estimates: &[StackEstimate<T>], height: usize, width: usize) -> Result<Image<T>> {
    let mut acc = Accumulator::new(height, width);
    for est in estimates {
        acc.add(est)?;
    }
    acc.finish()
}
