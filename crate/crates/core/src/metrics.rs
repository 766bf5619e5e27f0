//! Full-reference quality metrics on the `[0, 255]` scale.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::scalar::Real;

pub const PEAK: f64 = 255.0;

/// Mean squared error after scaling both images to `[0, 255]`, unquantized.
pub fn mse<T: Real>(reference: &Image<T>, test: &Image<T>) -> Result<f64> {
    reference.ensure_same_dims(test)?;
    let sum: f64 = reference
        .data()
        .iter()
        .zip(test.data())
        .map(|(&a, &b)| {
            let d = (a.to_f64_lossy() - b.to_f64_lossy()) * PEAK;
            d * d
        })
        .sum();
    Ok(sum / reference.data().len() as f64)
}

/// PSNR in decibels; `f64::INFINITY` for identical images.
pub fn psnr<T: Real>(reference: &Image<T>, test: &Image<T>) -> Result<f64> {
    let mse = mse(reference, test)?;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (PEAK * PEAK / mse).log10())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SsimParams {
    /// Odd side length of the Gaussian window.
    pub window: usize,
    pub window_sigma: f64,
    pub k1: f64,
    pub k2: f64,
    /// Dynamic range of the scaled intensities.
    pub peak: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self {
            window: 11,
            window_sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            peak: PEAK,
        }
    }
}

impl SsimParams {
    pub fn validate(&self) -> Result<()> {
        if self.window < 3 || self.window.is_multiple_of(2) {
            return Err(Error::InvalidParams(format!(
                "SSIM window must be odd and >= 3, got {}",
                self.window
            )));
        }
        if !(self.window_sigma > 0.0 && self.k1 > 0.0 && self.k2 > 0.0 && self.peak > 0.0) {
            return Err(Error::InvalidParams(
                "SSIM sigma, k1, k2 and peak must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
    pub fn kernel(&self) -> Vec<f64> {
        let r = (self.window / 2) as f64;
        let taps: Vec<f64> = (0..self.window)
            .map(|i| (-((i as f64 - r).powi(2)) / (2.0 * self.window_sigma.powi(2))).exp())
            .collect();
        let total: f64 = taps.iter().sum();
        taps.into_iter().map(|t| t / total).collect()
    }
}

/// Separable 'valid' correlation of a row-major `h x w` buffer.
fn filter_valid(src: &[f64], h: usize, w: usize, taps: &[f64]) -> Vec<f64> {
    let n = taps.len();
    let (oh, ow) = (h - n + 1, w - n + 1);
    let mut horiz = vec![0.0; h * ow];
    for r in 0..h {
        let row = &src[r * w..(r + 1) * w];
        for c in 0..ow {
            horiz[r * ow + c] = taps.iter().zip(&row[c..c + n]).map(|(t, v)| t * v).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for r in 0..oh {
        for (i, t) in taps.iter().enumerate() {
            let src_row = &horiz[(r + i) * ow..(r + i + 1) * ow];
            for (o, v) in out[r * ow..(r + 1) * ow].iter_mut().zip(src_row) {
                *o += t * v;
            }
        }
    }
    out
}

/// Mean structural similarity over every fully contained window.
pub fn ssim<T: Real>(reference: &Image<T>, test: &Image<T>, params: &SsimParams) -> Result<f64> {
    params.validate()?;
    reference.ensure_same_dims(test)?;
    let (h, w) = reference.dims();
    if h < params.window || w < params.window {
        return Err(Error::TooSmall {
            dims: (h, w),
            what: "SSIM window",
            size: params.window,
        });
    }
    let scale = |img: &Image<T>| -> Vec<f64> { img.data().iter().map(|v| v.to_f64_lossy() * PEAK).collect() };
    let x = scale(reference);
    let y = scale(test);
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a * b).collect();

    let taps = params.kernel();
    let [mx, my, exx, eyy, exy] = [&x, &y, &xx, &yy, &xy].map(|buf| filter_valid(buf, h, w, &taps));

    let c1 = (params.k1 * params.peak).powi(2);
    let c2 = (params.k2 * params.peak).powi(2);
    let total: f64 = (0..mx.len())
        .map(|i| {
            let (ux, uy) = (mx[i], my[i]);
            let vx = exx[i] - ux * ux;
            let vy = eyy[i] - uy * uy;
            let cxy = exy[i] - ux * uy;
            ((2.0 * ux * uy + c1) * (2.0 * cxy + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2))
        })
        .sum();
    Ok(total / mx.len() as f64)
}

/// How per-image metric rows are summarized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reducer {
    #[default]
    Mean,
    Median,
}

impl Reducer {
    /// `NaN` for an empty slice.
    pub fn apply(self, values: &[f64]) -> f64 {
        match self {
            Reducer::Mean => mean(values),
            Reducer::Median => median(values),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Reducer::Mean => "mean",
            Reducer::Median => "median",
        }
    }
}

impl fmt::Display for Reducer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Reducer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Reducer::Mean),
            "median" => Ok(Reducer::Median),
            other => Err(Error::InvalidParams(format!("unknown aggregate {other:?}"))),
        }
    }
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}
