//! Grayscale raster, validity mask and the padding helpers built on them.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major grayscale image with nominal intensities in `[0, 1]`.
///
/// Every constructor rejects empty dimensions and non-finite samples, so a
/// value of this type always satisfies `data.len() == height * width`.
#[derive(Clone, Debug, PartialEq)]
pub struct Image<T = f32> {
    height: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Real> Image<T> {
    pub fn new(height: usize, width: usize, data: Vec<T>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be positive, got {height}x{width}"
            )));
        }
        if data.len() != height * width {
            return Err(Error::InvalidImage(format!(
                "{height}x{width} image needs {} samples, got {}",
                height * width,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !num_traits::Float::is_finite(*v)) {
            return Err(Error::InvalidImage(format!(
                "non-finite sample at index {i}"
            )));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    /// Constant image. Panics on zero dimensions or a non-finite value.
    pub fn filled(height: usize, width: usize, value: T) -> Self {
        Self::new(height, width, vec![value; height * width]).expect("valid constant image")
    }

    /// Builds an image from `f(row, col)`. Panics if `f` yields a non-finite value.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self::new(height, width, data).expect("valid generated image")
    }

    /// Wraps data produced by internal arithmetic, replacing any non-finite
    /// sample with zero so the finiteness invariant survives.
    pub(crate) fn from_raw(height: usize, width: usize, mut data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), height * width);
        for v in &mut data {
            if !num_traits::Float::is_finite(*v) {
                *v = T::zero();
            }
        }
        Self {
            height,
            width,
            data,
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[T] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    /// Applies `f` to every sample.
    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self::from_raw(self.height, self.width, self.data.iter().map(|&v| f(v)).collect())
    }

    pub fn clamp_unit(&self) -> Self {
        self.map(|v| num_traits::Float::min(num_traits::Float::max(v, T::zero()), T::one()))
    }

    /// Converts the sample type, e.g. `f32` to `f64` for reference computations.
    pub fn convert<U: Real>(&self) -> Image<U> {
        Image::from_raw(
            self.height,
            self.width,
            self.data.iter().map(|v| U::of(v.to_f64_lossy())).collect(),
        )
    }

    /// Rounds every sample to the nearest 8-bit level, as saving and
    /// reloading would.
    pub fn quantize_u8(&self) -> Self {
        self.map(|v| T::of(f64::from(crate::io::quantize(v.to_f64_lossy())) / 255.0))
    }

    pub fn sub_image(&self, top: usize, left: usize, height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 || top + height > self.height || left + width > self.width {
            return Err(Error::InvalidImage(format!(
                "sub-image {height}x{width} at ({top}, {left}) exceeds {}x{}",
                self.height, self.width
            )));
        }
        let mut data = Vec::with_capacity(height * width);
        for r in top..top + height {
            data.extend_from_slice(&self.row(r)[left..left + width]);
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub(crate) fn ensure_same_dims(&self, other: &Self) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                left: self.dims(),
                right: other.dims(),
            });
        }
        Ok(())
    }
}

/// Validity mask for a padded image: `true` marks original content.
///
/// The valid region is always a rectangle anchored at the top-left corner.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask {
    height: usize,
    width: usize,
    bits: Vec<bool>,
}

impl Mask {
    /// Mask of `height x width` whose top-left `valid_h x valid_w` block is set.
    pub fn rect(height: usize, width: usize, valid_h: usize, valid_w: usize) -> Result<Self> {
        if valid_h > height || valid_w > width {
            return Err(Error::InvalidMask);
        }
        let bits = (0..height * width)
            .map(|i| i / width < valid_h && i % width < valid_w)
            .collect();
        Ok(Self {
            height,
            width,
            bits,
        })
    }

    /// Validates arbitrary row-major bits against the anchored-rectangle rule.
    pub fn from_bits(height: usize, width: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != height * width {
            return Err(Error::InvalidMask);
        }
        let mask = Self {
            height,
            width,
            bits,
        };
        mask.valid_extent()?;
        Ok(mask)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn is_valid(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    /// Height and width of the valid rectangle.
    pub fn valid_extent(&self) -> Result<(usize, usize)> {
        let valid_w = self.bits[..self.width].iter().take_while(|b| **b).count();
        let valid_h = (0..self.height)
            .take_while(|&r| self.bits[r * self.width])
            .count();
        if valid_w == 0 || valid_h == 0 {
            return Err(Error::InvalidMask);
        }
        let consistent = self
            .bits
            .iter()
            .enumerate()
            .all(|(i, &b)| b == (i / self.width < valid_h && i % self.width < valid_w));
        if consistent {
            Ok((valid_h, valid_w))
        } else {
            Err(Error::InvalidMask)
        }
    }
}

/// Zero-pads `img` on the right and bottom up to `target_h x target_w`.
pub fn pad_to<T: Real>(img: &Image<T>, target_h: usize, target_w: usize) -> Result<(Image<T>, Mask)> {
    let (h, w) = img.dims();
    if target_h < h || target_w < w {
        return Err(Error::PadTarget {
            target: (target_h, target_w),
            source_dims: (h, w),
        });
    }
    let mut data = vec![T::zero(); target_h * target_w];
    for r in 0..h {
        data[r * target_w..r * target_w + w].copy_from_slice(img.row(r));
    }
    let padded = Image {
        height: target_h,
        width: target_w,
        data,
    };
    Ok((padded, Mask::rect(target_h, target_w, h, w)?))
}

/// Extracts the valid rectangle of `mask` from `img`; inverse of [`pad_to`].
pub fn crop_masked<T: Real>(img: &Image<T>, mask: &Mask) -> Result<Image<T>> {
    if img.dims() != (mask.height, mask.width) {
        return Err(Error::DimensionMismatch {
            left: img.dims(),
            right: (mask.height, mask.width),
        });
    }
    let (vh, vw) = mask.valid_extent()?;
    img.sub_image(0, 0, vh, vw)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_construction() {
        assert!(Image::<f32>::new(0, 3, vec![]).is_err());
        assert!(Image::<f32>::new(2, 2, vec![0.0; 3]).is_err());
        assert!(Image::<f32>::new(1, 2, vec![0.0, f32::NAN]).is_err());
        assert!(Image::<f64>::new(1, 1, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn pad_identity() {
        let img = Image::<f32>::from_fn(3, 4, |r, c| (r * 4 + c) as f32 / 12.0);
        let (p, m) = pad_to(&img, 3, 4).unwrap();
        assert_eq!(p, img);
        assert!(m.bits().iter().all(|b| *b));
    }

    #[test]
    fn pad_two_by_two_ones() {
        let img = Image::<f32>::filled(2, 2, 1.0);
        let (p, m) = pad_to(&img, 3, 3).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let inside = r < 2 && c < 2;
                assert_eq!(p.get(r, c), if inside { 1.0 } else { 0.0 });
                assert_eq!(m.is_valid(r, c), inside);
            }
        }
    }

    #[test]
    fn pad_ultrasound_frame_to_network_input() {
        let img = Image::<f32>::from_fn(600, 485, |r, c| ((r * 31 + c * 7) % 256) as f32 / 255.0);
        let (p, m) = pad_to(&img, 600, 600).unwrap();
        assert_eq!(p.dims(), (600, 600));
        assert_eq!(m.valid_extent().unwrap(), (600, 485));
        for r in 0..600 {
            assert!(p.row(r)[485..].iter().all(|v| *v == 0.0));
            assert!(!m.is_valid(r, 485) && m.is_valid(r, 484));
        }
        let back = crop_masked(&p, &m).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn pad_rejects_smaller_target() {
        let img = Image::<f32>::filled(4, 4, 0.5);
        assert!(matches!(pad_to(&img, 3, 5), Err(Error::PadTarget { .. })));
    }

    #[test]
    fn crop_errors() {
        let img = Image::<f32>::filled(4, 4, 0.5);
        let m = Mask::rect(4, 5, 2, 2).unwrap();
        assert!(matches!(crop_masked(&img, &m), Err(Error::DimensionMismatch { .. })));
        let mut bits = vec![true; 16];
        bits[5] = false;
        assert!(matches!(Mask::from_bits(4, 4, bits), Err(Error::InvalidMask)));
        assert!(Mask::from_bits(2, 2, vec![false; 4]).is_err());
    }

    #[test]
    fn crop_with_full_mask_is_identity() {
        let img = Image::<f64>::from_fn(5, 3, |r, c| (r + c) as f64 / 10.0);
        let m = Mask::rect(5, 3, 5, 3).unwrap();
        assert_eq!(crop_masked(&img, &m).unwrap(), img);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn pad_then_crop_round_trips(
                h in 1usize..12, w in 1usize..12, dh in 0usize..6, dw in 0usize..6, seed in any::<u64>()
            ) {
                let img = Image::<f32>::from_fn(h, w, |r, c| {
                    let x = seed.wrapping_add((r * 131 + c) as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                    (x >> 40) as f32 / (1u64 << 24) as f32
                });
                let (p, m) = pad_to(&img, h + dh, w + dw).unwrap();
                prop_assert_eq!(crop_masked(&p, &m).unwrap(), img);
            }
        }
    }
}
