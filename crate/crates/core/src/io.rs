//! 8-bit grayscale file I/O: binary PGM (P5, maxval 255) and PNG.
//!
//! Samples map to `[0, 1]` as `v / 255` on load. On save they are clamped to
//! `[0, 1]` and quantized with round-half-up, `floor(v * 255 + 0.5)`.

use std::fs;
use std::path::Path;

use image::{ColorType, ImageFormat};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::scalar::Real;

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Clamp-and-round a unit-range intensity to an 8-bit level.
#[inline]
pub fn quantize(v: f64) -> u8 {
    let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    (v * 255.0 + 0.5).floor() as u8
}

pub fn load_image<T: Real>(path: impl AsRef<Path>) -> Result<Image<T>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(path, &bytes)
}

/// Decodes an in-memory PGM or PNG; `path` is used only in error values.
pub fn decode<T: Real>(path: &Path, bytes: &[u8]) -> Result<Image<T>> {
    if bytes.starts_with(b"P5") {
        decode_pgm(path, bytes)
    } else if bytes.starts_with(PNG_SIGNATURE) {
        decode_png(path, bytes)
    } else {
        let magic = String::from_utf8_lossy(&bytes[..bytes.len().min(2)]).into_owned();
        Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            reason: format!("unrecognized magic {magic:?}; expected binary PGM (P5) or PNG"),
        })
    }
}

fn unsupported(path: &Path, reason: impl Into<String>) -> Error {
    Error::UnsupportedFormat {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn decode_pgm<T: Real>(path: &Path, bytes: &[u8]) -> Result<Image<T>> {
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|b| *b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Truncated {
                path: path.to_path_buf(),
                expected: pos + 1,
                found: bytes.len(),
            });
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| unsupported(path, "malformed PGM header"))?;
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        Some(_) => return Err(unsupported(path, "malformed PGM header")),
        None => {
            return Err(Error::Truncated {
                path: path.to_path_buf(),
                expected: pos + 1,
                found: bytes.len(),
            })
        }
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(unsupported(
            path,
            format!("PGM maxval {maxval}; only 8-bit (255) is supported"),
        ));
    }
    if width == 0 || height == 0 {
        return Err(unsupported(path, "zero image dimension"));
    }
    let n = width * height;
    let payload = &bytes[pos..];
    if payload.len() < n {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected: n,
            found: payload.len(),
        });
    }
    Ok(bytes_to_image(height, width, &payload[..n]))
}

fn decode_png<T: Real>(path: &Path, bytes: &[u8]) -> Result<Image<T>> {
    let decoded = image::load_from_memory_with_format(bytes, ImageFormat::Png).map_err(|e| match e {
        image::ImageError::IoError(err) if err.kind() == std::io::ErrorKind::UnexpectedEof => {
            Error::Truncated {
                path: path.to_path_buf(),
                expected: 0,
                found: bytes.len(),
            }
        }
        other => unsupported(path, other.to_string()),
    })?;
    if decoded.color() != ColorType::L8 {
        return Err(unsupported(
            path,
            format!("PNG color type {:?}; only 8-bit grayscale is supported", decoded.color()),
        ));
    }
    let gray = decoded.into_luma8();
    let (w, h) = gray.dimensions();
    Ok(bytes_to_image(h as usize, w as usize, gray.as_raw()))
}

fn bytes_to_image<T: Real>(height: usize, width: usize, bytes: &[u8]) -> Image<T> {
    let data = bytes.iter().map(|&b| T::of(f64::from(b) / 255.0)).collect();
    Image::new(height, width, data).expect("8-bit samples are finite")
}

pub fn to_bytes<T: Real>(img: &Image<T>) -> Vec<u8> {
    img.data().iter().map(|v| quantize(v.to_f64_lossy())).collect()
}

/// Binary P5 encoding of `img`.
pub fn encode_pgm<T: Real>(img: &Image<T>) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(to_bytes(img));
    out
}

/// Writes PNG when the extension is `.png` (case-insensitive), P5 otherwise.
pub fn save_image<T: Real>(img: &Image<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let is_png = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"));
    if is_png {
        let buf = image::GrayImage::from_raw(img.width() as u32, img.height() as u32, to_bytes(img))
            .expect("buffer length matches dimensions");
        buf.save_with_format(path, ImageFormat::Png).map_err(|e| match e {
            image::ImageError::IoError(err) => Error::io(path, err),
            other => Error::Other(format!("{}: {other}", path.display())),
        })
    } else {
        fs::write(path, encode_pgm(img)).map_err(|e| Error::io(path, e))
    }
}

/// True for file names this module can read.
pub fn is_supported_extension(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| ["pgm", "png"].iter().any(|x| e.eq_ignore_ascii_case(x)))
}
