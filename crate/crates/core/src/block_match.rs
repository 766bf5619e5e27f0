//! Patch geometry, reference-patch grid and similarity search.
//!
//! Patches are addressed by their top-left pixel. A stack collects the
//! reference patch followed by its nearest neighbours inside a search
//! window, vectorized row-major into the columns of a `p² x K` matrix.

use std::cmp::Ordering;
use std::ops::Range;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::scalar::Real;

/// Top-left `(row, col)` of a patch.
pub type Pos = (usize, usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchGeometry {
    /// Side length of a square patch.
    pub patch_size: usize,
    /// Stride between reference patches.
    pub step: usize,
    /// Side length of the square search window centred on the reference patch.
    pub window: usize,
    /// Number of patches kept per stack, reference included.
    pub stack_size: usize,
}

impl PatchGeometry {
    pub const BASELINE: Self = Self {
        patch_size: 7,
        step: 2,
        window: 30,
        stack_size: 70,
    };

    /// One reference patch per pixel with a wider window and deeper stacks.
    pub const TUNED: Self = Self {
        patch_size: 7,
        step: 1,
        window: 40,
        stack_size: 90,
    };

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParams(msg));
        if self.patch_size < 2 {
            return fail(format!("patch_size must be >= 2, got {}", self.patch_size));
        }
        if self.step < 1 {
            return fail("step must be >= 1".into());
        }
        if self.window < self.patch_size {
            return fail(format!(
                "window ({}) must be at least patch_size ({})",
                self.window, self.patch_size
            ));
        }
        if self.stack_size < 1 {
            return fail("stack_size must be >= 1".into());
        }
        Ok(())
    }

    pub fn patch_len(&self) -> usize {
        self.patch_size * self.patch_size
    }

    fn ensure_fits(&self, h: usize, w: usize) -> Result<()> {
        if h < self.patch_size || w < self.patch_size {
            return Err(Error::TooSmall {
                dims: (h, w),
                what: "patch",
                size: self.patch_size,
            });
        }
        Ok(())
    }

    /// Candidate top-left rows and columns for a reference at `pos`.
    ///
    /// The window is centred on the reference patch and clipped to the
    /// image, so every candidate patch lies inside both.
    pub fn search_ranges(&self, pos: Pos, h: usize, w: usize) -> (Range<usize>, Range<usize>) {
        let reach = self.window - self.patch_size;
        let before = reach / 2;
        let axis = |p: usize, extent: usize| {
            let last = extent - self.patch_size;
            let lo = p.saturating_sub(before);
            let hi = (p + (reach - before)).min(last);
            lo..hi + 1
        };
        (axis(pos.0, h), axis(pos.1, w))
    }
}

/// Reference patch plus its nearest neighbours.
#[derive(Clone, Debug, PartialEq)]
pub struct PatchStack<T> {
    pub ref_pos: Pos,
    /// `members[0] == ref_pos`; the rest by non-decreasing distance.
    pub members: Vec<Pos>,
    pub distances: Vec<T>,
    /// Column `j` is the row-major vectorization of the patch at `members[j]`.
    pub matrix: DMatrix<T>,
}

impl<T: Real> PatchStack<T> {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Grid positions along one axis: multiples of `step`, plus the last legal
/// position so the far border is covered.
fn axis_positions(extent: usize, patch: usize, step: usize) -> Vec<usize> {
    let last = extent - patch;
    let mut out: Vec<usize> = (0..=last).step_by(step).collect();
    if out.last() != Some(&last) {
        out.push(last);
    }
    out
}

/// Top-left positions of all reference patches, row-major.
pub fn reference_positions<T: Real>(img: &Image<T>, geo: &PatchGeometry) -> Result<Vec<Pos>> {
    reference_grid(img.height(), img.width(), geo)
}

pub fn reference_grid(h: usize, w: usize, geo: &PatchGeometry) -> Result<Vec<Pos>> {
    geo.validate()?;
    geo.ensure_fits(h, w)?;
    let rows = axis_positions(h, geo.patch_size, geo.step);
    let cols = axis_positions(w, geo.patch_size, geo.step);
    Ok(rows
        .iter()
        .flat_map(|&r| cols.iter().map(move |&c| (r, c)))
        .collect())
}

/// Mean squared difference between the patches at `a` and `b`.
#[inline]
pub fn patch_distance<T: Real>(img: &Image<T>, a: Pos, b: Pos, patch: usize) -> T {
    let mut acc = T::zero();
    for i in 0..patch {
        let ra = &img.row(a.0 + i)[a.1..a.1 + patch];
        let rb = &img.row(b.0 + i)[b.1..b.1 + patch];
        for (&x, &y) in ra.iter().zip(rb) {
            let d = x - y;
            acc += d * d;
        }
    }
    acc / T::of((patch * patch) as f64)
}

/// Nearest patches to `ref_pos`, reference first, then ascending distance with
/// ties broken by row-major candidate order.
pub fn find_matches<T: Real>(img: &Image<T>, ref_pos: Pos, geo: &PatchGeometry) -> Vec<(Pos, T)> {
    let (h, w) = img.dims();
    let p = geo.patch_size;
    debug_assert!(ref_pos.0 + p <= h && ref_pos.1 + p <= w);
    let (rows, cols) = geo.search_ranges(ref_pos, h, w);
    let mut cands: Vec<(T, u32)> = Vec::with_capacity(rows.len() * cols.len());
    let ncols = cols.len();
    for (i, r) in rows.clone().enumerate() {
        for (j, c) in cols.clone().enumerate() {
            if (r, c) == ref_pos {
                continue;
            }
            let d = patch_distance(img, ref_pos, (r, c), p);
            cands.push((d, (i * ncols + j) as u32));
        }
    }
    let by_distance = |a: &(T, u32), b: &(T, u32)| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(Ordering::Equal)
            .then(a.1.cmp(&b.1))
    };
    let keep = (geo.stack_size - 1).min(cands.len());
    if keep < cands.len() && keep > 0 {
        cands.select_nth_unstable_by(keep - 1, by_distance);
    }
    cands.truncate(keep);
    cands.sort_unstable_by(by_distance);

    let mut out = Vec::with_capacity(keep + 1);
    out.push((ref_pos, T::zero()));
    out.extend(cands.into_iter().map(|(d, idx)| {
        let idx = idx as usize;
        ((rows.start + idx / ncols, cols.start + idx % ncols), d)
    }));
    out
}

/// Gathers the patches at `members` into a `p² x K` column matrix.
pub fn extract_patches<T: Real>(img: &Image<T>, members: &[Pos], patch: usize) -> DMatrix<T> {
    let len = patch * patch;
    let mut data = Vec::with_capacity(len * members.len());
    for &(r, c) in members {
        for i in 0..patch {
            data.extend_from_slice(&img.row(r + i)[c..c + patch]);
        }
    }
    DMatrix::from_vec(len, members.len(), data)
}

/// Builds the stack for the reference patch at `ref_pos`.
pub fn match_block<T: Real>(img: &Image<T>, ref_pos: Pos, geo: &PatchGeometry) -> Result<PatchStack<T>> {
    geo.validate()?;
    geo.ensure_fits(img.height(), img.width())?;
    let p = geo.patch_size;
    if ref_pos.0 + p > img.height() || ref_pos.1 + p > img.width() {
        return Err(Error::InvalidParams(format!(
            "reference patch at {ref_pos:?} exceeds the {}x{} image",
            img.height(),
            img.width()
        )));
    }
    let matches = find_matches(img, ref_pos, geo);
    let (members, distances): (Vec<Pos>, Vec<T>) = matches.into_iter().unzip();
    let matrix = extract_patches(img, &members, p);
    Ok(PatchStack {
        ref_pos,
        members,
        distances,
        matrix,
    })
}
