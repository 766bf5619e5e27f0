use rayon::prelude::*;

use crate::block_match::{extract_patches, find_matches, reference_positions, PatchStack, Pos};
use crate::error::Result;
use crate::image::Image;
use crate::scalar::Real;
use crate::wnnm::{shrink_stack, Accumulator, WnnmParams};

/// Stacks shrunk in parallel between two sequential aggregation passes.
const CHUNK: usize = 512;

/// Noise level (unit scale) handed to shrinkage at one iteration.
///
/// `gamma * sqrt(max(nsig² / 255² - residual², 0))` where `residual²` is the
/// mean squared difference between the noisy input and the working image.
pub fn residual_sigma(nsig: f64, gamma: f64, residual_sq: f64) -> f64 {
    let target = (nsig / 255.0).powi(2);
    gamma * (target - residual_sq).max(0.0).sqrt()
}

/// Equivalent additive noise level, on the `[0, 255]` scale, of speckle with
/// intensity `sigma` on the given noisy image.
///
/// For `y = x (1 + n)` with `Var(n) = sigma`, the noise energy is
/// `sigma E[x²]` and `E[y²] = (1 + sigma) E[x²]`.
pub fn speckle_nsig<T: Real>(noisy: &Image<T>, sigma: f64) -> f64 {
    let n = noisy.data().len() as f64;
    let energy = noisy.data().iter().map(|v| v.to_f64_lossy().powi(2)).sum::<f64>() / n;
    255.0 * (sigma / (1.0 + sigma) * energy).sqrt()
}

/// Iterative low-rank denoising of `noisy`.
///
/// Each iteration re-injects `delta` of the noisy input into the current
/// estimate, optionally refreshes block matching, shrinks every stack and
/// aggregates the estimates into the next iterate. Work inside an iteration
/// runs on the ambient rayon pool; the result does not depend on its size.
pub fn wnnm_denoise<T: Real>(noisy: &Image<T>, params: &WnnmParams) -> Result<Image<T>> {
    params.validate()?;
    let refs = reference_positions(noisy, &params.geometry)?;
    let (h, w) = noisy.dims();
    let p = params.geometry.patch_size;
    let delta = T::of(params.delta);

    let mut estimate = noisy.clone();
    let mut groups: Vec<Vec<Pos>> = Vec::new();
    for k in 0..params.iterations {
        let working = if k == 0 {
            noisy.clone()
        } else {
            let data = estimate
                .data()
                .iter()
                .zip(noisy.data())
                .map(|(&x, &y)| x + delta * (y - x))
                .collect();
            Image::from_raw(h, w, data)
        };

        if k % params.match_every == 0 {
            groups = refs
                .par_iter()
                .map(|&r| {
                    find_matches(&working, r, &params.geometry)
                        .into_iter()
                        .map(|(pos, _)| pos)
                        .collect()
                })
                .collect();
        }

        let residual_sq = noisy
            .data()
            .iter()
            .zip(working.data())
            .map(|(&y, &v)| (y - v).to_f64_lossy().powi(2))
            .sum::<f64>()
            / (h * w) as f64;
        let local_sigma = T::of(residual_sigma(params.nsig, params.gamma, residual_sq));
        log::debug!("iteration {} noise level {:.6}", k + 1, local_sigma);

        let mut acc = Accumulator::new(h, w);
        for chunk in groups.chunks(CHUNK) {
            let estimates = chunk
                .par_iter()
                .map(|members| {
                    let stack = PatchStack {
                        ref_pos: members[0],
                        members: members.clone(),
                        distances: Vec::new(),
                        matrix: extract_patches(&working, members, p),
                    };
                    shrink_stack(&stack, local_sigma, params)
                })
                .collect::<Result<Vec<_>>>()?;
            for est in &estimates {
                acc.add(est)?;
            }
        }
        estimate = acc.finish()?;
    }
    Ok(estimate.clamp_unit())
}
