//! Weighted singular-value shrinkage of a single patch stack.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::block_match::{PatchStack, Pos};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::wnnm::WnnmParams;

/// Denoised stack ready for aggregation.
#[derive(Clone, Debug, PartialEq)]
pub struct StackEstimate<T> {
    pub positions: Vec<Pos>,
    pub patch_size: usize,
    /// `p² x K`, column `j` is the estimate of the patch at `positions[j]`.
    pub denoised: DMatrix<T>,
    pub weight: T,
    /// Number of singular values that survived shrinkage.
    pub rank: usize,
}

/// Shrinks a non-increasing singular spectrum of a `p² x k` stack.
///
/// With `s = local_sigma`, each value is mapped as
///
/// ```text
/// signal_i = sqrt(max(sigma_i² - k s², 0))
/// w_i      = c sqrt(k) s² / (signal_i + eps)
/// sigma_i' = max(sigma_i - w_i, 0)
/// ```
///
/// The map is monotone in `sigma_i`, so the output stays non-increasing and
/// never exceeds the input.
pub fn shrink_singular_values<T: Real>(
    singular: &[T],
    k: usize,
    local_sigma: T,
    c: T,
    eps: T,
) -> Vec<T> {
    let kf = T::of(k as f64);
    let var = local_sigma * local_sigma;
    let noise_energy = kf * var;
    let numerator = c * num_traits::Float::sqrt(kf) * var;
    singular
        .iter()
        .map(|&s| {
            let signal = num_traits::Float::sqrt(num_traits::Float::max(s * s - noise_energy, T::zero()));
            let w = numerator / (signal + eps);
            num_traits::Float::max(s - w, T::zero())
        })
        .collect()
}

/// Low-rank estimate of one stack at noise level `local_sigma` (unit scale).
///
/// The mean patch is removed before the decomposition and restored after.
/// Singular vectors come from the eigendecomposition of the smaller Gram
/// matrix of the centred stack. The aggregation weight is
/// `1 / (1 + rank)` where `rank` counts the surviving singular values.
pub fn shrink_stack<T: Real>(
    stack: &PatchStack<T>,
    local_sigma: T,
    params: &WnnmParams,
) -> Result<StackEstimate<T>> {
    let patch_size = params.geometry.patch_size;
    if stack.matrix.nrows() != patch_size * patch_size || stack.matrix.ncols() != stack.members.len() {
        return Err(Error::InvalidParams(format!(
            "stack matrix is {}x{}, expected {}x{}",
            stack.matrix.nrows(),
            stack.matrix.ncols(),
            patch_size * patch_size,
            stack.members.len()
        )));
    }
    let (denoised, rank) = shrink_matrix(
        &stack.matrix,
        local_sigma,
        T::of(params.c),
        T::of(params.eps),
    )?;
    Ok(StackEstimate {
        positions: stack.members.clone(),
        patch_size,
        denoised,
        weight: T::one() / T::of((1 + rank) as f64),
        rank,
    })
}

/// Centre, shrink and restore a stack matrix. Returns the estimate and the
/// number of retained singular values.
pub fn shrink_matrix<T: Real>(
    matrix: &DMatrix<T>,
    local_sigma: T,
    c: T,
    eps: T,
) -> Result<(DMatrix<T>, usize)> {
    let (n, k) = matrix.shape();
    let mean = mean_patch(matrix);
    let mut centred = matrix.clone();
    for mut col in centred.column_iter_mut() {
        col -= &mean;
    }

    // Gram matrix of the smaller side: C Cᵀ = U Σ² Uᵀ or Cᵀ C = V Σ² Vᵀ.
    let left = n <= k;
    let gram = if left {
        &centred * centred.transpose()
    } else {
        centred.transpose() * &centred
    };
    let eig = SymmetricEigen::try_new(gram, T::default_epsilon(), 0).ok_or_else(|| {
        Error::Other("eigendecomposition of the stack Gram matrix did not converge".into())
    })?;

    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    let singular_of = |i: usize| num_traits::Float::sqrt(num_traits::Float::max(eig.eigenvalues[i], T::zero()));
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    // Values at round-off level are numerically zero.
    let tol = T::default_epsilon() * T::of(n.max(k) as f64) * matrix.norm();
    let singular: Vec<T> = order
        .iter()
        .map(|&i| singular_of(i))
        .map(|s| if s <= tol { T::zero() } else { s })
        .collect();
    let shrunk = shrink_singular_values(&singular, k, local_sigma, c, eps);

    let kept: Vec<(usize, T)> = order
        .iter()
        .zip(singular.iter().zip(&shrunk))
        .filter(|(_, (s, sh))| **sh > T::zero() && **s > T::zero())
        .map(|(&i, (&s, &sh))| (i, sh / s))
        .collect();
    let rank = kept.len();

    let mut out = DMatrix::<T>::zeros(n, k);
    if rank > 0 {
        let basis = DMatrix::from_fn(eig.eigenvectors.nrows(), rank, |r, j| {
            eig.eigenvectors[(r, kept[j].0)]
        });
        let gains = DMatrix::from_diagonal(&DVector::from_iterator(rank, kept.iter().map(|(_, g)| *g)));
        out = if left {
            // U_r diag(g) U_rᵀ C
            let proj = basis.transpose() * &centred;
            &basis * (gains * proj)
        } else {
            // C V_r diag(g) V_rᵀ
            let proj = &centred * &basis;
            (proj * gains) * basis.transpose()
        };
    }
    for mut col in out.column_iter_mut() {
        col += &mean;
    }
    Ok((out, rank))
}

/// Mean over columns; rows holding a single repeated value keep it exactly.
fn mean_patch<T: Real>(matrix: &DMatrix<T>) -> DVector<T> {
    let k = T::of(matrix.ncols() as f64);
    DVector::from_iterator(
        matrix.nrows(),
        matrix.row_iter().map(|row| {
            let first = row[0];
            if row.iter().all(|v| *v == first) {
                first
            } else {
                row.sum() / k
            }
        }),
    )
}
