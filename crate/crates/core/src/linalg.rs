//! Symmetric eigensolvers and the commutator norm.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use rand_distr::{Distribution, StandardNormal};

use crate::{math, seed, Error, Result};

const EIGEN_EPS: f64 = f64::EPSILON;
const EIGEN_MAX_ITER: usize = 10_000;

/// Below this size [`extremal_eigenpairs`] just uses the dense solver.
pub const DENSE_CUTOFF: usize = 64;

/// Eigenpairs of a symmetric matrix, eigenvalues ascending; column `k` of
/// `vectors` belongs to `values[k]`.
#[derive(Debug, Clone)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

/// Full dense eigendecomposition with ascending eigenvalues.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> Result<Eigenpairs> {
    check_square(m)?;
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let eig = SymmetricEigen::try_new(m.clone(), EIGEN_EPS, EIGEN_MAX_ITER).ok_or(Error::EigenNonConvergence)?;
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), m.nrows(), |i, c| eig.eigenvectors[(i, order[c])]);
    Ok(Eigenpairs { values, vectors })
}

/// Which end of the spectrum to extract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extreme {
    Lowest,
    Highest,
}

/// The `k` eigenpairs at one end of the spectrum, most extreme first.
///
/// Uses Lanczos with full reorthogonalization, enlarging the Krylov space
/// until every wanted Ritz pair has residual below `1e-9 ‖A‖`; the dense
/// solver handles small matrices. `seed` fixes the start vector.
pub fn extremal_eigenpairs(m: &DMatrix<f64>, k: usize, which: Extreme, seed: u64) -> Result<Eigenpairs> {
    check_square(m)?;
    let n = m.nrows();
    let k = k.min(n);
    if n <= DENSE_CUTOFF {
        let all = symmetric_eigen(m)?;
        let cols: Vec<usize> = match which {
            Extreme::Lowest => (0..k).collect(),
            Extreme::Highest => (0..k).map(|c| n - 1 - c).collect(),
        };
        return Ok(Eigenpairs {
            values: cols.iter().map(|&c| all.values[c]).collect(),
            vectors: all.vectors.select_columns(&cols),
        });
    }
    let mut rng = seed::rng(seed);
    let start = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
    let scale = m.amax().max(f64::MIN_POSITIVE) * math::sqrt(n as f64);
    let mut steps = (4 * k + 40).min(n);
    loop {
        let (basis, alpha, beta) = lanczos(m, &start, steps);
        let dim = alpha.len();
        let t = DMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let ritz = symmetric_eigen(&t)?;
        let cols: Vec<usize> = match which {
            Extreme::Lowest => (0..k.min(dim)).collect(),
            Extreme::Highest => (0..k.min(dim)).map(|c| dim - 1 - c).collect(),
        };
        // Residual of a Ritz pair is |β_last · y_last|.
        let last_beta = if dim < n { beta.last().copied().unwrap_or(0.0) } else { 0.0 };
        let converged = cols.len() == k
            && cols
                .iter()
                .all(|&c| math::abs(last_beta * ritz.vectors[(dim - 1, c)]) <= 1e-9 * scale);
        if converged || dim >= n || steps >= n {
            let y = ritz.vectors.select_columns(&cols);
            let mut vectors = &basis * y;
            for mut col in vectors.column_iter_mut() {
                let norm = col.norm();
                if norm > 0.0 {
                    col /= norm;
                }
            }
            return Ok(Eigenpairs {
                values: cols.iter().map(|&c| ritz.values[c]).collect(),
                vectors,
            });
        }
        steps = (steps * 2).min(n);
    }
}

/// Lanczos tridiagonalization with full reorthogonalization.
///
/// Returns the orthonormal basis (columns), the diagonal `alpha` and the
/// off-diagonal `beta`; `beta` has one extra trailing entry, the norm of the
/// final residual. Stops early on an invariant subspace.
fn lanczos(m: &DMatrix<f64>, start: &DVector<f64>, steps: usize) -> (DMatrix<f64>, Vec<f64>, Vec<f64>) {
    let n = m.nrows();
    let mut basis = DMatrix::<f64>::zeros(n, steps);
    let mut alpha = Vec::with_capacity(steps);
    let mut beta = Vec::with_capacity(steps);
    let mut q = start / start.norm();
    let mut w = DVector::<f64>::zeros(n);
    for step in 0..steps {
        basis.set_column(step, &q);
        w.gemv(1.0, m, &q, 0.0);
        let a = q.dot(&w);
        alpha.push(a);
        // Two passes of classical Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            let active = basis.columns(0, step + 1);
            let coeffs = active.tr_mul(&w);
            w.gemv(-1.0, &active, &coeffs, 1.0);
        }
        let b = w.norm();
        beta.push(b);
        if b <= 1e-12 * a.abs().max(1.0) {
            break;
        }
        q = &w / b;
    }
    let dim = alpha.len();
    (basis.columns(0, dim).into_owned(), alpha, beta)
}

/// Spectral norm of `AB − BA`.
pub fn commutator_norm(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    check_square(a)?;
    if b.shape() != a.shape() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    let c = a * b - b * a;
    spectral_norm(&c)
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> Result<f64> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let svd = SVD::try_new(m.clone(), false, false, EIGEN_EPS, EIGEN_MAX_ITER).ok_or(Error::EigenNonConvergence)?;
    Ok(svd.singular_values.iter().copied().fold(0.0, f64::max))
}

fn check_square(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    Ok(())
}
