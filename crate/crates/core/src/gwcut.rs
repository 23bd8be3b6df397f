//! Max-cut eigenvalue bound with a correcting vector.
//!
//! For weights `W ≥ 0` with Laplacian `L = D − W`, the cut weight is
//! `Σ_ij L_ij z_i z_j / 4`. The bound matrix `(n/4)[D − M + diag(u)]` with
//! `Σ u_i = 0` has a largest eigenvalue above the maximum cut when `M = W`;
//! `M` may also be a correlation matrix.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;

use crate::linalg::symmetric_eigen;
use crate::rounding::RoundedSolution;
use crate::{seed, Error, ProblemInstance, Result, Spins};

/// A max-cut instance.
#[derive(Debug, Clone, PartialEq)]
pub struct CutProblem {
    base: ProblemInstance,
    degree: DVector<f64>,
    laplacian: DMatrix<f64>,
}

impl CutProblem {
    pub fn new(base: ProblemInstance) -> Result<Self> {
        if base.has_linear() {
            return Err(Error::LinearTermsUnsupported);
        }
        if let Some((i, j, weight)) = base.edges().into_iter().find(|e| e.2 < 0.0) {
            return Err(Error::NegativeWeight { i, j, weight });
        }
        let w = base.weights();
        let degree = DVector::from_iterator(base.n(), w.column_iter().map(|c| c.sum()));
        let laplacian = DMatrix::from_diagonal(&degree) - w;
        Ok(Self {
            base,
            degree,
            laplacian,
        })
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn base(&self) -> &ProblemInstance {
        &self.base
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        self.base.weights()
    }

    pub fn degree(&self) -> &DVector<f64> {
        &self.degree
    }

    pub fn laplacian(&self) -> &DMatrix<f64> {
        &self.laplacian
    }

    /// `Σ_{i<j} W_ij`.
    pub fn total_weight(&self) -> f64 {
        self.degree.sum() / 2.0
    }
}

/// Total weight of edges crossing the partition.
pub fn cut_value(cp: &CutProblem, z: &Spins) -> Result<f64> {
    let n = cp.n();
    if z.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: z.len(),
        });
    }
    Ok(quad(&cp.laplacian, z.as_slice()) / 4.0)
}

fn quad(m: &DMatrix<f64>, z: &[i8]) -> f64 {
    let mut total = 0.0;
    for (j, col) in m.column_iter().enumerate() {
        let field: f64 = col.iter().zip(z).map(|(a, &b)| a * b as f64).sum();
        total += z[j] as f64 * field;
    }
    total
}

/// Zero-sum diagonal shift `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectingVector {
    u: DVector<f64>,
}

impl CorrectingVector {
    pub fn zeros(n: usize) -> Self {
        Self { u: DVector::zeros(n) }
    }

    /// Accepts any vector and projects it onto `Σ u_i = 0`.
    pub fn projected(u: DVector<f64>) -> Self {
        let mean = u.mean();
        Self { u: u.add_scalar(-mean) }
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.u
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }
}

fn check_matrix(cp: &CutProblem, m: &DMatrix<f64>, u: Option<&CorrectingVector>) -> Result<()> {
    let n = cp.n();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: m.nrows(),
        });
    }
    if let Some(u) = u {
        if u.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: u.len(),
            });
        }
    }
    Ok(())
}

/// `(n/4)[D − M + diag(u)]`.
pub fn bound_matrix(cp: &CutProblem, m: &DMatrix<f64>, u: &CorrectingVector) -> Result<DMatrix<f64>> {
    check_matrix(cp, m, Some(u))?;
    let mut b = -m;
    for i in 0..cp.n() {
        b[(i, i)] += cp.degree[i] + u.u[i];
    }
    b *= cp.n() as f64 / 4.0;
    Ok(b)
}

struct Leading {
    value: f64,
    vector: DVector<f64>,
    gap: f64,
}

fn leading(b: &DMatrix<f64>) -> Result<Leading> {
    let e = symmetric_eigen(b)?;
    let n = e.values.len();
    Ok(Leading {
        value: e.values[n - 1],
        vector: e.vectors.column(n - 1).into_owned(),
        gap: if n > 1 { e.values[n - 1] - e.values[n - 2] } else { f64::INFINITY },
    })
}

/// Largest eigenvalue of the bound matrix.
pub fn bound_lambda_max(cp: &CutProblem, m: &DMatrix<f64>, u: &CorrectingVector) -> Result<f64> {
    Ok(leading(&bound_matrix(cp, m, u)?)?.value)
}

/// Result of the correcting-vector search.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionResult {
    pub u: CorrectingVector,
    pub lambda_max: f64,
    pub iterations: usize,
}

const MAX_ITERS: usize = 5000;
const WINDOW: usize = 50;

/// Minimizes `λ_max((n/4)[D − M + diag(u)])` over `Σ u_i = 0`.
///
/// Normalized projected subgradient steps with an adaptive length: a step
/// that lowers `λ_max` is kept and the length grows by 1.5, otherwise it is
/// discarded and the length halves. Stops once the best value improved by
/// less than `1e-7` (`1e-6` when the top eigenvalue is within `1e-8` of the
/// next) over 50 iterations, or after 5000. Returns the best iterate.
pub fn optimize_correcting_vector(cp: &CutProblem, m: &DMatrix<f64>) -> Result<CorrectionResult> {
    check_matrix(cp, m, None)?;
    let n = cp.n();
    let scale = n as f64 / 4.0;
    let mut u = CorrectingVector::zeros(n);
    let mut current = leading(&bound_matrix(cp, m, &u)?)?;
    let mut step = (cp.degree.mean()).max(m.amax()).max(1e-3);
    let mut history: Vec<f64> = Vec::with_capacity(MAX_ITERS + 1);
    history.push(current.value);
    let mut iterations = 0;
    while iterations < MAX_ITERS {
        iterations += 1;
        let mut g = current.vector.map(|x| scale * x * x);
        let mean = g.mean();
        g.add_scalar_mut(-mean);
        let norm = g.norm();
        if norm < 1e-14 * scale {
            break;
        }
        let trial = CorrectingVector::projected(&u.u - g * (step / norm));
        let next = leading(&bound_matrix(cp, m, &trial)?)?;
        if next.value < current.value {
            u = trial;
            current = next;
            step *= 1.5;
        } else {
            step *= 0.5;
        }
        history.push(current.value);
        if step < 1e-13 {
            break;
        }
        if history.len() > WINDOW {
            let tol = if current.gap < 1e-8 { 1e-6 } else { 1e-7 };
            let old = history[history.len() - 1 - WINDOW];
            if old - current.value < tol * current.value.abs().max(1.0) {
                break;
            }
        }
    }
    Ok(CorrectionResult {
        u,
        lambda_max: current.value,
        iterations,
    })
}

/// Sign-rounds the top three eigenvectors of the bound matrix (and their
/// negations) and keeps the largest cut. `value` holds the cut weight.
pub fn gw_relax_round(cp: &CutProblem, m: &DMatrix<f64>, u: &CorrectingVector, seed: u64) -> Result<RoundedSolution> {
    let b = bound_matrix(cp, m, u)?;
    let e = symmetric_eigen(&b)?;
    let n = cp.n();
    let mut rng = seed::rng(seed);
    let mut best: Option<RoundedSolution> = None;
    for rank in 0..n.min(3) {
        let col = e.vectors.column(n - 1 - rank);
        let spins = Spins::from_signs(col.iter().copied(), || if rng.random::<bool>() { 1 } else { -1 });
        let flipped = spins.flipped();
        for (branch, z) in [(1i8, spins), (-1i8, flipped)] {
            let value = quad(&cp.laplacian, z.as_slice()) / 4.0;
            if best.as_ref().is_none_or(|b| value > b.value) {
                best = Some(RoundedSolution {
                    spins: z,
                    value,
                    source_rank: rank,
                    sign_branch: branch,
                });
            }
        }
    }
    best.ok_or(Error::EigenNonConvergence)
}

/// Correcting vector that equalizes the shifted degrees, `u_i = tr(D)/n − D_ii`.
pub fn equalizing_vector(cp: &CutProblem) -> CorrectingVector {
    let mean = cp.degree.mean();
    CorrectingVector {
        u: cp.degree.map(|d| mean - d),
    }
}

/// Fraction of the total weight that is cut.
pub fn cut_density(cp: &CutProblem, value: f64) -> f64 {
    let total = cp.total_weight();
    if total == 0.0 {
        0.0
    } else {
        value / total
    }
}
