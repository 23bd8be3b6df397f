//! Closed-form depth-one QAOA expectation values.
//!
//! For a pure quadratic objective and angles `(γ, β)`,
//!
//! ```text
//! ⟨Z_i Z_j⟩ = sin2β cos2β sin(2γW_ij) [Π_k cos(2γW_ik) + Π_k cos(2γW_jk)]
//!           − sin²2β / 2 · [Π_k cos 2γ(W_ik + W_jk) − Π_k cos 2γ(W_jk − W_ik)]
//! ```
//!
//! with every product over `k ∉ {i, j}`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::math::{cos, powu, sin, sin_cos, sqrt};
use crate::rounding::{CorrMatrix, Provenance};
use crate::{Error, ProblemInstance, Result};

/// Depth-one correlators of a whole instance.
#[derive(Debug, Clone, PartialEq)]
pub struct P1Correlators {
    /// `⟨Z_i Z_j⟩`, zero on the diagonal.
    pub zz: DMatrix<f64>,
    /// `⟨C⟩`.
    pub cost: f64,
}

fn require_quadratic(inst: &ProblemInstance) -> Result<()> {
    if inst.has_linear() {
        Err(Error::LinearTermsUnsupported)
    } else {
        Ok(())
    }
}

struct Prefactors {
    a: f64,
    b: f64,
}

fn prefactors(beta: f64) -> Prefactors {
    let (s2b, c2b) = sin_cos(2.0 * beta);
    Prefactors {
        a: s2b * c2b,
        b: s2b * s2b / 2.0,
    }
}

/// `⟨Z_i Z_j⟩` after one layer, `O(n)`.
pub fn p1_zz(inst: &ProblemInstance, gamma: f64, beta: f64, i: usize, j: usize) -> Result<f64> {
    require_quadratic(inst)?;
    let n = inst.n();
    for idx in [i, j] {
        if idx >= n {
            return Err(Error::IndexOutOfRange { index: idx, n });
        }
    }
    if i == j {
        return Err(Error::InvalidParameter("p1_zz needs two distinct variables"));
    }
    Ok(zz_pair(inst.weights(), &prefactors(beta), gamma, i, j))
}

fn zz_pair(w: &DMatrix<f64>, pre: &Prefactors, gamma: f64, i: usize, j: usize) -> f64 {
    let g2 = 2.0 * gamma;
    let (mut pi, mut pj, mut plus, mut minus) = (1.0, 1.0, 1.0, 1.0);
    let (wi, wj) = (w.column(i), w.column(j));
    for k in 0..w.nrows() {
        if k == i || k == j {
            continue;
        }
        let (a, b) = (wi[k], wj[k]);
        if a == 0.0 && b == 0.0 {
            continue;
        }
        pi *= cos(g2 * a);
        pj *= cos(g2 * b);
        plus *= cos(g2 * (a + b));
        minus *= cos(g2 * (b - a));
    }
    pre.a * sin(g2 * w[(i, j)]) * (pi + pj) - pre.b * (plus - minus)
}

/// All depth-one correlators plus `⟨C⟩`.
///
/// Weights restricted to `{−1, 0, 1}` take an `O(n³)` matrix-product path
/// built on neighbor counts; anything else evaluates every pair in `O(n)`.
pub fn p1_correlators(inst: &ProblemInstance, gamma: f64, beta: f64) -> Result<P1Correlators> {
    require_quadratic(inst)?;
    let w = inst.weights();
    let n = inst.n();
    let pre = prefactors(beta);
    let mut zz = DMatrix::zeros(n, n);
    if w.iter().all(|&x| x == 0.0 || x == 1.0 || x == -1.0) {
        let s = w.map(|x| x.abs());
        let w2 = w * w;
        let s2 = &s * &s;
        let deg: Vec<u32> = (0..n).map(|i| s.column(i).sum() as u32).collect();
        let (s2g, c2g) = sin_cos(2.0 * gamma);
        let c4g = cos(4.0 * gamma);
        for j in 0..n {
            for i in (j + 1)..n {
                let wij = w[(i, j)];
                let a = wij.abs() as u32;
                let both = s2[(i, j)] as u32;
                let same = ((w2[(i, j)] + s2[(i, j)]) / 2.0) as u32;
                let opposite = both - same;
                let one = deg[i] + deg[j] - 2 * both - 2 * a;
                let pi = powu(c2g, deg[i] - a);
                let pj = powu(c2g, deg[j] - a);
                let c_one = powu(c2g, one);
                let plus = powu(c4g, same) * c_one;
                let minus = powu(c4g, opposite) * c_one;
                let v = pre.a * s2g * wij * (pi + pj) - pre.b * (plus - minus);
                zz[(i, j)] = v;
                zz[(j, i)] = v;
            }
        }
    } else {
        for j in 0..n {
            for i in (j + 1)..n {
                let v = zz_pair(w, &pre, gamma, i, j);
                zz[(i, j)] = v;
                zz[(j, i)] = v;
            }
        }
    }
    let cost = w.component_mul(&zz).sum();
    Ok(P1Correlators { zz, cost })
}

/// `⟨C⟩` after one layer.
pub fn p1_cost(inst: &ProblemInstance, gamma: f64, beta: f64) -> Result<f64> {
    Ok(p1_correlators(inst, gamma, beta)?.cost)
}

/// Depth-one correlation matrix `Z_ij = −⟨Z_i Z_j⟩`.
pub fn p1_corr(inst: &ProblemInstance, gamma: f64, beta: f64) -> Result<CorrMatrix> {
    let zz = p1_correlators(inst, gamma, beta)?.zz;
    CorrMatrix::from_zz(&zz, Provenance::AnalyticP1)
}

/// Precomputed pair data for repeated `⟨C⟩` evaluations at varying angles.
///
/// Only coupled pairs contribute to the cost, so each evaluation costs
/// `O(|E|)` for `±1` weights and `O(n |E|)` otherwise.
#[derive(Debug, Clone)]
pub struct P1Model {
    inst: ProblemInstance,
    pairs: Vec<(usize, usize)>,
    counts: Option<Vec<PairCounts>>,
}

#[derive(Debug, Clone, Copy)]
struct PairCounts {
    w: f64,
    ki: u32,
    kj: u32,
    same: u32,
    opposite: u32,
    one: u32,
}

impl P1Model {
    pub fn new(inst: &ProblemInstance) -> Result<Self> {
        require_quadratic(inst)?;
        let w = inst.weights();
        let n = inst.n();
        let pairs: Vec<(usize, usize)> = inst.edges().into_iter().map(|(i, j, _)| (i, j)).collect();
        let counts = if w.iter().all(|&x| x == 0.0 || x == 1.0 || x == -1.0) {
            let deg: Vec<u32> = (0..n).map(|i| w.column(i).iter().filter(|&&x| x != 0.0).count() as u32).collect();
            let list = pairs
                .iter()
                .map(|&(i, j)| {
                    let (mut same, mut opposite) = (0u32, 0u32);
                    for k in 0..n {
                        let prod = w[(i, k)] * w[(j, k)];
                        if prod > 0.0 {
                            same += 1;
                        } else if prod < 0.0 {
                            opposite += 1;
                        }
                    }
                    PairCounts {
                        w: w[(i, j)],
                        ki: deg[i] - 1,
                        kj: deg[j] - 1,
                        same,
                        opposite,
                        one: deg[i] + deg[j] - 2 * (same + opposite) - 2,
                    }
                })
                .collect();
            Some(list)
        } else {
            None
        };
        Ok(Self {
            inst: inst.clone(),
            pairs,
            counts,
        })
    }

    /// `⟨C⟩` after one layer.
    pub fn cost(&self, gamma: f64, beta: f64) -> f64 {
        let pre = prefactors(beta);
        match &self.counts {
            Some(counts) => {
                let (s2g, c2g) = sin_cos(2.0 * gamma);
                let c4g = cos(4.0 * gamma);
                let mut total = 0.0;
                for c in counts {
                    let c_one = powu(c2g, c.one);
                    let zz = pre.a * s2g * c.w * (powu(c2g, c.ki) + powu(c2g, c.kj))
                        - pre.b * c_one * (powu(c4g, c.same) - powu(c4g, c.opposite));
                    total += c.w * zz;
                }
                2.0 * total
            }
            None => {
                let w = self.inst.weights();
                2.0 * self
                    .pairs
                    .iter()
                    .map(|&(i, j)| w[(i, j)] * zz_pair(w, &pre, gamma, i, j))
                    .sum::<f64>()
            }
        }
    }
}

/// Large-`n` depth-one matrix for `±1` complete couplings at the asymptotic
/// angles: `W/√(en) − W²/(2en)` with the diagonal removed.
pub fn sk_large_n_corr(inst: &ProblemInstance) -> Result<CorrMatrix> {
    let w = inst.weights();
    let n = inst.n();
    for j in 0..n {
        for i in 0..n {
            if i != j && w[(i, j)].abs() != 1.0 {
                return Err(Error::WrongStructure("asymptotic matrix needs ±1 couplings on every pair"));
            }
        }
    }
    let en = core::f64::consts::E * n as f64;
    let mut m = w / sqrt(en) - (w * w) / (2.0 * en);
    m.fill_diagonal(0.0);
    CorrMatrix::new(m, Provenance::AsymptoticSk)
}

/// Neighbor statistics of a unit-weight `d`-regular graph.
#[derive(Debug, Clone, PartialEq)]
pub struct DRegularStats {
    pub degree: usize,
    /// `n_ij = Σ_k W_ik W_kj`, the number of shared neighbors.
    pub common: DMatrix<u32>,
    /// `λ_ij = W_ij n_ij`.
    pub triangles: DMatrix<u32>,
    /// `ν_ij = (1 − W_ij) n_ij`.
    pub wedges: DMatrix<u32>,
}

impl DRegularStats {
    pub fn new(inst: &ProblemInstance) -> Result<Self> {
        let w = inst.weights();
        let n = inst.n();
        if w.iter().any(|&x| x != 0.0 && x != 1.0) {
            return Err(Error::WrongStructure("d-regular formula needs unit weights"));
        }
        let degrees = inst.degrees();
        let degree = degrees[0];
        if degrees.iter().any(|&d| d != degree) {
            return Err(Error::WrongStructure("graph is not regular"));
        }
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|i| (0..n).filter(|&k| w[(i, k)] == 1.0).collect())
            .collect();
        let mut common = DMatrix::<u32>::zeros(n, n);
        for i in 0..n {
            for &k in &adj[i] {
                for &j in &adj[k] {
                    common[(i, j)] += 1;
                }
            }
        }
        let triangles = DMatrix::from_fn(n, n, |i, j| if w[(i, j)] == 1.0 { common[(i, j)] } else { 0 });
        let wedges = DMatrix::from_fn(n, n, |i, j| if w[(i, j)] == 1.0 { 0 } else { common[(i, j)] });
        Ok(Self {
            degree,
            common,
            triangles,
            wedges,
        })
    }
}

/// Scalar `f = −2 sin2β cos2β sin2γ cos^{d−1}2γ`.
pub fn dregular_f(degree: usize, gamma: f64, beta: f64) -> f64 {
    let (s2b, c2b) = sin_cos(2.0 * beta);
    let (s2g, c2g) = sin_cos(2.0 * gamma);
    -2.0 * s2b * c2b * s2g * powu(c2g, degree.saturating_sub(1) as u32)
}

/// Depth-one correlation matrix of a unit-weight `d`-regular graph from
/// triangle and wedge counts.
pub fn p1_zz_dregular(inst: &ProblemInstance, gamma: f64, beta: f64) -> Result<CorrMatrix> {
    let stats = DRegularStats::new(inst)?;
    let n = inst.n();
    let d = stats.degree as u32;
    let f = dregular_f(stats.degree, gamma, beta);
    let s2b = sin(2.0 * beta);
    let half_s2 = s2b * s2b / 2.0;
    let c2g = cos(2.0 * gamma);
    let c4g = cos(4.0 * gamma);
    let w = inst.weights();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in (j + 1)..n {
            let v = if w[(i, j)] == 1.0 {
                let lam = stats.triangles[(i, j)];
                let rest = powu(c2g, 2 * d - 2 - 2 * lam);
                f + half_s2 * (powu(c4g, lam) * rest - rest)
            } else {
                let nu = stats.wedges[(i, j)];
                let rest = powu(c2g, 2 * d - 2 * nu);
                half_s2 * (powu(c4g, nu) * rest - rest)
            };
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    CorrMatrix::new(m, Provenance::AnalyticP1)
}

/// Ring correlation row at `β = −π/8, γ = π/8`: `(0, 1/2, −1/8, 0, …, −1/8, 1/2)`.
pub fn ring_reference_row(n: usize) -> Vec<f64> {
    let mut row = vec![0.0; n];
    if n >= 2 {
        row[1] = 0.5;
        row[n - 1] = 0.5;
    }
    if n >= 5 {
        row[2] = -0.125;
        row[n - 2] = -0.125;
    }
    row
}
