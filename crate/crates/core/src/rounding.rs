//! Correlation matrices and spectral relax-and-round.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{self, Eigenpairs, Extreme};
pub use crate::linalg::commutator_norm;
use crate::qsim::{zz_matrix, StateVector};
use crate::{math, seed, Error, ProblemInstance, Result, Sense, Spins};

/// Eigenvector entries with magnitude below this are rounded at random.
pub const ZERO_THRESHOLD: f64 = 1e-12;

/// How a correlation matrix was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ExactStatevector,
    AnalyticP1,
    Sampled { shots: usize },
    SyntheticNoise { shots: usize },
    AsymptoticSk,
    /// Scaled copy of another matrix.
    Depolarized,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::ExactStatevector => "exact-statevector",
            Provenance::AnalyticP1 => "analytic-p1",
            Provenance::Sampled { .. } => "sampled",
            Provenance::SyntheticNoise { .. } => "synthetic-noise",
            Provenance::AsymptoticSk => "asymptotic-sk",
            Provenance::Depolarized => "depolarized",
        }
    }

    pub fn shots(&self) -> Option<usize> {
        match *self {
            Provenance::Sampled { shots } | Provenance::SyntheticNoise { shots } => Some(shots),
            _ => None,
        }
    }
}

/// Two-point correlation matrix `Z_ij = (δ_ij − 1)⟨Z_i Z_j⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrMatrix {
    entries: DMatrix<f64>,
    provenance: Provenance,
}

impl CorrMatrix {
    /// Validates symmetry (to `1e-12` relative) and a zero diagonal; the
    /// stored matrix is exactly symmetric.
    pub fn new(entries: DMatrix<f64>, provenance: Provenance) -> Result<Self> {
        let n = entries.nrows();
        if entries.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: entries.ncols(),
            });
        }
        if n < 2 {
            return Err(Error::TooFewVariables(n));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let tol = 1e-12 * entries.amax().max(1.0);
        let mut m = entries;
        for j in 0..n {
            if m[(j, j)] != 0.0 {
                return Err(Error::NonzeroDiagonal(j));
            }
            for i in (j + 1)..n {
                let (a, b) = (m[(i, j)], m[(j, i)]);
                if math::abs(a - b) > tol {
                    return Err(Error::NotSymmetric(j, i));
                }
                let avg = 0.5 * (a + b);
                m[(i, j)] = avg;
                m[(j, i)] = avg;
            }
        }
        Ok(Self {
            entries: m,
            provenance,
        })
    }

    /// `−⟨Z_i Z_j⟩` off the diagonal; the diagonal of `zz` is ignored.
    pub fn from_zz(zz: &DMatrix<f64>, provenance: Provenance) -> Result<Self> {
        let mut m = -zz;
        m.fill_diagonal(0.0);
        Self::new(m, provenance)
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }
}

/// Correlation matrix of a statevector.
pub fn corr_from_state(psi: &StateVector) -> CorrMatrix {
    CorrMatrix::from_zz(&zz_matrix(psi), Provenance::ExactStatevector).expect("zz matrix is symmetric and finite")
}

/// Empirical correlation matrix from measured spin configurations.
pub fn corr_from_samples(samples: &[Spins]) -> Result<CorrMatrix> {
    let first = samples.first().ok_or(Error::EmptySamples)?;
    let n = first.len();
    if let Some(bad) = samples.iter().find(|s| s.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bad.len(),
        });
    }
    let s = DMatrix::from_fn(samples.len(), n, |r, c| samples[r].as_slice()[c] as f64);
    let zz = s.tr_mul(&s) / samples.len() as f64;
    CorrMatrix::from_zz(
        &zz,
        Provenance::Sampled {
            shots: samples.len(),
        },
    )
}

/// Adds `N(0, 1)/√shots` to every off-diagonal pair.
pub fn synthetic_shot_noise(z: &CorrMatrix, shots: usize, seed: u64) -> Result<CorrMatrix> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shot count must be at least 1"));
    }
    let sigma = 1.0 / math::sqrt(shots as f64);
    let provenance = Provenance::SyntheticNoise { shots };
    let mut m = z.entries.clone();
    if sigma >= 1e-15 {
        let mut rng = seed::rng(seed);
        let n = m.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                let x: f64 = StandardNormal.sample(&mut rng);
                let v = m[(i, j)] + sigma * x;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
    }
    Ok(CorrMatrix { entries: m, provenance })
}

/// Global depolarizing channel: every entry scaled by the fidelity.
pub fn depolarize(z: &CorrMatrix, fidelity: f64) -> Result<CorrMatrix> {
    if !(fidelity > 0.0 && fidelity <= 1.0) {
        return Err(Error::InvalidParameter("fidelity must lie in (0, 1]"));
    }
    Ok(CorrMatrix {
        entries: &z.entries * fidelity,
        provenance: Provenance::Depolarized,
    })
}

/// Number of eigenvectors to round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenLimit {
    All,
    /// The `k` eigenvectors at the end of the spectrum matching the sense.
    Extremal(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundOptions {
    pub limit: EigenLimit,
    /// Drives the random rounding of zero entries and the Lanczos start vector.
    pub seed: u64,
}

impl RoundOptions {
    pub fn all(seed: u64) -> Self {
        Self {
            limit: EigenLimit::All,
            seed,
        }
    }

    pub fn extremal(k: usize, seed: u64) -> Self {
        Self {
            limit: EigenLimit::Extremal(k),
            seed,
        }
    }
}

/// One rounded eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundedSolution {
    pub spins: Spins,
    pub value: f64,
    /// Position of the eigenvector counted from the end of the spectrum
    /// favored by the sense (0 is lowest for minimization).
    pub source_rank: usize,
    /// `+1` for the rounded eigenvector, `−1` for its negation.
    pub sign_branch: i8,
}

/// Eigenvectors ordered from the favored end of the spectrum, each with a
/// canonical sign (first entry above `1e-8` in magnitude is positive).
pub fn ranked_eigenvectors(m: &DMatrix<f64>, sense: Sense, limit: EigenLimit, seed: u64) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    let Eigenpairs { vectors, .. } = match limit {
        EigenLimit::All => {
            let e = linalg::symmetric_eigen(m)?;
            let order: Vec<usize> = match sense {
                Sense::Minimize => (0..n).collect(),
                Sense::Maximize => (0..n).rev().collect(),
            };
            Eigenpairs {
                values: order.iter().map(|&c| e.values[c]).collect(),
                vectors: e.vectors.select_columns(&order),
            }
        }
        EigenLimit::Extremal(k) => {
            if k == 0 {
                return Err(Error::InvalidParameter("eigenvector limit must be at least 1"));
            }
            let which = match sense {
                Sense::Minimize => Extreme::Lowest,
                Sense::Maximize => Extreme::Highest,
            };
            linalg::extremal_eigenpairs(m, k, which, seed::derive_seed(seed, u64::MAX))?
        }
    };
    let mut vectors = vectors;
    for mut col in vectors.column_iter_mut() {
        if let Some(lead) = col.iter().copied().find(|x| math::abs(*x) > 1e-8) {
            if lead < 0.0 {
                col.neg_mut();
            }
        }
    }
    Ok(vectors)
}

/// Every rounded candidate: each eigenvector and its negation, in rank order.
pub fn candidates(m: &DMatrix<f64>, inst: &ProblemInstance, opts: RoundOptions) -> Result<Vec<RoundedSolution>> {
    let n = inst.n();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: m.nrows(),
        });
    }
    let vectors = ranked_eigenvectors(m, inst.sense(), opts.limit, opts.seed)?;
    let mut rng = seed::rng(opts.seed);
    let mut out = Vec::with_capacity(2 * vectors.ncols());
    for (rank, col) in vectors.column_iter().enumerate() {
        let spins = Spins::from_signs(col.iter().copied(), || if rng.random::<bool>() { 1 } else { -1 });
        let flipped = spins.flipped();
        for (branch, z) in [(1i8, spins), (-1i8, flipped)] {
            let value = inst.eval(z.as_slice());
            out.push(RoundedSolution {
                spins: z,
                value,
                source_rank: rank,
                sign_branch: branch,
            });
        }
    }
    Ok(out)
}

/// Best rounded eigenvector of `m` for `inst`; earlier candidates win ties.
pub fn relax_and_round(m: &DMatrix<f64>, inst: &ProblemInstance, opts: RoundOptions) -> Result<RoundedSolution> {
    let sense = inst.sense();
    let mut best: Option<RoundedSolution> = None;
    for cand in candidates(m, inst, opts)? {
        if best.as_ref().is_none_or(|b| sense.better(cand.value, b.value)) {
            best = Some(cand);
        }
    }
    best.ok_or(Error::EigenNonConvergence)
}

/// Relax-and-round on the weight matrix itself.
pub fn classical_rr(inst: &ProblemInstance, seed: u64) -> Result<RoundedSolution> {
    relax_and_round(inst.weights(), inst, RoundOptions::all(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::p1_corr;
    use crate::exact::brute_force;
    use crate::graphs::{generate, GraphFamily};
    use crate::qsim::{run_qaoa, sample_bitstrings, QaoaAngles};
    use alloc::vec;
    use core::f64::consts::{FRAC_1_SQRT_2, PI};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn cat_state(z: &Spins) -> StateVector {
        let n = z.len();
        let idx = z.to_index().unwrap() as usize;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[idx] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        amps[idx ^ ((1 << n) - 1)] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        StateVector::from_amplitudes(amps).unwrap()
    }

    #[test]
    fn cat_state_recovers_optimum() {
        let inst = generate(GraphFamily::Sk, 9, 21).unwrap();
        let opt = brute_force(&inst).unwrap();
        let z = corr_from_state(&cat_state(&opt.best));
        for i in 0..9 {
            for j in 0..9 {
                let want = if i == j { 0.0 } else { -(opt.best.as_slice()[i] * opt.best.as_slice()[j]) as f64 };
                assert!((z.entries()[(i, j)] - want).abs() < 1e-12);
            }
        }
        let r = relax_and_round(z.entries(), &inst, RoundOptions::all(0)).unwrap();
        assert!(r.spins.equivalent(&opt.best));
        assert_eq!(r.value, opt.value);
    }

    #[test]
    fn uniform_state_has_zero_correlations() {
        let z = corr_from_state(&StateVector::uniform(5).unwrap());
        assert!(z.entries().amax() < 1e-15);
    }

    #[test]
    fn samples_of_one_basis_state() {
        let b = Spins::new(vec![1, -1, -1, 1]).unwrap();
        let z = corr_from_samples(&vec![b.clone(); 7]).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 0.0 } else { -(b.as_slice()[i] * b.as_slice()[j]) as f64 };
                assert_eq!(z.entries()[(i, j)], want);
            }
        }
        assert_eq!(z.provenance(), Provenance::Sampled { shots: 7 });
        assert_eq!(corr_from_samples(&[]), Err(Error::EmptySamples));
    }

    #[test]
    fn sampled_ring_correlations_converge() {
        let inst = generate(GraphFamily::Ring, 8, 0).unwrap();
        let psi = run_qaoa(&inst, &QaoaAngles::p1(PI / 8.0, -PI / 8.0)).unwrap();
        let shots = 65_536;
        let z = corr_from_samples(&sample_bitstrings(&psi, shots, 3)).unwrap();
        let exact = corr_from_state(&psi);
        let bound = 4.0 / (shots as f64).sqrt();
        let pairs = 28;
        let close = (0..8)
            .flat_map(|i| ((i + 1)..8).map(move |j| (i, j)))
            .filter(|&(i, j)| (z.entries()[(i, j)] - exact.entries()[(i, j)]).abs() < bound)
            .count();
        assert!(close as f64 >= 0.99 * pairs as f64);
    }

    #[test]
    fn shot_noise_and_depolarizing() {
        let inst = generate(GraphFamily::Sk, 10, 5).unwrap();
        let z = p1_corr(&inst, 0.2, -0.4).unwrap();
        let a = synthetic_shot_noise(&z, 100, 9).unwrap();
        assert_eq!(a, synthetic_shot_noise(&z, 100, 9).unwrap());
        assert_ne!(a.entries(), z.entries());
        assert!((0..10).all(|i| a.entries()[(i, i)] == 0.0));
        assert_eq!(a.entries(), &a.entries().transpose());
        let huge = synthetic_shot_noise(&z, usize::MAX, 9).unwrap();
        assert!((huge.entries() - z.entries()).amax() < 1e-8);

        assert_eq!(depolarize(&z, 1.0).unwrap().entries(), z.entries());
        assert!(depolarize(&z, 0.0).is_err());
        assert!(depolarize(&z, 1.5).is_err());
        let ab = depolarize(&depolarize(&z, 0.5).unwrap(), 0.25).unwrap();
        let direct = depolarize(&z, 0.125).unwrap();
        assert!((ab.entries() - direct.entries()).amax() < 1e-15);
    }

    #[test]
    fn ring_is_solved_exactly() {
        for n in [4usize, 6, 8, 10] {
            let inst = generate(GraphFamily::Ring, n, 0).unwrap();
            let z = p1_corr(&inst, PI / 8.0, PI / 8.0).unwrap();
            let r = relax_and_round(z.entries(), &inst, RoundOptions::all(1)).unwrap();
            assert_eq!(r.value, -2.0 * n as f64);
            let c = classical_rr(&inst, 1).unwrap();
            assert_eq!(c.value, -2.0 * n as f64);
        }
    }

    #[test]
    fn only_one_branch_is_optimal_with_fields() {
        // A nondegenerate optimum: a small field breaks the global flip.
        let base = generate(GraphFamily::Sk, 8, 13).unwrap();
        let opt0 = brute_force(&base).unwrap();
        let h: Vec<f64> = opt0.best.iter().map(|s| -0.01 * s).collect();
        let inst = ProblemInstance::new(base.weights().clone(), Some(h), Sense::Minimize).unwrap();
        let opt = brute_force(&inst).unwrap();
        assert_eq!(opt.degeneracy, 1);
        let m = corr_from_state(&cat_state(&opt.best));
        let r = relax_and_round(m.entries(), &inst, RoundOptions::all(0)).unwrap();
        assert_eq!(r.spins, opt.best);
        let all = candidates(m.entries(), &inst, RoundOptions::all(0)).unwrap();
        let twin = all
            .iter()
            .find(|c| c.source_rank == r.source_rank && c.sign_branch == -r.sign_branch)
            .unwrap();
        assert!(twin.value > r.value);
    }

    #[test]
    fn extremal_limit_rounds_k_vectors() {
        let inst = generate(GraphFamily::Sk, 12, 3).unwrap();
        let c = candidates(inst.weights(), &inst, RoundOptions::extremal(5, 0)).unwrap();
        assert_eq!(c.len(), 10);
        let all = candidates(inst.weights(), &inst, RoundOptions::all(0)).unwrap();
        assert_eq!(all.len(), 24);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn returned_value_dominates_and_scales(seed in any::<u64>(), n in 3usize..=10, c in 0.01f64..100.0) {
            let inst = generate(GraphFamily::Sk, n, seed).unwrap();
            let z = p1_corr(&inst, 0.3, -0.3).unwrap();
            // Degenerate eigenspaces have no canonical basis; skip them.
            let values = crate::linalg::symmetric_eigen(z.entries()).unwrap().values;
            let spread = values[n - 1] - values[0];
            prop_assume!(values.windows(2).all(|w| w[1] - w[0] > 1e-8 * spread));
            let opts = RoundOptions::all(seed);
            let r = relax_and_round(z.entries(), &inst, opts).unwrap();
            prop_assert_eq!(r.value, inst.objective_value(&r.spins).unwrap());
            for cand in candidates(z.entries(), &inst, opts).unwrap() {
                prop_assert!(r.value <= cand.value);
            }
            let opt = brute_force(&inst).unwrap();
            prop_assert!(r.value >= opt.value);
            let scaled = relax_and_round(&(z.entries() * c), &inst, opts).unwrap();
            prop_assert_eq!(scaled.spins, r.spins);
        }
    }
}
