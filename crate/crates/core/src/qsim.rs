//! Statevector simulation of QAOA circuits and Trotterized annealing.
//!
//! Qubit `i` is bit `i` of the basis index; bit value 0 is `z_i = +1`.
//! A QAOA layer applies `exp(−iγ C/2)` followed by `exp(−iβ X)` on every
//! qubit, with `C` the ordered-pair objective, i.e. the phase generator is
//! `Σ_{i<j} W_ij Z_i Z_j + Σ_i h_i Z_i / 2`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng as _;

use crate::exact::{self, MAX_EXACT};
use crate::{math, seed, Error, ProblemInstance, Result, Spins};

/// Largest simulable register.
pub const MAX_QUBITS: usize = MAX_EXACT;

/// Angles of a depth-`p` QAOA circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct QaoaAngles {
    gammas: Vec<f64>,
    betas: Vec<f64>,
}

impl QaoaAngles {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.len() != betas.len() {
            return Err(Error::DimensionMismatch {
                expected: gammas.len(),
                found: betas.len(),
            });
        }
        if gammas.iter().chain(&betas).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { gammas, betas })
    }

    pub fn p1(gamma: f64, beta: f64) -> Self {
        Self {
            gammas: vec![gamma],
            betas: vec![beta],
        }
    }

    /// Depth-0 circuit.
    pub fn empty() -> Self {
        Self {
            gammas: Vec::new(),
            betas: Vec::new(),
        }
    }

    pub fn depth(&self) -> usize {
        self.gammas.len()
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// Interleaved `[γ_1, β_1, γ_2, β_2, …]`.
    pub fn to_flat(&self) -> Vec<f64> {
        self.gammas.iter().zip(&self.betas).flat_map(|(&g, &b)| [g, b]).collect()
    }

    pub fn from_flat(x: &[f64]) -> Result<Self> {
        if !x.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter("flat angle vector must have even length"));
        }
        Self::new(x.iter().step_by(2).copied().collect(), x.iter().skip(1).step_by(2).copied().collect())
    }
}

/// Annealing schedule with `p = T/dt` layers, `β_ℓ = 1 − ℓ dt/T`, `γ_ℓ = ℓ dt/T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealSchedule {
    total_time: f64,
    dt: f64,
    layers: usize,
}

impl AnnealSchedule {
    pub const DEFAULT_DT: f64 = 0.1;

    pub fn new(total_time: f64, dt: f64) -> Result<Self> {
        if !(total_time > 0.0 && dt > 0.0 && total_time.is_finite() && dt.is_finite()) {
            return Err(Error::InvalidParameter("anneal time and step must be positive"));
        }
        let ratio = total_time / dt;
        let layers = math::round(ratio);
        if math::abs(ratio - layers) > 1e-9 * ratio.max(1.0) || layers < 1.0 {
            return Err(Error::InvalidParameter("anneal time must be an integer multiple of the step"));
        }
        Ok(Self {
            total_time,
            dt,
            layers: layers as usize,
        })
    }

    pub fn with_default_step(total_time: f64) -> Result<Self> {
        Self::new(total_time, Self::DEFAULT_DT)
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    /// `(γ_ℓ, β_ℓ)` for `ℓ = 1..=p`.
    pub fn layer(&self, l: usize) -> (f64, f64) {
        let s = l as f64 / self.layers as f64;
        (s, 1.0 - s)
    }
}

/// Amplitudes of an `n`-qubit pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `H^{⊗n}|0…0⟩`.
    pub fn uniform(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        let a = 1.0 / math::sqrt(dim as f64);
        Ok(Self {
            n,
            amps: vec![Complex64::new(a, 0.0); dim],
        })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n: usize, index: u64) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        if index as usize >= dim {
            return Err(Error::IndexOutOfRange {
                index: index as usize,
                n: dim,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// Wraps raw amplitudes; the length must be a power of two and the norm 1.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::InvalidParameter("amplitude count must be a power of two"));
        }
        let n = dim.trailing_zeros() as usize;
        check_qubits(n)?;
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let state = Self { n, amps };
        if math::abs(state.norm_sqr() - 1.0) > 1e-10 {
            return Err(Error::InvalidParameter("state is not normalized"));
        }
        Ok(state)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Multiplies amplitude `b` by `exp(−i·scale·value(b))`.
    fn apply_phase(&mut self, table: &CostTable, scale: f64) {
        match &table.levels {
            Some((offset, index)) => {
                let phases: Vec<Complex64> = (0..table.level_count)
                    .map(|k| phase(scale * (*offset + k as f64)))
                    .collect();
                for (a, &k) in self.amps.iter_mut().zip(index) {
                    *a *= phases[k as usize];
                }
            }
            None => {
                for (a, &v) in self.amps.iter_mut().zip(&table.values) {
                    *a *= phase(scale * v);
                }
            }
        }
    }

    /// `exp(−iθ X)` on every qubit.
    fn apply_mixer(&mut self, theta: f64) {
        let (s, c) = math::sin_cos(theta);
        let ms = Complex64::new(0.0, -s);
        for q in 0..self.n {
            let stride = 1usize << q;
            for block in self.amps.chunks_exact_mut(2 * stride) {
                let (lo, hi) = block.split_at_mut(stride);
                for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (x, y) = (*a, *b);
                    *a = x * c + y * ms;
                    *b = x * ms + y * c;
                }
            }
        }
    }
}

fn phase(theta: f64) -> Complex64 {
    let (s, c) = math::sin_cos(theta);
    Complex64::new(c, -s)
}

fn check_qubits(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        return Err(Error::TooLarge { n, max: MAX_QUBITS });
    }
    if n == 0 {
        return Err(Error::TooFewVariables(0));
    }
    Ok(())
}

/// Objective values of every basis state, computed once per instance.
///
/// Integer-valued objectives with a modest range are also stored as level
/// indices so each layer evaluates one phase per distinct value.
#[derive(Debug, Clone)]
pub struct CostTable {
    n: usize,
    values: Vec<f64>,
    levels: Option<(f64, Vec<u32>)>,
    level_count: usize,
}

impl CostTable {
    const MAX_LEVELS: f64 = (1u32 << 20) as f64;

    pub fn new(inst: &ProblemInstance) -> Result<Self> {
        check_qubits(inst.n())?;
        let values = exact::cost_table(inst)?;
        let mut table = Self {
            n: inst.n(),
            values,
            levels: None,
            level_count: 0,
        };
        if inst.is_integral() {
            let lo = table.values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = table.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if hi - lo < Self::MAX_LEVELS {
                let index = table.values.iter().map(|&v| math::round(v - lo) as u32).collect();
                table.level_count = (hi - lo) as usize + 1;
                table.levels = Some((lo, index));
            }
        }
        Ok(table)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `Σ_b |ψ_b|² C(b)`.
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        check_size(psi, self.n)?;
        Ok(psi.amps.iter().zip(&self.values).map(|(a, v)| a.norm_sqr() * v).sum())
    }

    pub fn run_qaoa(&self, angles: &QaoaAngles) -> StateVector {
        let mut psi = StateVector::uniform(self.n).expect("table size already checked");
        for (&g, &b) in angles.gammas.iter().zip(&angles.betas) {
            psi.apply_phase(self, g / 2.0);
            psi.apply_mixer(b);
        }
        psi
    }

    pub fn run_anneal(&self, sched: &AnnealSchedule) -> StateVector {
        let mut psi = StateVector::uniform(self.n).expect("table size already checked");
        for l in 1..=sched.layers {
            let (g, b) = sched.layer(l);
            psi.apply_phase(self, sched.dt * g);
            psi.apply_mixer(-sched.dt * b);
        }
        psi
    }
}

fn check_size(psi: &StateVector, n: usize) -> Result<()> {
    if psi.n != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: psi.n,
        });
    }
    Ok(())
}

/// Depth-`p` QAOA state for `inst`.
pub fn run_qaoa(inst: &ProblemInstance, angles: &QaoaAngles) -> Result<StateVector> {
    Ok(CostTable::new(inst)?.run_qaoa(angles))
}

/// Trotterized anneal: per layer `exp(−i dt γ_ℓ C)` then `exp(+i dt β_ℓ X)`.
pub fn run_anneal(inst: &ProblemInstance, sched: &AnnealSchedule) -> Result<StateVector> {
    Ok(CostTable::new(inst)?.run_anneal(sched))
}

/// `⟨Z_i Z_j⟩`.
pub fn expect_zz(psi: &StateVector, i: usize, j: usize) -> Result<f64> {
    for idx in [i, j] {
        if idx >= psi.n {
            return Err(Error::IndexOutOfRange { index: idx, n: psi.n });
        }
    }
    let mask = (1usize << i) | (1usize << j);
    Ok(psi
        .amps
        .iter()
        .enumerate()
        .map(|(b, a)| {
            let p = a.norm_sqr();
            if (b & mask).count_ones().is_multiple_of(2) {
                p
            } else {
                -p
            }
        })
        .sum())
}

/// `⟨Z_i⟩`.
pub fn expect_z(psi: &StateVector, i: usize) -> Result<f64> {
    if i >= psi.n {
        return Err(Error::IndexOutOfRange { index: i, n: psi.n });
    }
    Ok(psi
        .amps
        .iter()
        .enumerate()
        .map(|(b, a)| if b >> i & 1 == 0 { a.norm_sqr() } else { -a.norm_sqr() })
        .sum())
}

/// All `⟨Z_i Z_j⟩`, with ones on the diagonal.
pub fn zz_matrix(psi: &StateVector) -> DMatrix<f64> {
    let n = psi.n;
    let mut m = DMatrix::<f64>::identity(n, n);
    let mut upper = vec![0.0f64; n * n];
    let mut sign = vec![0.0f64; n];
    for (b, a) in psi.amps.iter().enumerate() {
        let p = a.norm_sqr();
        if p == 0.0 {
            continue;
        }
        for (i, s) in sign.iter_mut().enumerate() {
            *s = if b >> i & 1 == 0 { p } else { -p };
        }
        for i in 0..n {
            let zi = if b >> i & 1 == 0 { 1.0 } else { -1.0 };
            let row = &mut upper[i * n..(i + 1) * n];
            for j in (i + 1)..n {
                row[j] += zi * sign[j];
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            m[(i, j)] = upper[i * n + j];
            m[(j, i)] = upper[i * n + j];
        }
    }
    m
}

/// `⟨C⟩`.
pub fn expect_cost(psi: &StateVector, inst: &ProblemInstance) -> Result<f64> {
    check_size(psi, inst.n())?;
    let z: Vec<i8> = vec![0; inst.n()];
    let mut z = z;
    let mut total = 0.0;
    for (b, a) in psi.amps.iter().enumerate() {
        let p = a.norm_sqr();
        if p == 0.0 {
            continue;
        }
        for (i, s) in z.iter_mut().enumerate() {
            *s = if b >> i & 1 == 0 { 1 } else { -1 };
        }
        total += p * inst.eval(&z);
    }
    Ok(total)
}

/// `shots` i.i.d. basis indices drawn from `|ψ|²`.
pub fn sample_indices(psi: &StateVector, shots: usize, seed: u64) -> Vec<u64> {
    let mut cumulative = Vec::with_capacity(psi.amps.len());
    let mut acc = 0.0;
    for a in &psi.amps {
        acc += a.norm_sqr();
        cumulative.push(acc);
    }
    let mut rng = seed::rng(seed);
    (0..shots)
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            let k = cumulative.partition_point(|&c| c <= u);
            // Never land on a zero-probability tail state.
            let mut k = k.min(cumulative.len() - 1);
            while k > 0 && psi.amps[k].norm_sqr() == 0.0 {
                k -= 1;
            }
            k as u64
        })
        .collect()
}

/// Measurement outcomes as spin configurations.
pub fn sample_bitstrings(psi: &StateVector, shots: usize, seed: u64) -> Vec<Spins> {
    sample_indices(psi, shots, seed)
        .into_iter()
        .map(|b| Spins::from_index(b, psi.n))
        .collect()
}
