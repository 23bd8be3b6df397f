//! Wall-time measurement of the relax-and-round steps.
//!
//! Per size `N`: the correlation matrix is built from `n_ex` random
//! bitstrings, the `k` lowest eigenvectors are extracted from the closed-form
//! depth-one SK matrix (built untimed), each is sign-rounded, and the
//! objective of every rounded candidate is evaluated.

use std::time::Instant;

use qrr_core::analytic::p1_corr;
use qrr_core::angles::fixed_sk_angles;
use qrr_core::graphs::{generate, GraphFamily};
use qrr_core::linalg::{extremal_eigenpairs, Extreme};
use qrr_core::rounding::corr_from_samples;
use qrr_core::seed::{derive_seed, rng};
use qrr_core::Spins;
use rand::Rng;

use crate::error::Result;
use crate::results::{InstanceKey, ResultRow};
use crate::sweep::linear_fit;

/// Seconds per step for one size and repetition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepTimes {
    pub build: f64,
    pub eigen: f64,
    pub round: f64,
    pub cost: f64,
}

impl StepTimes {
    pub fn total(&self) -> f64 {
        self.build + self.eigen + self.round + self.cost
    }
}

/// Times one pass of the pipeline at size `n`. Returns the times and the
/// number of eigenvectors extracted.
pub fn time_pipeline(n: usize, n_ex: usize, k: usize, seed: u64) -> Result<(StepTimes, usize)> {
    let inst = generate(GraphFamily::Sk, n, seed)?;
    let angles = fixed_sk_angles(n, 1)?;
    let analytic = p1_corr(&inst, angles.gammas()[0], angles.betas()[0])?;
    let mut r = rng(derive_seed(seed, 1));
    let samples: Vec<Spins> = (0..n_ex)
        .map(|_| Spins::from_signs((0..n).map(|_| if r.random::<bool>() { 1.0 } else { -1.0 }), || 1))
        .collect();

    let t = Instant::now();
    let built = corr_from_samples(&samples)?;
    let build = t.elapsed().as_secs_f64();
    std::hint::black_box(&built);

    let t = Instant::now();
    let pairs = extremal_eigenpairs(analytic.entries(), k, Extreme::Lowest, derive_seed(seed, 2))?;
    let eigen = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let rounded: Vec<Spins> = pairs
        .vectors
        .column_iter()
        .flat_map(|c| {
            let s = Spins::from_signs(c.iter().copied(), || 1);
            let f = s.flipped();
            [s, f]
        })
        .collect();
    let round = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let mut best = f64::INFINITY;
    for s in &rounded {
        best = best.min(inst.objective_value(s)?);
    }
    let cost = t.elapsed().as_secs_f64();
    std::hint::black_box(best);

    Ok((StepTimes { build, eigen, round, cost }, pairs.vectors.ncols()))
}

/// Rows `t_build`, `t_eigen`, `t_round`, `t_cost`, `t_total` per size and
/// repetition (instance column = repetition), plus a `slope` fit row of
/// `log t_total` against `log N` over the per-size means.
pub fn timing_experiment(sizes: &[usize], n_ex: usize, k: usize, repeats: usize, seed: u64) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &n in sizes {
        let mut total = 0.0;
        for rep in 0..repeats {
            let (t, _) = time_pipeline(n, n_ex, k, derive_seed(seed, rep as u64))?;
            let key = InstanceKey::Index(rep as u64);
            for (metric, v) in [
                ("t_build", t.build),
                ("t_eigen", t.eigen),
                ("t_round", t.round),
                ("t_cost", t.cost),
                ("t_total", t.total()),
            ] {
                rows.push(ResultRow::new("timing", "SK", n, 1.0, key, metric, v));
            }
            total += t.total();
        }
        xs.push((n as f64).ln());
        ys.push((total / repeats as f64).ln());
    }
    if xs.len() >= 2 {
        let (slope, _) = linear_fit(&xs, &ys);
        rows.push(ResultRow::new("timing", "SK", 0, 1.0, InstanceKey::Fit, "slope", slope));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extracts_k_vectors() {
        let (t, k) = time_pipeline(80, 50, 5, 3).unwrap();
        assert_eq!(k, 5);
        assert!(t.total() > 0.0);
    }

    #[test]
    fn rows_and_fit() {
        let rows = timing_experiment(&[70, 140], 20, 5, 1, 0).unwrap();
        assert_eq!(rows.len(), 11);
        assert!(rows.iter().any(|r| r.metric == "slope" && r.value.is_finite()));
    }
}
