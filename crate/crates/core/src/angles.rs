//! Variational search for QAOA angles.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use rand::Rng as _;

use crate::analytic::P1Model;
use crate::qsim::{CostTable, QaoaAngles};
use crate::{math, seed, Error, ProblemInstance, Result, Sense};

/// Finite-difference step for gradients.
pub const FD_STEP: f64 = 1e-6;

/// `min(2^{4+p}, 2^10)`.
pub fn default_restarts(p: usize) -> usize {
    if p >= 6 {
        1 << 10
    } else {
        1 << (4 + p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngleSearchConfig {
    pub p: usize,
    pub restarts: usize,
    /// BFGS iterations per restart.
    pub max_iters: usize,
    /// Random starting angles are drawn uniformly from this interval.
    pub init_range: (f64, f64),
    pub seed: u64,
    /// Extra start tried before the random ones, padded with zeros to depth `p`.
    pub warm_start: Option<QaoaAngles>,
}

impl AngleSearchConfig {
    pub fn new(p: usize, seed: u64) -> Self {
        Self {
            p,
            restarts: default_restarts(p),
            max_iters: 100,
            init_range: (0.0, TAU),
            seed,
            warm_start: None,
        }
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_warm_start(mut self, angles: QaoaAngles) -> Self {
        self.warm_start = Some(angles);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::InvalidParameter("angle search needs depth p >= 1"));
        }
        if self.restarts == 0 && self.warm_start.is_none() {
            return Err(Error::InvalidParameter("angle search needs at least one restart"));
        }
        let (lo, hi) = self.init_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidParameter("initial angle range must be a finite nonempty interval"));
        }
        if let Some(w) = &self.warm_start {
            if w.depth() > self.p {
                return Err(Error::InvalidParameter("warm start is deeper than the target depth"));
            }
        }
        Ok(())
    }
}

/// Best angles found and their expected objective.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSearchResult {
    pub angles: QaoaAngles,
    pub cost: f64,
    pub evaluations: usize,
}

enum Objective {
    Analytic(P1Model),
    Statevector(CostTable),
}

impl Objective {
    fn expectation(&self, x: &[f64]) -> f64 {
        match self {
            Objective::Analytic(model) => model.cost(x[0], x[1]),
            Objective::Statevector(table) => {
                let angles = QaoaAngles::from_flat(x).expect("even length by construction");
                let psi = table.run_qaoa(&angles);
                table.expectation(&psi).expect("same register size")
            }
        }
    }
}

/// Expected objective `⟨C⟩_p` at the given angles, analytic when `p = 1` and
/// the instance has no one-body terms.
pub fn expected_cost(inst: &ProblemInstance, angles: &QaoaAngles) -> Result<f64> {
    let obj = objective_for(inst, angles.depth())?;
    Ok(obj.expectation(&angles.to_flat()))
}

fn objective_for(inst: &ProblemInstance, p: usize) -> Result<Objective> {
    if p == 1 && !inst.has_linear() {
        Ok(Objective::Analytic(P1Model::new(inst)?))
    } else {
        Ok(Objective::Statevector(CostTable::new(inst)?))
    }
}

/// Multi-start BFGS on `⟨C⟩_p`, minimized for `Sense::Minimize` and
/// maximized otherwise. Restarts draw from independent sub-seeds; the first
/// strictly best one wins.
pub fn optimize_angles(inst: &ProblemInstance, cfg: &AngleSearchConfig) -> Result<AngleSearchResult> {
    cfg.validate()?;
    let obj = objective_for(inst, cfg.p)?;
    let sign = match inst.sense() {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut evaluations = 0usize;
    let mut f = |x: &[f64]| {
        evaluations += 1;
        sign * obj.expectation(x)
    };
    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(cfg.restarts + 1);
    if let Some(w) = &cfg.warm_start {
        let mut x = w.to_flat();
        x.resize(2 * cfg.p, 0.0);
        starts.push(x);
    }
    let (lo, hi) = cfg.init_range;
    for r in 0..cfg.restarts {
        let mut rng = seed::rng(seed::derive_seed(cfg.seed, r as u64));
        starts.push((0..2 * cfg.p).map(|_| rng.random_range(lo..hi)).collect());
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    for x0 in starts {
        let (x, fx) = bfgs(&mut f, x0, cfg.max_iters);
        if best.as_ref().is_none_or(|b| fx < b.1) {
            best = Some((x, fx));
        }
    }
    let (x, fx) = best.expect("at least one start");
    Ok(AngleSearchResult {
        angles: QaoaAngles::from_flat(&x)?,
        cost: sign * fx,
        evaluations,
    })
}

/// Large-`n` optimal depth-one angles for `±1` complete couplings:
/// `γ = 1/(2√n)`, `β = −π/8`.
pub fn fixed_sk_angles(n: usize, p: usize) -> Result<QaoaAngles> {
    if p != 1 {
        return Err(Error::InvalidParameter("fixed SK angles are only available at depth 1"));
    }
    if n == 0 {
        return Err(Error::TooFewVariables(0));
    }
    Ok(QaoaAngles::p1(1.0 / (2.0 * math::sqrt(n as f64)), -PI / 8.0))
}

fn gradient(f: &mut impl FnMut(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|k| {
            probe[k] = x[k] + FD_STEP;
            let up = f(&probe);
            probe[k] = x[k] - FD_STEP;
            let down = f(&probe);
            probe[k] = x[k];
            (up - down) / (2.0 * FD_STEP)
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Quasi-Newton minimization with an inverse-Hessian BFGS update and an
/// Armijo backtracking line search.
fn bfgs(f: &mut impl FnMut(&[f64]) -> f64, mut x: Vec<f64>, max_iters: usize) -> (Vec<f64>, f64) {
    let d = x.len();
    let mut h = vec![0.0; d * d];
    for k in 0..d {
        h[k * d + k] = 1.0;
    }
    let mut fx = f(&x);
    let mut g = gradient(f, &x);
    for _ in 0..max_iters {
        if g.iter().all(|v| math::abs(*v) < 1e-8) {
            break;
        }
        let mut dir: Vec<f64> = (0..d).map(|r| -dot(&h[r * d..(r + 1) * d], &g)).collect();
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            // Lost descent; restart from steepest descent.
            for (k, v) in h.iter_mut().enumerate() {
                *v = if k % (d + 1) == 0 { 1.0 } else { 0.0 };
            }
            dir = g.iter().map(|v| -v).collect();
            slope = dot(&g, &dir);
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + step * b).collect();
            let ft = f(&trial);
            if ft <= fx + 1e-4 * step * slope {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else { break };
        let g_new = gradient(f, &x_new);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        let improvement = fx - f_new;
        x = x_new;
        fx = f_new;
        g = g_new;
        if sy > 1e-12 {
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..d).map(|r| dot(&h[r * d..(r + 1) * d], &y)).collect();
            let yhy = dot(&y, &hy);
            for r in 0..d {
                for c in 0..d {
                    h[r * d + c] += -rho * (hy[r] * s[c] + s[r] * hy[c]) + (rho * rho * yhy + rho) * s[r] * s[c];
                }
            }
        }
        if improvement < 1e-13 * fx.abs().max(1.0) {
            break;
        }
    }
    (x, fx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::brute_force;
    use crate::graphs::{generate, GraphFamily};
    use crate::gwcut::{cut_value, CutProblem};
    use crate::qsim::run_qaoa;

    #[test]
    fn restart_defaults() {
        assert_eq!(default_restarts(1), 32);
        assert_eq!(default_restarts(5), 512);
        assert_eq!(default_restarts(6), 1024);
        assert_eq!(default_restarts(17), 1024);
        assert!(optimize_angles(&generate(GraphFamily::Ring, 6, 0).unwrap(), &AngleSearchConfig::new(0, 0)).is_err());
    }

    #[test]
    fn quadratic_bowl() {
        let mut f = |x: &[f64]| (x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2) + x[0] * x[1];
        let (x, _) = bfgs(&mut f, vec![5.0, 5.0], 100);
        // minimum of the quadratic form
        let (a, b) = (x[0], x[1]);
        assert!((2.0 * (a - 1.0) + b).abs() < 1e-5);
        assert!((20.0 * (b + 2.0) + a).abs() < 1e-5);
    }

    #[test]
    fn ring_reaches_three_quarters_of_the_cut() {
        let inst = generate(GraphFamily::Ring, 8, 0).unwrap();
        let cfg = AngleSearchConfig::new(1, 3).with_restarts(8);
        let r = optimize_angles(&inst, &cfg).unwrap();
        let opt = brute_force(&inst).unwrap();
        assert!((r.cost / opt.value - 0.5).abs() < 1e-8);
        let cp = CutProblem::new(inst.clone()).unwrap();
        let psi = run_qaoa(&inst, &r.angles).unwrap();
        let mean_cut: f64 = psi
            .probabilities()
            .iter()
            .enumerate()
            .map(|(b, p)| p * cut_value(&cp, &crate::Spins::from_index(b as u64, 8)).unwrap())
            .sum();
        assert!((mean_cut / 8.0 - 0.75).abs() < 1e-6);
    }

    #[test]
    fn sk_beats_asymptotic_angles() {
        let inst = generate(GraphFamily::Sk, 14, 1).unwrap();
        let fixed = expected_cost(&inst, &fixed_sk_angles(14, 1).unwrap()).unwrap();
        let r = optimize_angles(&inst, &AngleSearchConfig::new(1, 0).with_restarts(16)).unwrap();
        assert!(r.cost <= fixed + 1e-12);
    }

    #[test]
    fn fixed_angles() {
        let a = fixed_sk_angles(100, 1).unwrap();
        assert!((a.gammas()[0] - 0.05).abs() < 1e-15);
        assert_eq!(a.betas()[0], -PI / 8.0);
        assert_eq!(fixed_sk_angles(4, 1).unwrap().gammas()[0], 0.25);
        assert!(fixed_sk_angles(4, 2).is_err());
    }

    #[test]
    fn more_restarts_never_hurt() {
        let inst = generate(GraphFamily::Nws, 8, 4).unwrap();
        let mut prev = f64::INFINITY;
        for restarts in [1, 2, 4, 8] {
            let r = optimize_angles(&inst, &AngleSearchConfig::new(2, 11).with_restarts(restarts)).unwrap();
            assert!(r.cost <= prev + 1e-12);
            prev = r.cost;
        }
    }

    #[test]
    fn warm_start_and_statevector_path_agree_with_analytic() {
        let inst = generate(GraphFamily::Reg3, 8, 2).unwrap();
        let a = QaoaAngles::p1(0.4, -0.3);
        let analytic = expected_cost(&inst, &a).unwrap();
        let psi = run_qaoa(&inst, &a).unwrap();
        let sim = crate::qsim::expect_cost(&psi, &inst).unwrap();
        assert!((analytic - sim).abs() < 1e-10);
        let p1 = optimize_angles(&inst, &AngleSearchConfig::new(1, 0).with_restarts(4)).unwrap();
        let p2 = optimize_angles(
            &inst,
            &AngleSearchConfig::new(2, 0).with_restarts(0).with_warm_start(p1.angles.clone()),
        )
        .unwrap();
        assert!(p2.cost <= p1.cost + 1e-9);
    }
}
