//! Sweep configuration and the experiment drivers.
//!
//! Every experiment walks `families × sizes × instances`. Instance `k` of a
//! sweep is generated from `derive_seed(cfg.seed, k)`; angle search, rounding
//! and noise draw further sub-seeds from that instance seed, so a row depends
//! only on the configuration and never on evaluation order.

use std::collections::BTreeMap;
use std::path::PathBuf;

use qrr_core::analytic::{p1_corr, p1_cost, sk_large_n_corr};
use qrr_core::angles::{default_restarts, fixed_sk_angles, optimize_angles, AngleSearchConfig};
use qrr_core::exact::{brute_force, MAX_EXACT};
use qrr_core::graphs::{generate, mis_instance, GraphFamily};
use qrr_core::gwcut::{cut_density, gw_relax_round, optimize_correcting_vector, CutProblem};
use qrr_core::linalg::commutator_norm;
use qrr_core::qsim::{AnnealSchedule, CostTable, QaoaAngles, MAX_QUBITS};
use qrr_core::rounding::{classical_rr, corr_from_state, relax_and_round, synthetic_shot_noise, CorrMatrix, RoundOptions};
use qrr_core::seed::derive_seed;
use qrr_core::{ProblemInstance, Sense};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};
use crate::results::{aggregate, mean_se, sort_rows, Format, InstanceKey, ResultRow};
use crate::timing::timing_experiment;

/// Literature value of the Parisi constant `P*`.
pub const PARISI: f64 = 0.763166;

/// Cap on the default number of angle-search restarts.
pub const RESTART_CAP: usize = 64;

/// Mean-ratio level that defines the shot count `n*(N)` in the `κ` fit.
pub const KAPPA_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    /// Normalized SK objective of QRR, classical RR and QAOA at depth one.
    Fig1c,
    /// Approximation ratios of QAOA, QRR and classical RR per family and depth.
    Fig2,
    /// Max-cut densities: classical and quantum eigenvalue-bound rounding, QAOA.
    Fig3,
    /// Same measurements as fig2, labeled for the improvement ratio.
    Fig4,
    /// Commutator norm between the weight and correlation matrices.
    Fig5,
    /// Objective under finite-shot noise on the correlation matrix.
    Shots,
    /// Wall time of the relax-and-round steps.
    Timing,
    /// QRR over classical RR objective ratio at depth one, larger sizes.
    Fig9,
    /// Weighted independent sets from a Trotterized anneal.
    Mis,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Fig1c => "fig1c",
            Experiment::Fig2 => "fig2",
            Experiment::Fig3 => "fig3",
            Experiment::Fig4 => "fig4",
            Experiment::Fig5 => "fig5",
            Experiment::Shots => "shots",
            Experiment::Timing => "timing",
            Experiment::Fig9 => "fig9",
            Experiment::Mis => "mis",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AngleMode {
    /// `γ = 1/(2√N)`, `β = −π/8` for SK at depth one; other cases fall back to `opt`.
    Fixed,
    /// Multi-start BFGS, warm-started from the previous depth.
    Opt,
}

/// Matrix fed to the shot-noise experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ShotMatrix {
    /// Large-`N` SK matrix `W/√(eN) − W²/(2eN)`.
    Asymptotic,
    /// Closed-form depth-one correlators at the configured angles.
    Analytic,
}

/// Full description of a sweep. Missing JSON fields take the defaults of
/// the experiment named in the same document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub experiment: Experiment,
    pub families: Vec<String>,
    pub sizes: Vec<usize>,
    /// QAOA depths `p`.
    pub depths: Vec<usize>,
    pub instances: usize,
    pub seed: u64,
    pub angles: AngleMode,
    /// Angle-search restarts per depth; `None` means `min(2^{4+p}, 1024, 64)`.
    pub restarts: Option<usize>,
    /// BFGS iterations per restart.
    pub max_iters: usize,
    /// Shot counts `n_ex` (shots, timing).
    pub shots: Vec<usize>,
    /// Anneal times `T` (mis).
    pub anneal_times: Vec<f64>,
    pub dt: f64,
    /// Geometric-graph density (mis).
    pub rho: f64,
    /// Independence penalty `J` (mis).
    pub penalty: f64,
    pub shot_matrix: ShotMatrix,
    /// Eigenvectors extracted in the timing experiment.
    pub eigen_k: usize,
    /// Timing repetitions per size.
    pub repeats: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl SweepConfig {
    /// Desk-scale defaults for an experiment.
    pub fn for_experiment(experiment: Experiment) -> Self {
        let base = SweepConfig {
            experiment,
            families: vec!["SK".into()],
            sizes: vec![12],
            depths: vec![1],
            instances: 100,
            seed: 0,
            angles: AngleMode::Opt,
            restarts: None,
            max_iters: 100,
            shots: vec![],
            anneal_times: vec![],
            dt: AnnealSchedule::DEFAULT_DT,
            rho: 7.0,
            penalty: 2.0,
            shot_matrix: ShotMatrix::Asymptotic,
            eigen_k: 5,
            repeats: 3,
            out: None,
            format: Format::Csv,
        };
        let all4 = || ["SK", "REG3", "NWS", "BA"].map(String::from).to_vec();
        match experiment {
            Experiment::Fig1c => SweepConfig {
                sizes: vec![8, 10, 12, 14, 16],
                angles: AngleMode::Fixed,
                ..base
            },
            Experiment::Fig2 | Experiment::Fig4 => SweepConfig {
                families: all4(),
                depths: vec![1, 2, 3],
                ..base
            },
            Experiment::Fig3 => SweepConfig {
                families: vec!["REG3".into(), "NWS".into()],
                sizes: vec![8, 10, 12],
                ..base
            },
            Experiment::Fig5 => SweepConfig {
                sizes: vec![8, 12, 16, 20],
                angles: AngleMode::Fixed,
                ..base
            },
            Experiment::Shots => SweepConfig {
                sizes: vec![32, 64, 128],
                shots: (2..=10).map(|k| 1usize << (2 * k)).collect(),
                angles: AngleMode::Fixed,
                ..base
            },
            Experiment::Timing => SweepConfig {
                sizes: vec![256, 512, 1024, 2048],
                shots: vec![1024],
                instances: 1,
                angles: AngleMode::Fixed,
                ..base
            },
            Experiment::Fig9 => SweepConfig {
                families: all4(),
                sizes: vec![16, 32, 64, 128, 256],
                instances: 20,
                ..base
            },
            Experiment::Mis => SweepConfig {
                families: vec!["MIS".into()],
                sizes: vec![10],
                depths: vec![],
                anneal_times: vec![5.0, 10.0, 20.0, 40.0],
                ..base
            },
        }
    }

    /// Restarts used at depth `p`.
    pub fn restarts_for(&self, p: usize) -> usize {
        self.restarts.unwrap_or_else(|| default_restarts(p).min(RESTART_CAP))
    }

    /// Parsed family list.
    pub fn graph_families(&self) -> Result<Vec<GraphFamily>> {
        self.families
            .iter()
            .map(|f| {
                f.parse::<GraphFamily>()
                    .map_err(|_| BenchError::config(format!("unknown family {f:?}; expected SK, REG3, NWS, BA, RING, RING_NNN, HONEYCOMB, BETHE(d,depth), GEOMETRIC(rho) or COMPLETE")))
            })
            .collect()
    }

    /// Checks everything that can be checked before running.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(BenchError::Config(msg));
        let exp = self.experiment.as_str();
        if self.instances == 0 {
            return bad("instances must be at least 1".into());
        }
        if self.sizes.is_empty() {
            return bad(format!("{exp}: sizes is empty; give at least one problem size, e.g. --n 12"));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        if self.restarts == Some(0) {
            return bad("restarts must be at least 1".into());
        }
        let statevector = matches!(self.experiment, Experiment::Fig2 | Experiment::Fig3 | Experiment::Fig4 | Experiment::Mis)
            || (self.experiment == Experiment::Fig5 && self.depths.iter().any(|&p| p > 1));
        let limit = if statevector { MAX_QUBITS.min(MAX_EXACT) } else { usize::MAX };
        if let Some(&n) = self.sizes.iter().find(|&&n| n > limit) {
            return bad(format!("{exp}: size {n} exceeds the statevector bound of {limit} qubits"));
        }
        match self.experiment {
            Experiment::Fig2 | Experiment::Fig3 | Experiment::Fig4 | Experiment::Fig5 => {
                if self.depths.is_empty() || self.depths.contains(&0) {
                    return bad(format!("{exp}: depths must be a nonempty list of p >= 1"));
                }
            }
            Experiment::Fig1c | Experiment::Fig9 | Experiment::Shots | Experiment::Timing => {
                if self.depths != [1] {
                    return bad(format!("{exp} uses the closed-form depth-one correlators; set depths to [1]"));
                }
            }
            Experiment::Mis => {
                if self.anneal_times.is_empty() {
                    return bad("mis: anneal_times is empty; give at least one total time T".into());
                }
                for &t in &self.anneal_times {
                    AnnealSchedule::new(t, self.dt)
                        .map_err(|_| BenchError::config(format!("mis: anneal time {t} is not a positive multiple of dt = {}", self.dt)))?;
                }
                for &n in &self.sizes {
                    mis_instance(n, self.rho, self.penalty, 0).map_err(|e| BenchError::config(format!("mis: N = {n}: {e}")))?;
                }
                return Ok(());
            }
        }
        if matches!(self.experiment, Experiment::Shots | Experiment::Timing) && (self.shots.is_empty() || self.shots.contains(&0)) {
            return bad(format!("{exp}: shots must be a nonempty list of positive counts"));
        }
        if self.experiment == Experiment::Timing {
            if self.eigen_k == 0 || self.repeats == 0 {
                return bad("timing: eigen_k and repeats must be at least 1".into());
            }
            if let Some(&n) = self.sizes.iter().find(|&&n| n <= self.eigen_k) {
                return bad(format!("timing: size {n} must exceed eigen_k = {}", self.eigen_k));
            }
        }
        let families = self.graph_families()?;
        if families.is_empty() {
            return bad(format!("{exp}: families is empty"));
        }
        for fam in &families {
            if matches!(self.experiment, Experiment::Fig1c | Experiment::Shots | Experiment::Timing) && *fam != GraphFamily::Sk {
                return bad(format!("{exp} is defined for the SK family only, got {fam}"));
            }
            for &n in &self.sizes {
                generate(*fam, n, 0).map_err(|e| BenchError::config(format!("{exp}: family {fam} with N = {n}: {e}")))?;
            }
        }
        if self.experiment == Experiment::Fig3 {
            for fam in &families {
                CutProblem::new(generate(*fam, self.sizes[0], 0)?)
                    .map_err(|e| BenchError::config(format!("fig3 needs nonnegative weights; family {fam}: {e}")))?;
            }
        }
        Ok(())
    }
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig::for_experiment(Experiment::Fig2)
    }
}

/// Validates `cfg`, runs it, and returns raw plus aggregate rows in canonical order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let mut rows = match cfg.experiment {
        Experiment::Fig1c => fig1c(cfg)?,
        Experiment::Fig2 | Experiment::Fig4 => fig2(cfg)?,
        Experiment::Fig3 => fig3(cfg)?,
        Experiment::Fig5 => fig5(cfg)?,
        Experiment::Shots => shots(cfg)?,
        Experiment::Timing => timing_experiment(&cfg.sizes, cfg.shots[0], cfg.eigen_k, cfg.repeats, cfg.seed)?,
        Experiment::Fig9 => fig9(cfg)?,
        Experiment::Mis => mis(cfg)?,
    };
    let agg = aggregate(&rows);
    rows.extend(agg);
    if cfg.experiment == Experiment::Shots {
        rows.extend(kappa_fit(&rows));
    }
    sort_rows(&mut rows);
    Ok(rows)
}

/// Seed of instance `index` in a sweep.
pub fn instance_seed(cfg: &SweepConfig, index: usize) -> u64 {
    derive_seed(cfg.seed, index as u64)
}

const ANGLE_STREAM: u64 = 1;
const ROUND_STREAM: u64 = 2;
const NOISE_STREAM: u64 = 3;

struct Ctx<'a> {
    cfg: &'a SweepConfig,
    family: GraphFamily,
    n: usize,
    index: usize,
    seed: u64,
    inst: ProblemInstance,
}

impl Ctx<'_> {
    fn row(&self, depth: f64, metric: &str, value: f64) -> ResultRow {
        ResultRow::new(
            self.cfg.experiment.as_str(),
            &self.family.to_string(),
            self.n,
            depth,
            InstanceKey::Index(self.index as u64),
            metric,
            value,
        )
    }

    fn round_opts(&self) -> RoundOptions {
        RoundOptions::all(derive_seed(self.seed, ROUND_STREAM))
    }
}

fn for_each_instance(cfg: &SweepConfig, mut body: impl FnMut(&Ctx) -> Result<()>) -> Result<()> {
    for family in cfg.graph_families()? {
        for &n in &cfg.sizes {
            for index in 0..cfg.instances {
                let seed = instance_seed(cfg, index);
                let inst = generate(family, n, seed)?;
                body(&Ctx {
                    cfg,
                    family,
                    n,
                    index,
                    seed,
                    inst,
                })?;
            }
        }
    }
    Ok(())
}

/// Angles for every requested depth, each depth warm-started from the previous one.
pub fn angle_ladder(
    inst: &ProblemInstance,
    family: GraphFamily,
    depths: &[usize],
    cfg: &SweepConfig,
    seed: u64,
) -> Result<BTreeMap<usize, QaoaAngles>> {
    let pmax = depths.iter().copied().max().unwrap_or(0);
    let mut out = BTreeMap::new();
    let mut prev: Option<QaoaAngles> = None;
    for p in 1..=pmax {
        let angles = if p == 1 && cfg.angles == AngleMode::Fixed && family == GraphFamily::Sk {
            fixed_sk_angles(inst.n(), 1)?
        } else {
            let mut search = AngleSearchConfig::new(p, derive_seed(seed, p as u64)).with_restarts(cfg.restarts_for(p));
            search.max_iters = cfg.max_iters;
            if let Some(w) = prev.take() {
                search = search.with_warm_start(w);
            }
            optimize_angles(inst, &search)?.angles
        };
        if depths.contains(&p) {
            out.insert(p, angles.clone());
        }
        prev = Some(angles);
    }
    Ok(out)
}

fn sk_norm(n: usize) -> f64 {
    2.0 * (n as f64).powf(1.5)
}

fn fig1c(cfg: &SweepConfig) -> Result<Vec<ResultRow>> {
    let mut rows = vec![
        ResultRow::new("fig1c", "SK", 0, 1.0, InstanceKey::Reference, "parisi", -PARISI),
        ResultRow::new("fig1c", "SK", 0, 1.0, InstanceKey::Reference, "rr_limit", -2.0 / std::f64::consts::PI),
        ResultRow::new("fig1c", "SK", 0, 1.0, InstanceKey::Reference, "qaoa_p1_limit", -1.0 / (4.0 * std::f64::consts::E).sqrt()),
    ];
    for_each_instance(cfg, |c| {
        let angles = &angle_ladder(&c.inst, c.family, &[1], cfg, derive_seed(c.seed, ANGLE_STREAM))?[&1];
        let (g, b) = (angles.gammas()[0], angles.betas()[0]);
        let z = p1_corr(&c.inst, g, b)?;
        let qrr = relax_and_round(z.entries(), &c.inst, c.round_opts())?;
        let rr = classical_rr(&c.inst, derive_seed(c.seed, ROUND_STREAM))?;
        let qaoa = p1_cost(&c.inst, g, b)?;
        let norm = sk_norm(c.n);
        rows.push(c.row(1.0, "qrr_norm", qrr.value / norm));
        rows.push(c.row(1.0, "rr_norm", rr.value / norm));
        rows.push(c.row(1.0, "qaoa_norm", qaoa / norm));
        rows.push(c.row(1.0, "agree", f64::from(u8::from(qrr.spins.equivalent(&rr.spins)))));
        if c.n <= 20 {
            let opt = brute_force(&c.inst)?;
            rows.push(c.row(1.0, "opt_norm", opt.value / norm));
            rows.push(c.row(1.0, "alpha_qrr", qrr.value / opt.value));
            rows.push(c.row(1.0, "alpha_rr", rr.value / opt.value));
            rows.push(c.row(1.0, "alpha_qaoa", qaoa / opt.value));
        }
        Ok(())
    })?;
    Ok(rows)
}

fn fig2(cfg: &SweepConfig) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for_each_instance(cfg, |c| {
        let opt = brute_force(&c.inst)?;
        let rr = classical_rr(&c.inst, derive_seed(c.seed, ROUND_STREAM))?;
        rows.push(c.row(0.0, "opt_value", opt.value));
        rows.push(c.row(0.0, "alpha_rr", rr.value / opt.value));
        let table = CostTable::new(&c.inst)?;
        for (p, angles) in angle_ladder(&c.inst, c.family, &cfg.depths, cfg, derive_seed(c.seed, ANGLE_STREAM))? {
            let psi = table.run_qaoa(&angles);
            let alpha_qaoa = table.expectation(&psi)? / opt.value;
            let z = corr_from_state(&psi);
            let qrr = relax_and_round(z.entries(), &c.inst, c.round_opts())?;
            let alpha_qrr = qrr.value / opt.value;
            let d = p as f64;
            rows.push(c.row(d, "alpha_qaoa", alpha_qaoa));
            rows.push(c.row(d, "alpha_qrr", alpha_qrr));
            rows.push(c.row(d, "improvement", (1.0 - alpha_qrr) / (1.0 - alpha_qaoa)));
        }
        Ok(())
    })?;
    Ok(rows)
}

fn fig3(cfg: &SweepConfig) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for_each_instance(cfg, |c| {
        let cp = CutProblem::new(c.inst.clone())?;
        let total = cp.total_weight();
        // Minimizing the Ising objective maximizes the cut.
        let opt = brute_force(&c.inst)?;
        let opt_cut = (total - opt.value / 2.0) / 2.0;
        let round_seed = derive_seed(c.seed, ROUND_STREAM);
        let w = c.inst.weights();
        let u = optimize_correcting_vector(&cp, w)?.u;
        let gw = gw_relax_round(&cp, w, &u, round_seed)?;
        rows.push(c.row(0.0, "density_opt", cut_density(&cp, opt_cut)));
        rows.push(c.row(0.0, "density_gw", cut_density(&cp, gw.value)));
        rows.push(c.row(0.0, "alpha_gw", gw.value / opt_cut));
        let table = CostTable::new(&c.inst)?;
        for (p, angles) in angle_ladder(&c.inst, c.family, &cfg.depths, cfg, derive_seed(c.seed, ANGLE_STREAM))? {
            let psi = table.run_qaoa(&angles);
            let qaoa_cut = (total - table.expectation(&psi)? / 2.0) / 2.0;
            let z = corr_from_state(&psi);
            let uq = optimize_correcting_vector(&cp, z.entries())?.u;
            let qgw = gw_relax_round(&cp, z.entries(), &uq, round_seed)?;
            let d = p as f64;
            rows.push(c.row(d, "density_qaoa", cut_density(&cp, qaoa_cut)));
            rows.push(c.row(d, "alpha_qaoa", qaoa_cut / opt_cut));
            rows.push(c.row(d, "density_qgw", cut_density(&cp, qgw.value)));
            rows.push(c.row(d, "alpha_qgw", qgw.value / opt_cut));
        }
        Ok(())
    })?;
    Ok(rows)
}

/// Correlation matrix at the given depth: closed form at `p = 1`, statevector otherwise.
fn correlations(inst: &ProblemInstance, angles: &QaoaAngles) -> Result<CorrMatrix> {
    if angles.depth() == 1 && !inst.has_linear() {
        Ok(p1_corr(inst, angles.gammas()[0], angles.betas()[0])?)
    } else {
        Ok(corr_from_state(&qrr_core::qsim::run_qaoa(inst, angles)?))
    }
}

fn fig5(cfg: &SweepConfig) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for_each_instance(cfg, |c| {
        let w = c.inst.weights();
        let wn = qrr_core::linalg::spectral_norm(w)?;
        for (p, angles) in angle_ladder(&c.inst, c.family, &cfg.depths, cfg, derive_seed(c.seed, ANGLE_STREAM))? {
            let z = correlations(&c.inst, &angles)?;
            let comm = commutator_norm(w, z.entries())?;
            let zn = qrr_core::linalg::spectral_norm(z.entries())?;
            rows.push(c.row(p as f64, "commutator", comm));
            rows.push(c.row(p as f64, "commutator_rel", if wn * zn > 0.0 { comm / (wn * zn) } else { 0.0 }));
        }
        Ok(())
    })?;
    Ok(rows)
}

/// Rows use `depth = n_ex`; `depth = 0` holds the noise-free value.
fn shots(cfg: &SweepConfig) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for_each_instance(cfg, |c| {
        let z = match cfg.shot_matrix {
            ShotMatrix::Asymptotic => sk_large_n_corr(&c.inst)?,
            ShotMatrix::Analytic => {
                let angles = &angle_ladder(&c.inst, c.family, &[1], cfg, derive_seed(c.seed, ANGLE_STREAM))?[&1];
                p1_corr(&c.inst, angles.gammas()[0], angles.betas()[0])?
            }
        };
        let exact = relax_and_round(z.entries(), &c.inst, c.round_opts())?.value;
        rows.push(c.row(0.0, "value", exact));
        for (k, &n_ex) in cfg.shots.iter().enumerate() {
            let noise_seed = derive_seed(derive_seed(c.seed, NOISE_STREAM), k as u64);
            let noisy = synthetic_shot_noise(&z, n_ex, noise_seed)?;
            let v = relax_and_round(noisy.entries(), &c.inst, c.round_opts())?.value;
            rows.push(c.row(n_ex as f64, "value", v));
            rows.push(c.row(n_ex as f64, "ratio", v / exact));
        }
        Ok(())
    })?;
    Ok(rows)
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Shot count where the mean ratio curve first reaches `level`, interpolated in `log n_ex`.
pub fn crossing_shots(curve: &[(f64, f64)], level: f64) -> Option<f64> {
    let first = curve.first()?;
    if first.1 >= level {
        return Some(first.0);
    }
    curve.windows(2).find(|w| w[1].1 >= level).map(|w| {
        let (x0, y0) = (w[0].0.ln(), w[0].1);
        let (x1, y1) = (w[1].0.ln(), w[1].1);
        (x0 + (level - y0) / (y1 - y0) * (x1 - x0)).exp()
    })
}

/// Exponent `κ` of `n*(N) ∝ N^κ`, where `n*` is the crossing of [`KAPPA_LEVEL`].
fn kappa_fit(rows: &[ResultRow]) -> Vec<ResultRow> {
    let mut curves: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        if r.instance == InstanceKey::Mean && r.metric == "ratio" {
            curves.entry(r.n).or_default().push((r.depth, r.value));
        }
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (n, mut curve) in curves {
        curve.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(nstar) = crossing_shots(&curve, KAPPA_LEVEL) {
            xs.push((n as f64).ln());
            ys.push(nstar.ln());
        }
    }
    if xs.len() < 2 {
        return Vec::new();
    }
    let (kappa, _) = linear_fit(&xs, &ys);
    vec![ResultRow::new("shots", "SK", 0, 0.0, InstanceKey::Fit, "kappa", kappa)]
}

fn fig9(cfg: &SweepConfig) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for_each_instance(cfg, |c| {
        let angles = &angle_ladder(&c.inst, c.family, &[1], cfg, derive_seed(c.seed, ANGLE_STREAM))?[&1];
        let z = p1_corr(&c.inst, angles.gammas()[0], angles.betas()[0])?;
        let qrr = relax_and_round(z.entries(), &c.inst, c.round_opts())?;
        let rr = classical_rr(&c.inst, derive_seed(c.seed, ROUND_STREAM))?;
        rows.push(c.row(1.0, "value_qrr", qrr.value));
        rows.push(c.row(1.0, "value_rr", rr.value));
        rows.push(c.row(1.0, "ratio", qrr.value / rr.value));
        Ok(())
    })?;
    Ok(rows)
}

/// Rows use `depth = T`; `opt_value` sits at `depth = 0`.
fn mis(cfg: &SweepConfig) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for &n in &cfg.sizes {
        for index in 0..cfg.instances {
            let seed = instance_seed(cfg, index);
            let inst = mis_instance(n, cfg.rho, cfg.penalty, seed)?;
            debug_assert_eq!(inst.sense(), Sense::Minimize);
            let row = |depth: f64, metric: &str, value: f64| {
                ResultRow::new("mis", "MIS", n, depth, InstanceKey::Index(index as u64), metric, value)
            };
            let opt = brute_force(&inst)?;
            rows.push(row(0.0, "opt_value", opt.value));
            let table = CostTable::new(&inst)?;
            for &t in &cfg.anneal_times {
                let psi = table.run_anneal(&AnnealSchedule::new(t, cfg.dt)?);
                let z = corr_from_state(&psi);
                let qrr = relax_and_round(z.entries(), &inst, RoundOptions::all(derive_seed(seed, ROUND_STREAM)))?;
                rows.push(row(t, "anneal_cost", table.expectation(&psi)?));
                rows.push(row(t, "qrr_value", qrr.value));
            }
        }
    }
    Ok(rows)
}

/// Mean and standard error of one metric across instances, from raw rows.
pub fn metric_stats(rows: &[ResultRow], family: &str, n: usize, depth: f64, metric: &str) -> (f64, f64) {
    let values: Vec<f64> = rows
        .iter()
        .filter(|r| {
            matches!(r.instance, InstanceKey::Index(_)) && r.family == family && r.n == n && r.depth == depth && r.metric == metric
        })
        .map(|r| r.value)
        .collect();
    mean_se(&values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(exp: Experiment) -> SweepConfig {
        SweepConfig {
            instances: 3,
            restarts: Some(2),
            ..SweepConfig::for_experiment(exp)
        }
    }

    #[test]
    fn validation_messages() {
        let mut cfg = small(Experiment::Fig2);
        cfg.sizes.clear();
        let err = cfg.validate().unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("sizes is empty"));

        let mut cfg = small(Experiment::Fig2);
        cfg.instances = 0;
        assert!(cfg.validate().is_err());

        let mut cfg = small(Experiment::Fig2);
        cfg.sizes = vec![40];
        assert!(cfg.validate().unwrap_err().to_string().contains("statevector bound"));

        let mut cfg = small(Experiment::Fig2);
        cfg.families = vec!["REG3".into()];
        cfg.sizes = vec![7];
        assert!(cfg.validate().unwrap_err().to_string().contains("REG3"));

        let mut cfg = small(Experiment::Fig2);
        cfg.families = vec!["nope".into()];
        assert!(cfg.validate().unwrap_err().to_string().contains("unknown family"));

        let mut cfg = small(Experiment::Mis);
        cfg.anneal_times = vec![0.25];
        assert!(cfg.validate().is_err());

        let mut cfg = small(Experiment::Fig1c);
        cfg.depths = vec![2];
        assert!(cfg.validate().is_err());

        for exp in [
            Experiment::Fig1c,
            Experiment::Fig2,
            Experiment::Fig3,
            Experiment::Fig4,
            Experiment::Fig5,
            Experiment::Shots,
            Experiment::Timing,
            Experiment::Fig9,
            Experiment::Mis,
        ] {
            SweepConfig::for_experiment(exp).validate().unwrap();
        }
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = small(Experiment::Shots);
        let text = serde_json::to_string(&cfg).unwrap();
        let back: SweepConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn replay_is_identical() {
        for exp in [Experiment::Fig2, Experiment::Shots, Experiment::Mis] {
            let mut cfg = small(exp);
            cfg.depths.truncate(2);
            cfg.sizes.truncate(1);
            cfg.shots.truncate(3);
            cfg.anneal_times.truncate(2);
            if exp == Experiment::Fig2 {
                cfg.sizes = vec![8];
            }
            let a = run_sweep(&cfg).unwrap();
            let b = run_sweep(&cfg).unwrap();
            assert_eq!(a, b);
            assert!(!a.is_empty());
        }
    }

    #[test]
    fn rows_are_uniquely_keyed() {
        let mut cfg = small(Experiment::Fig3);
        cfg.sizes = vec![8];
        cfg.depths = vec![1, 2];
        let rows = run_sweep(&cfg).unwrap();
        let mut keys: Vec<_> = rows
            .iter()
            .map(|r| (r.experiment.clone(), r.family.clone(), r.n, r.depth.to_bits(), r.instance, r.metric.clone()))
            .collect();
        let len = keys.len();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), len);
        let mut sorted = rows.clone();
        sort_rows(&mut sorted);
        assert_eq!(sorted, rows);
    }

    #[test]
    fn aggregates_match_raw_rows() {
        let cfg = small(Experiment::Fig9);
        let cfg = SweepConfig {
            sizes: vec![16],
            ..cfg
        };
        let rows = run_sweep(&cfg).unwrap();
        for fam in ["SK", "REG3", "NWS", "BA"] {
            let (mean, se) = metric_stats(&rows, fam, 16, 1.0, "ratio");
            let agg_mean = crate::results::lookup(&rows, fam, 16, 1.0, InstanceKey::Mean, "ratio").unwrap();
            let agg_se = crate::results::lookup(&rows, fam, 16, 1.0, InstanceKey::Se, "ratio").unwrap();
            assert_eq!(mean, agg_mean);
            assert_eq!(se, agg_se);
        }
    }

    #[test]
    fn fig1c_has_reference_rows() {
        let mut cfg = small(Experiment::Fig1c);
        cfg.sizes = vec![8];
        let rows = run_sweep(&cfg).unwrap();
        let parisi = crate::results::lookup(&rows, "SK", 0, 1.0, InstanceKey::Reference, "parisi").unwrap();
        assert_eq!(parisi, -PARISI);
        let qaoa = crate::results::lookup(&rows, "SK", 0, 1.0, InstanceKey::Reference, "qaoa_p1_limit").unwrap();
        assert!((qaoa + 0.303265).abs() < 1e-6);
    }

    #[test]
    fn crossing_and_fit() {
        let curve = [(10.0, 0.5), (100.0, 0.9), (1000.0, 1.0)];
        let x = crossing_shots(&curve, 0.95).unwrap();
        assert!((x - 10f64.powf(2.5)).abs() < 1e-9);
        assert_eq!(crossing_shots(&curve, 2.0), None);
        let (slope, icpt) = linear_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]);
        assert!((slope - 2.0).abs() < 1e-12 && (icpt - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fixed_angles_only_for_sk_depth_one() {
        let cfg = small(Experiment::Fig2);
        let cfg = SweepConfig {
            angles: AngleMode::Fixed,
            ..cfg
        };
        let inst = generate(GraphFamily::Sk, 8, 1).unwrap();
        let ladder = angle_ladder(&inst, GraphFamily::Sk, &[1, 2], &cfg, 5).unwrap();
        assert_eq!(ladder[&1], fixed_sk_angles(8, 1).unwrap());
        assert_eq!(ladder[&2].depth(), 2);
    }
}
