//! Command-line front end.
//!
//! Every subcommand accepts `--config <json>`; keys in the file override the
//! corresponding flags. Sweep-style commands take [`SweepConfig`] keys, the
//! others take their flag names.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use qrr_core::analytic::p1_corr;
use qrr_core::angles::expected_cost;
use qrr_core::exact::brute_force;
use qrr_core::graphs::{generate, mis_instance, GraphFamily};
use qrr_core::qsim::{run_qaoa, sample_bitstrings, QaoaAngles, MAX_QUBITS};
use qrr_core::rounding::{classical_rr, corr_from_samples, corr_from_state, relax_and_round, CorrMatrix, RoundOptions};
use qrr_core::seed::derive_seed;
use qrr_core::ProblemInstance;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{BenchError, Result};
use crate::formats::{read_instance, write_amplitudes, write_corr, write_instance};
use crate::results::{emit, Format};
use crate::sweep::{angle_ladder, run_sweep, AngleMode, Experiment, SweepConfig};

#[derive(Debug, Parser)]
#[command(name = "qrr", version, about = "Quantum relax-and-round experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a problem instance and write it as JSON.
    Generate(GenerateArgs),
    /// Run QAOA, QRR and classical relax-and-round on one instance.
    Solve(SolveArgs),
    /// Run any experiment sweep.
    Sweep(SweepArgs),
    /// Max-cut sweep (fig3).
    Maxcut(SweepArgs),
    /// Independent-set annealing sweep.
    Mis(SweepArgs),
    /// Commutator-norm sweep (fig5).
    Commutator(SweepArgs),
    /// Shot-noise sweep.
    Shots(SweepArgs),
    /// Relax-and-round timing.
    Timing(SweepArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateArgs {
    /// JSON file whose keys override these flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Graph family, or MIS for an independent-set instance.
    #[arg(long, default_value = "SK")]
    pub family: String,
    #[arg(long, default_value_t = 12)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Geometric density (MIS only).
    #[arg(long, default_value_t = 7.0)]
    pub rho: f64,
    /// Independence penalty J (MIS only).
    #[arg(long, default_value_t = 2.0)]
    pub penalty: f64,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Instance JSON; generated from --family/--n/--seed when absent.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[arg(long, default_value = "SK")]
    pub family: String,
    #[arg(long, default_value_t = 12)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// QAOA depth.
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    #[arg(long, value_enum, default_value = "opt")]
    pub angles: AngleMode,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Estimate the correlations from this many sampled bitstrings instead of exactly.
    #[arg(long)]
    pub shots: Option<usize>,
    /// Write the correlation matrix as JSON.
    #[arg(long)]
    pub corr_out: Option<PathBuf>,
    /// Write the final statevector as a binary amplitude dump.
    #[arg(long)]
    pub amplitudes_out: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SweepArgs {
    /// JSON file with sweep keys overriding these flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Experiment (sweep command only).
    #[arg(long, value_enum)]
    pub experiment: Option<Experiment>,
    /// Comma-separated families.
    #[arg(long, value_delimiter = ',')]
    pub family: Vec<String>,
    /// Comma-separated sizes.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Comma-separated QAOA depths.
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<usize>,
    #[arg(long)]
    pub instances: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub angles: Option<AngleMode>,
    /// Comma-separated shot counts.
    #[arg(long, value_delimiter = ',')]
    pub shots: Vec<usize>,
    /// Comma-separated anneal times (mis).
    #[arg(long, value_delimiter = ',')]
    pub times: Vec<f64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("qrr: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Sweep(a) => cmd_sweep(a, None),
        Command::Maxcut(a) => cmd_sweep(a, Some(Experiment::Fig3)),
        Command::Mis(a) => cmd_sweep(a, Some(Experiment::Mis)),
        Command::Commutator(a) => cmd_sweep(a, Some(Experiment::Fig5)),
        Command::Shots(a) => cmd_sweep(a, Some(Experiment::Shots)),
        Command::Timing(a) => cmd_sweep(a, Some(Experiment::Timing)),
    }
}

fn read_config_file(path: &Path) -> Result<serde_json::Map<String, Value>> {
    let file = File::open(path).map_err(|e| BenchError::config(format!("cannot open config {}: {e}", path.display())))?;
    match serde_json::from_reader(BufReader::new(file)) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(BenchError::config(format!("config {} must hold a JSON object", path.display()))),
        Err(e) => Err(BenchError::config(format!("config {}: {e}", path.display()))),
    }
}

/// Serializes `base`, replaces every key present in `file`, and deserializes.
fn overlay<T: Serialize + DeserializeOwned>(base: &T, file: serde_json::Map<String, Value>) -> Result<T> {
    let mut v = serde_json::to_value(base)?;
    let obj = v.as_object_mut().expect("structs serialize to objects");
    for (k, val) in file {
        obj.insert(k, val);
    }
    serde_json::from_value(v).map_err(|e| BenchError::config(format!("config: {e}")))
}

/// Builds the sweep configuration from flags and an optional config file.
pub fn sweep_config(args: &SweepArgs, implied: Option<Experiment>) -> Result<SweepConfig> {
    let file = args.config.as_deref().map(read_config_file).transpose()?;
    let file_exp = match file.as_ref().and_then(|f| f.get("experiment")) {
        Some(v) => Some(
            serde_json::from_value::<Experiment>(v.clone()).map_err(|e| BenchError::config(format!("config: experiment: {e}")))?,
        ),
        None => None,
    };
    if let (Some(i), Some(f)) = (implied, file_exp) {
        if i != f {
            return Err(BenchError::config(format!(
                "config names experiment {} but this command runs {}",
                f.as_str(),
                i.as_str()
            )));
        }
    }
    let experiment = file_exp
        .or(implied)
        .or(args.experiment)
        .ok_or_else(|| BenchError::config("no experiment given; pass --experiment or set \"experiment\" in --config"))?;
    let mut cfg = SweepConfig::for_experiment(experiment);
    if !args.family.is_empty() {
        cfg.families = args.family.clone();
    }
    if !args.n.is_empty() {
        cfg.sizes = args.n.clone();
    }
    if !args.p.is_empty() {
        cfg.depths = args.p.clone();
    }
    if !args.shots.is_empty() {
        cfg.shots = args.shots.clone();
    }
    if !args.times.is_empty() {
        cfg.anneal_times = args.times.clone();
    }
    cfg.instances = args.instances.unwrap_or(cfg.instances);
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    cfg.angles = args.angles.unwrap_or(cfg.angles);
    cfg.restarts = args.restarts.or(cfg.restarts);
    cfg.out = args.out.clone().or(cfg.out);
    cfg.format = args.format.unwrap_or(cfg.format);
    match file {
        Some(f) => overlay(&cfg, f),
        None => Ok(cfg),
    }
}

fn cmd_sweep(args: SweepArgs, implied: Option<Experiment>) -> Result<()> {
    let cfg = sweep_config(&args, implied)?;
    let rows = run_sweep(&cfg)?;
    emit(&rows, cfg.format, cfg.out.as_deref())
}

fn with_file<T: Serialize + DeserializeOwned>(args: T, config: Option<&Path>) -> Result<T> {
    match config {
        Some(p) => overlay(&args, read_config_file(p)?),
        None => Ok(args),
    }
}

fn build_instance(family: &str, n: usize, seed: u64, rho: f64, penalty: f64) -> Result<ProblemInstance> {
    if family.eq_ignore_ascii_case("MIS") {
        return mis_instance(n, rho, penalty, seed).map_err(|e| BenchError::config(format!("MIS with N = {n}: {e}")));
    }
    let fam: GraphFamily = family.parse().map_err(|_| BenchError::config(format!("unknown family {family:?}")))?;
    generate(fam, n, seed).map_err(|e| BenchError::config(format!("family {fam} with N = {n}: {e}")))
}

fn write_to<F: FnOnce(&mut dyn Write) -> Result<()>>(path: Option<&Path>, f: F) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            f(&mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let config = args.config.clone();
    let a = with_file(args, config.as_deref())?;
    let inst = build_instance(&a.family, a.n, a.seed, a.rho, a.penalty)?;
    write_to(a.out.as_deref(), |w| write_instance(&inst, w))
}

fn solution_json(spins: &qrr_core::Spins, value: f64) -> Value {
    json!({ "spins": spins.to_string(), "value": value })
}

/// Runs the full single-instance pipeline and returns the JSON report.
pub fn solve_report(a: &SolveArgs) -> Result<Value> {
    let inst = match &a.instance {
        Some(p) => {
            let f = File::open(p).map_err(|e| BenchError::config(format!("cannot open instance {}: {e}", p.display())))?;
            read_instance(BufReader::new(f)).map_err(|e| BenchError::config(format!("instance {}: {e}", p.display())))?
        }
        None => build_instance(&a.family, a.n, a.seed, 7.0, 2.0)?,
    };
    if a.p == 0 {
        return Err(BenchError::config("--p must be at least 1"));
    }
    if a.restarts == Some(0) || a.shots == Some(0) {
        return Err(BenchError::config("--restarts and --shots must be at least 1"));
    }
    let n = inst.n();
    let needs_state = a.p > 1 || inst.has_linear() || a.amplitudes_out.is_some() || a.shots.is_some();
    if needs_state && n > MAX_QUBITS {
        return Err(BenchError::config(format!("N = {n} exceeds the statevector bound of {MAX_QUBITS} qubits")));
    }
    let family = match inst.source() {
        Some(qrr_core::Source::Generated { family, .. }) => Some(*family),
        _ => None,
    };
    let sweep = SweepConfig {
        angles: a.angles,
        restarts: a.restarts,
        ..SweepConfig::for_experiment(Experiment::Fig2)
    };
    let angles: QaoaAngles = angle_ladder(
        &inst,
        family.unwrap_or(GraphFamily::Complete),
        &[a.p],
        &sweep,
        derive_seed(a.seed, 1),
    )?
    .remove(&a.p)
    .expect("requested depth");
    let round_seed = derive_seed(a.seed, 2);
    let (z, expectation): (CorrMatrix, f64) = if needs_state {
        let psi = run_qaoa(&inst, &angles)?;
        if let Some(p) = &a.amplitudes_out {
            write_to(Some(p), |w| write_amplitudes(&psi, w))?;
        }
        let e = qrr_core::qsim::expect_cost(&psi, &inst)?;
        let z = match a.shots {
            Some(s) => corr_from_samples(&sample_bitstrings(&psi, s, derive_seed(a.seed, 3)))?,
            None => corr_from_state(&psi),
        };
        (z, e)
    } else {
        (p1_corr(&inst, angles.gammas()[0], angles.betas()[0])?, expected_cost(&inst, &angles)?)
    };
    if let Some(p) = &a.corr_out {
        write_to(Some(p), |w| write_corr(&z, w))?;
    }
    let qrr = relax_and_round(z.entries(), &inst, RoundOptions::all(round_seed))?;
    let rr = classical_rr(&inst, round_seed)?;
    let mut report = json!({
        "n": n,
        "sense": inst.sense().as_str(),
        "depth": a.p,
        "gammas": angles.gammas(),
        "betas": angles.betas(),
        "qaoa_expectation": expectation,
        "qrr": solution_json(&qrr.spins, qrr.value),
        "classical_rr": solution_json(&rr.spins, rr.value),
        "correlations": z.provenance().as_str(),
    });
    if n <= 20 {
        let opt = brute_force(&inst)?;
        let obj = report.as_object_mut().expect("object");
        obj.insert("optimum".into(), json!({ "spins": opt.best.to_string(), "value": opt.value, "degeneracy": opt.degeneracy }));
        if opt.value != 0.0 {
            obj.insert("alpha_qrr".into(), json!(qrr.value / opt.value));
            obj.insert("alpha_rr".into(), json!(rr.value / opt.value));
            obj.insert("alpha_qaoa".into(), json!(expectation / opt.value));
        }
    }
    Ok(report)
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let config = args.config.clone();
    let a = with_file(args, config.as_deref())?;
    let report = solve_report(&a)?;
    write_to(a.out.as_deref(), |w| {
        serde_json::to_writer_pretty(&mut *w, &report)?;
        w.write_all(b"\n")?;
        Ok(())
    })
}
