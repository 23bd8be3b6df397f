//! On-disk formats: instance JSON, correlation-matrix JSON, amplitude dumps.

use std::io::{Read, Write};

use qrr_core::graphs::GraphFamily;
use qrr_core::qsim::StateVector;
use qrr_core::rounding::{CorrMatrix, Provenance};
use qrr_core::{Complex64, DMatrix, ProblemInstance, Sense, Source};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

/// Instance as stored on disk. `weights` is dense and row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub n: usize,
    pub sense: String,
    pub weights: Vec<Vec<f64>>,
    pub linear: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty: Option<f64>,
}

impl InstanceFile {
    pub fn from_instance(inst: &ProblemInstance) -> Self {
        let n = inst.n();
        let w = inst.weights();
        let (family, seed, rho, penalty) = match inst.source() {
            Some(Source::Generated { family, seed }) => (Some(family.to_string()), Some(*seed), None, None),
            Some(Source::Mis { rho, penalty, seed }) => (Some("MIS".to_owned()), Some(*seed), Some(*rho), Some(*penalty)),
            None => (None, None, None, None),
        };
        InstanceFile {
            n,
            sense: inst.sense().as_str().to_owned(),
            weights: (0..n).map(|i| (0..n).map(|j| w[(i, j)]).collect()).collect(),
            linear: inst.linear().to_vec(),
            family,
            seed,
            rho,
            penalty,
        }
    }

    pub fn to_instance(&self) -> Result<ProblemInstance> {
        let n = self.n;
        if self.weights.len() != n || self.weights.iter().any(|r| r.len() != n) {
            return Err(BenchError::config(format!("weights must be a {n}x{n} array")));
        }
        if self.linear.len() != n && !self.linear.is_empty() {
            return Err(BenchError::config(format!("linear must have {n} entries")));
        }
        let sense: Sense = self.sense.parse().map_err(|_| BenchError::config(format!("unknown sense {:?}", self.sense)))?;
        let w = DMatrix::from_fn(n, n, |i, j| self.weights[i][j]);
        let lin = (!self.linear.is_empty()).then(|| self.linear.clone());
        let inst = ProblemInstance::new(w, lin, sense)?;
        let source = match (self.family.as_deref(), self.seed) {
            (Some("MIS"), Some(seed)) => Some(Source::Mis {
                rho: self.rho.unwrap_or(f64::NAN),
                penalty: self.penalty.unwrap_or(f64::NAN),
                seed,
            }),
            (Some(f), Some(seed)) => f.parse::<GraphFamily>().ok().map(|family| Source::Generated { family, seed }),
            _ => None,
        };
        Ok(match source {
            Some(s) => inst.with_source(s),
            None => inst,
        })
    }
}

pub fn write_instance<W: Write>(inst: &ProblemInstance, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, &InstanceFile::from_instance(inst))?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn read_instance<R: Read>(r: R) -> Result<ProblemInstance> {
    let file: InstanceFile = serde_json::from_reader(r)?;
    file.to_instance()
}

/// Correlation matrix as stored on disk: the strict upper triangle, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrFile {
    pub n: usize,
    pub provenance: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<usize>,
    pub upper: Vec<f64>,
}

impl CorrFile {
    pub fn from_corr(z: &CorrMatrix) -> Self {
        let n = z.n();
        let e = z.entries();
        let upper = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| e[(i, j)])).collect();
        CorrFile {
            n,
            provenance: z.provenance().as_str().to_owned(),
            shots: z.provenance().shots(),
            upper,
        }
    }

    pub fn to_corr(&self) -> Result<CorrMatrix> {
        let n = self.n;
        if self.upper.len() != n * n.saturating_sub(1) / 2 {
            return Err(BenchError::config(format!("upper must have n(n-1)/2 = {} entries", n * n.saturating_sub(1) / 2)));
        }
        let shots = || self.shots.ok_or_else(|| BenchError::config("provenance requires a shot count"));
        let provenance = match self.provenance.as_str() {
            "exact-statevector" => Provenance::ExactStatevector,
            "analytic-p1" => Provenance::AnalyticP1,
            "sampled" => Provenance::Sampled { shots: shots()? },
            "synthetic-noise" => Provenance::SyntheticNoise { shots: shots()? },
            "asymptotic-sk" => Provenance::AsymptoticSk,
            "depolarized" => Provenance::Depolarized,
            other => return Err(BenchError::config(format!("unknown provenance {other:?}"))),
        };
        let mut m = DMatrix::zeros(n, n);
        let mut k = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                m[(i, j)] = self.upper[k];
                m[(j, i)] = self.upper[k];
                k += 1;
            }
        }
        Ok(CorrMatrix::new(m, provenance)?)
    }
}

pub fn write_corr<W: Write>(z: &CorrMatrix, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, &CorrFile::from_corr(z))?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn read_corr<R: Read>(r: R) -> Result<CorrMatrix> {
    let file: CorrFile = serde_json::from_reader(r)?;
    file.to_corr()
}

/// Binary amplitude dump: `u64` amplitude count, then `(re, im)` pairs, all little-endian.
pub fn write_amplitudes<W: Write>(psi: &StateVector, mut w: W) -> Result<()> {
    let amps = psi.amplitudes();
    w.write_all(&(amps.len() as u64).to_le_bytes())?;
    for a in amps {
        w.write_all(&a.re.to_le_bytes())?;
        w.write_all(&a.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_amplitudes<R: Read>(mut r: R) -> Result<StateVector> {
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let len = u64::from_le_bytes(word);
    if len == 0 || !len.is_power_of_two() || len > 1 << qrr_core::qsim::MAX_QUBITS {
        return Err(BenchError::config(format!("amplitude count {len} is not a supported power of two")));
    }
    let mut amps = Vec::with_capacity(len as usize);
    for _ in 0..len {
        r.read_exact(&mut word)?;
        let re = f64::from_le_bytes(word);
        r.read_exact(&mut word)?;
        let im = f64::from_le_bytes(word);
        amps.push(Complex64::new(re, im));
    }
    Ok(StateVector::from_amplitudes(amps)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qrr_core::graphs::{generate, mis_instance};
    use qrr_core::qsim::{run_qaoa, QaoaAngles};
    use qrr_core::rounding::{corr_from_state, synthetic_shot_noise};

    #[test]
    fn instance_round_trip() {
        for inst in [
            generate(GraphFamily::Ba, 9, 3).unwrap(),
            generate(GraphFamily::BetheFinite { degree: 3, depth: 2 }, 10, 0).unwrap(),
            mis_instance(6, 7.0, 2.0, 5).unwrap(),
        ] {
            let mut buf = Vec::new();
            write_instance(&inst, &mut buf).unwrap();
            let back = read_instance(buf.as_slice()).unwrap();
            assert_eq!(back, inst);
        }
    }

    #[test]
    fn bad_instance_is_config_error() {
        let text = r#"{"n":2,"sense":"minimize","weights":[[0,1],[2,0]],"linear":[]}"#;
        assert!(matches!(read_instance(text.as_bytes()), Err(BenchError::Core(_))));
        let text = r#"{"n":3,"sense":"minimize","weights":[[0,1],[1,0]],"linear":[]}"#;
        assert!(matches!(read_instance(text.as_bytes()), Err(BenchError::Config(_))));
    }

    #[test]
    fn corr_and_amplitudes_round_trip() {
        let inst = generate(GraphFamily::Sk, 6, 1).unwrap();
        let psi = run_qaoa(&inst, &QaoaAngles::p1(0.3, -0.4)).unwrap();
        let z = corr_from_state(&psi);
        let noisy = synthetic_shot_noise(&z, 100, 2).unwrap();
        for m in [z, noisy] {
            let mut buf = Vec::new();
            write_corr(&m, &mut buf).unwrap();
            assert_eq!(read_corr(buf.as_slice()).unwrap(), m);
        }
        let mut buf = Vec::new();
        write_amplitudes(&psi, &mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 16 * 64);
        assert_eq!(read_amplitudes(buf.as_slice()).unwrap().amplitudes(), psi.amplitudes());
    }
}
