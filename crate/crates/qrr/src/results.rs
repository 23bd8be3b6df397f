//! Result rows, aggregation and CSV / JSON emission.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{BenchError, Result};

/// Output encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Which instance a row describes.
///
/// Raw rows carry the instance index inside the sweep; aggregate rows use
/// `mean` / `se`; size-independent literature constants use `ref` and fitted
/// exponents `fit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InstanceKey {
    Index(u64),
    Mean,
    Se,
    Reference,
    Fit,
}

impl fmt::Display for InstanceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceKey::Index(i) => write!(f, "{i}"),
            InstanceKey::Mean => f.write_str("mean"),
            InstanceKey::Se => f.write_str("se"),
            InstanceKey::Reference => f.write_str("ref"),
            InstanceKey::Fit => f.write_str("fit"),
        }
    }
}

impl FromStr for InstanceKey {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "mean" => Ok(InstanceKey::Mean),
            "se" => Ok(InstanceKey::Se),
            "ref" => Ok(InstanceKey::Reference),
            "fit" => Ok(InstanceKey::Fit),
            _ => s
                .parse()
                .map(InstanceKey::Index)
                .map_err(|_| format!("bad instance key {s:?}")),
        }
    }
}

impl Serialize for InstanceKey {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for InstanceKey {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One measured number.
///
/// `depth` is the QAOA depth `p`, or the anneal time `T` for the MIS
/// experiment; 0 marks classical baselines. `n == 0` marks rows that do not
/// belong to a single size (reference constants, fits across sizes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub family: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub depth: f64,
    pub instance: InstanceKey,
    pub metric: String,
    pub value: f64,
}

impl ResultRow {
    pub fn new(
        experiment: &str,
        family: &str,
        n: usize,
        depth: f64,
        instance: InstanceKey,
        metric: &str,
        value: f64,
    ) -> Self {
        ResultRow {
            experiment: experiment.to_owned(),
            family: family.to_owned(),
            n,
            depth,
            instance,
            metric: metric.to_owned(),
            value,
        }
    }

    fn key_cmp(&self, other: &Self) -> Ordering {
        self.experiment
            .cmp(&other.experiment)
            .then_with(|| self.family.cmp(&other.family))
            .then_with(|| self.n.cmp(&other.n))
            .then_with(|| self.depth.total_cmp(&other.depth))
            .then_with(|| self.metric.cmp(&other.metric))
            .then_with(|| self.instance.cmp(&other.instance))
    }
}

/// Canonical order: experiment, family, N, depth, metric, instance.
pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(ResultRow::key_cmp);
}

/// Mean and standard error (sample standard deviation over `√n`; 0 for one sample).
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// `mean` and `se` rows for every group of per-instance rows.
pub fn aggregate(rows: &[ResultRow]) -> Vec<ResultRow> {
    let mut groups: BTreeMap<(String, String, usize, u64, String), Vec<f64>> = BTreeMap::new();
    for r in rows {
        if let InstanceKey::Index(_) = r.instance {
            groups
                .entry((r.experiment.clone(), r.family.clone(), r.n, r.depth.to_bits(), r.metric.clone()))
                .or_default()
                .push(r.value);
        }
    }
    let mut out = Vec::with_capacity(2 * groups.len());
    for ((exp, fam, n, depth, metric), values) in groups {
        let (mean, se) = mean_se(&values);
        let depth = f64::from_bits(depth);
        out.push(ResultRow::new(&exp, &fam, n, depth, InstanceKey::Mean, &metric, mean));
        out.push(ResultRow::new(&exp, &fam, n, depth, InstanceKey::Se, &metric, se));
    }
    out
}

/// Writes rows in the chosen format. Rows are written in the given order.
pub fn write_rows<W: Write>(rows: &[ResultRow], format: Format, w: W) -> Result<()> {
    match format {
        Format::Csv => {
            let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
            wr.write_record(["experiment", "family", "N", "depth", "instance", "metric", "value"])?;
            for r in rows {
                wr.serialize(r)?;
            }
            wr.flush()?;
        }
        Format::Json => {
            let mut w = w;
            serde_json::to_writer_pretty(&mut w, rows)?;
            w.write_all(b"\n")?;
            w.flush()?;
        }
    }
    Ok(())
}

/// Writes rows to `path`, or to stdout when `path` is `None`.
pub fn emit(rows: &[ResultRow], format: Format, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => write_rows(rows, format, BufWriter::new(File::create(p)?)),
        None => write_rows(rows, format, std::io::stdout().lock()),
    }
}

/// Parses rows written by [`write_rows`].
pub fn read_rows<R: Read>(format: Format, r: R) -> Result<Vec<ResultRow>> {
    match format {
        Format::Csv => {
            let mut rd = csv::Reader::from_reader(r);
            let header = rd.headers()?.clone();
            if header.iter().collect::<Vec<_>>() != ["experiment", "family", "N", "depth", "instance", "metric", "value"] {
                return Err(BenchError::config(format!("unexpected CSV header {header:?}")));
            }
            rd.deserialize().map(|r| r.map_err(BenchError::from)).collect()
        }
        Format::Json => Ok(serde_json::from_reader(r)?),
    }
}

/// Finds the value of a unique row.
pub fn lookup(rows: &[ResultRow], family: &str, n: usize, depth: f64, instance: InstanceKey, metric: &str) -> Option<f64> {
    rows.iter()
        .find(|r| r.family == family && r.n == n && r.depth == depth && r.instance == instance && r.metric == metric)
        .map(|r| r.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<ResultRow> {
        vec![
            ResultRow::new("fig2", "SK", 12, 1.0, InstanceKey::Index(1), "alpha_qrr", 0.9),
            ResultRow::new("fig2", "SK", 12, 1.0, InstanceKey::Index(0), "alpha_qrr", 0.8),
            ResultRow::new("fig2", "REG3", 12, 0.0, InstanceKey::Index(0), "alpha_rr", 0.1 + 0.2),
            ResultRow::new("fig1c", "SK", 0, 1.0, InstanceKey::Reference, "parisi", -0.763166),
        ]
    }

    #[test]
    fn empty_csv_is_header_only() {
        let mut buf = Vec::new();
        write_rows(&[], Format::Csv, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "experiment,family,N,depth,instance,metric,value\n");
        let mut buf = Vec::new();
        write_rows(&[], Format::Json, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "[]\n");
    }

    #[test]
    fn round_trip_both_formats() {
        let mut rows = sample();
        rows.extend(aggregate(&rows));
        sort_rows(&mut rows);
        for format in [Format::Csv, Format::Json] {
            let mut buf = Vec::new();
            write_rows(&rows, format, &mut buf).unwrap();
            assert!(!buf.contains(&b'\r'));
            let back = read_rows(format, buf.as_slice()).unwrap();
            assert_eq!(back, rows);
            let mut again = Vec::new();
            write_rows(&back, format, &mut again).unwrap();
            assert_eq!(again, buf);
        }
    }

    #[test]
    fn aggregates_match_recomputation() {
        let rows = sample();
        let agg = aggregate(&rows);
        assert_eq!(agg.len(), 4);
        let mean = lookup(&agg, "SK", 12, 1.0, InstanceKey::Mean, "alpha_qrr").unwrap();
        let se = lookup(&agg, "SK", 12, 1.0, InstanceKey::Se, "alpha_qrr").unwrap();
        assert!((mean - 0.85).abs() < 1e-15);
        assert!((se - 0.05).abs() < 1e-12);
        assert_eq!(lookup(&agg, "REG3", 12, 0.0, InstanceKey::Se, "alpha_rr"), Some(0.0));
    }

    #[test]
    fn canonical_sort() {
        let mut rows = sample();
        sort_rows(&mut rows);
        assert_eq!(rows[0].experiment, "fig1c");
        assert_eq!(rows[1].family, "REG3");
        assert_eq!(rows[2].instance, InstanceKey::Index(0));
    }

    #[test]
    fn instance_key_text() {
        for k in [InstanceKey::Index(7), InstanceKey::Mean, InstanceKey::Se, InstanceKey::Reference, InstanceKey::Fit] {
            assert_eq!(k.to_string().parse::<InstanceKey>().unwrap(), k);
        }
        assert!("x".parse::<InstanceKey>().is_err());
    }
}
