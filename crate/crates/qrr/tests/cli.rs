use std::process::Command;

use qrr::formats::{read_amplitudes, read_corr, read_instance};
use qrr::results::{read_rows, Format, InstanceKey};

fn qrr(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_qrr")).args(args).output().expect("binary runs")
}

#[test]
fn generate_then_solve() {
    let dir = tempfile::tempdir().unwrap();
    let inst_path = dir.path().join("inst.json");
    let inst = inst_path.to_str().unwrap();
    let out = qrr(&["generate", "--family", "NWS", "--n", "8", "--seed", "3", "--out", inst]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let loaded = read_instance(std::fs::File::open(&inst_path).unwrap()).unwrap();
    assert_eq!(loaded.n(), 8);

    let corr = dir.path().join("z.json");
    let amps = dir.path().join("psi.bin");
    let out = qrr(&[
        "solve",
        "--instance",
        inst,
        "--p",
        "2",
        "--restarts",
        "2",
        "--corr-out",
        corr.to_str().unwrap(),
        "--amplitudes-out",
        amps.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["depth"], 2);
    let alpha = report["alpha_qrr"].as_f64().unwrap();
    assert!(alpha > 0.0 && alpha <= 1.0 + 1e-12);
    assert!(report["optimum"]["value"].as_f64().unwrap() <= report["qrr"]["value"].as_f64().unwrap());
    assert_eq!(read_corr(std::fs::File::open(&corr).unwrap()).unwrap().n(), 8);
    assert_eq!(read_amplitudes(std::fs::File::open(&amps).unwrap()).unwrap().n(), 8);
}

#[test]
fn solve_large_sk_uses_closed_form() {
    let out = qrr(&["solve", "--family", "SK", "--n", "40", "--angles", "fixed"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["correlations"], "analytic-p1");
    assert!(report.get("optimum").is_none());
}

#[test]
fn sweep_output_is_reproducible() {
    let args = ["commutator", "--n", "6,8", "--instances", "3", "--seed", "9"];
    let a = qrr(&args);
    let b = qrr(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout.clone()).unwrap();
    assert!(text.starts_with("experiment,family,N,depth,instance,metric,value\n"));
    let rows = read_rows(Format::Csv, a.stdout.as_slice()).unwrap();
    assert!(rows.iter().any(|r| r.instance == InstanceKey::Mean && r.metric == "commutator"));
}

#[test]
fn json_format_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out_path = dir.path().join("rows.json");
    std::fs::write(&cfg, r#"{"sizes":[8],"anneal_times":[1.0,2.0],"instances":2,"format":"json"}"#).unwrap();
    let out = qrr(&["mis", "--n", "12", "--config", cfg.to_str().unwrap(), "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_rows(Format::Json, std::fs::File::open(&out_path).unwrap()).unwrap();
    assert!(rows.iter().all(|r| r.n == 8));
    for metric in ["anneal_cost", "qrr_value", "opt_value"] {
        assert!(rows.iter().any(|r| r.metric == metric));
    }
}

#[test]
fn exit_codes() {
    // Configuration problems exit with 2.
    for args in [
        &["sweep", "--experiment", "fig2", "--family", "REG3", "--n", "7"][..],
        &["sweep", "--experiment", "fig2", "--instances", "0"][..],
        &["sweep"][..],
        &["maxcut", "--family", "bogus"][..],
        &["generate", "--family", "SK", "--n", "1"][..],
        &["solve", "--p", "0"][..],
        &["sweep", "--experiment", "nope"][..],
        &["sweep", "--experiment", "fig5", "--config", "/nonexistent/cfg.json"][..],
    ] {
        let out = qrr(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"n":2,"sense":"minimize","weights":[[0,1],[2,0]],"linear":[]}"#).unwrap();
    let out = qrr(&["solve", "--instance", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    // Runtime failures exit with 3.
    let out = qrr(&["generate", "--out", "/nonexistent/dir/inst.json"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(qrr(&["--help"]).status.code(), Some(0));
}
