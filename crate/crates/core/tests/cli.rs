use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tacfit::io::{run, RunConfig, EXIT_DEGENERATE, EXIT_INVALID};
use tacfit::{fit::fit, synth, ModelKind, ModelSpec, Norm, Observations};

fn write_series(dir: &Path, name: &str, obs: &Observations) -> PathBuf {
    let path = dir.join(name);
    let text: String = std::iter::once("# t, T\n".to_string())
        .chain(obs.pairs().iter().map(|(t, v)| format!("{t},{v}\n")))
        .collect();
    std::fs::write(&path, text).unwrap();
    path
}

fn tacfit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tacfit")).args(args).output().unwrap()
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap()
}

#[test]
fn report_goes_to_stdout_by_default() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_series(dir.path(), "t1.csv", &synth::single_exp_series());
    let out = tacfit(&["--input", input.to_str().unwrap(), "--trace"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out.stdout);
    assert_eq!(report["status"], "ok");
    assert_eq!(report["model"], "exp1");
    assert_eq!(report["n"], 1000);
    let k = report["params"]["k"].as_f64().unwrap();
    assert!((k + 1.12345678).abs() < 1e-8);
    let trace = report["trace"].as_array().unwrap();
    assert_eq!(trace.len() as u64, report["iterations"].as_u64().unwrap());
}

#[test]
fn residuals_and_error_curve_files() {
    let dir = tempfile::tempdir().unwrap();
    let obs = synth::cooling_series(0.01, 3);
    let input = write_series(dir.path(), "cool.csv", &obs);
    let residuals = dir.path().join("res.csv");
    let curve = dir.path().join("curve.csv");
    let report = dir.path().join("report.json");
    let cfg = RunConfig {
        residuals: Some(residuals.clone()),
        error_curve: Some((curve.clone(), 40)),
        report: Some(report.clone()),
        ..RunConfig::new(&input)
    };
    assert_eq!(run(&cfg), 0);

    let res = std::fs::read_to_string(&residuals).unwrap();
    let mut lines = res.lines();
    assert_eq!(lines.next(), Some("t,T,fitted,residual"));
    assert_eq!(lines.count(), obs.len());

    let curve = std::fs::read_to_string(&curve).unwrap();
    assert!(curve.starts_with("k,error\n"));
    assert_eq!(curve.lines().count(), 41);

    let report = json(&std::fs::read(&report).unwrap());
    let library = fit(&obs, &ModelSpec::exp1()).unwrap();
    assert_eq!(report["params"]["k"].as_f64(), Some(library.params.rates[0]));
}

#[test]
fn max_norm_report_has_classification() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_series(dir.path(), "t1.csv", &synth::single_exp_series());
    let out = tacfit(&["--input", input.to_str().unwrap(), "--norm", "linf"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out.stdout);
    assert_eq!(report["norm"], "linf");
    assert_eq!(report["classification"]["case"], "InteriorMinimum");
    assert!(report["minimax_radius"].as_f64().unwrap() < 1e-9);
}

#[test]
fn degenerate_target_exits_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("alt.txt");
    std::fs::write(&input, "0 0\n1 1\n2 0\n3 1\n4 0\n").unwrap();
    let out = tacfit(&["--input", input.to_str().unwrap(), "--norm", "linf"]);
    assert_eq!(out.status.code(), Some(EXIT_DEGENERATE));
    let report = json(&out.stdout);
    assert_eq!(report["status"], "degenerate");
    assert_eq!(report["error"]["kind"], "DegenerateTarget");
    assert_eq!(report["classification"]["case"], "ConstantBest");
    assert_eq!(report["classification"]["witness"]["value"], 0.5);
}

#[test]
fn input_problems_exit_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let out = tacfit(&["--input", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_INVALID));
    let err = json(&out.stdout);
    assert_eq!(err["error"]["kind"], "ParseError");
    assert_eq!(err["error"]["line"], 0);

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "t,T\n0,1\n1,oops\n2,3\n").unwrap();
    let report = dir.path().join("err.json");
    let out = tacfit(&["--input", bad.to_str().unwrap(), "--report", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_INVALID));
    assert!(out.stdout.is_empty());
    let err = json(&std::fs::read(&report).unwrap());
    assert_eq!(err["status"], "error");
    assert_eq!(err["error"]["line"], 3);

    let dup = dir.path().join("dup.csv");
    std::fs::write(&dup, "0,1\n1,2\n1,3\n").unwrap();
    let out = tacfit(&["--input", dup.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_INVALID));
    assert_eq!(json(&out.stdout)["error"]["kind"], "DuplicateTime");
}

#[test]
fn bad_configuration_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_series(dir.path(), "t1.csv", &synth::single_exp_series());
    let input = input.to_str().unwrap();
    for args in [
        vec!["--input", input, "--k-range", "-1:2"],
        vec!["--input", input, "--model", "exp2", "--norm", "linf"],
        vec!["--input", input, "--model", "exp2", "--error-curve", "c.csv"],
        vec!["--input", input, "--mesh", "1"],
    ] {
        let out = tacfit(&args);
        assert_eq!(out.status.code(), Some(EXIT_INVALID), "{args:?}");
        assert_eq!(json(&out.stdout)["status"], "error");
    }
    let out = tacfit(&["--input", input, "--model", "exp3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn biexponential_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let obs = synth::biexp_series();
    let input = write_series(dir.path(), "bi.csv", &obs);
    let out = tacfit(&["--input", input.to_str().unwrap(), "--model", "exp2", "--parallel"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out.stdout);
    let library = fit(&obs, &ModelSpec::exp2()).unwrap();
    assert_eq!(report["params"]["k1"].as_f64(), Some(library.params.rates[0]));
    assert_eq!(report["params"]["k2"].as_f64(), Some(library.params.rates[1]));
    assert_eq!(report["spec"]["kind"], ModelKind::Exp2.name());
    assert_eq!(report["spec"]["norm"], Norm::L2.name());
}
