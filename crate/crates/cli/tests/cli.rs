use std::io::Write;
use std::process::{Command, Output};

use regex::Regex;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coneweights"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", stderr(&out));
    stdout(&out)
}

fn json(args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    serde_json::from_str(&ok(&full)).expect("valid json")
}

fn displays(values: &Value) -> Vec<String> {
    values
        .as_array()
        .expect("array")
        .iter()
        .map(|v| v["display"].as_str().expect("display").to_string())
        .collect()
}

#[test]
fn laplace_roots_on_sphere_rows() {
    let report = json(&["roots", "--op", "laplace", "--n", "4", "--s", "1", "--link", "sphere", "--kmax", "2"]);
    let rows = report["rows"].as_array().unwrap();
    let mus: Vec<&str> = rows.iter().map(|r| r["mu"]["display"].as_str().unwrap()).collect();
    assert_eq!(mus, ["0", "3", "8"]);
    assert_eq!(displays(&rows[1]["roots"]), ["-1", "3"]);
    assert_eq!(rows[2]["mult"], 9);
}

#[test]
fn hyperbolic_roots() {
    let report = json(&["roots", "--op", "ah", "--n", "4"]);
    assert_eq!(displays(&report["roots"]), ["-3", "0"]);
}

#[test]
fn malformed_flags_exit_2() {
    assert_eq!(run(&["roots", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["roots", "--n", "four"]).status.code(), Some(2));
    assert_eq!(run(&["ladder", "--n", "4", "--s", "1"]).status.code(), Some(2));
    assert_eq!(run(&["windows", "--op", "dirac", "--n", "4", "--s", "1"]).status.code(), Some(2));
    assert_eq!(run(&["witt", "--n", "4", "--s", "1", "--gap", "1", "--format", "csv"]).status.code(), Some(2));
}

#[test]
fn acinf_window() {
    let report = json(&["windows", "--op", "laplace", "--n", "6", "--s", "-1"]);
    let base = &report["windows"][0];
    assert_eq!(base["display"], "(-4, 0)");
    assert_eq!(base["parametrization"], "beta");
    assert!(ok(&["windows", "--op", "laplace", "--n", "6", "--s", "-1"]).contains("(-4, 0)"));
}

#[test]
fn hyperbolic_window_at_p_2() {
    let report = json(&["windows", "--op", "ah", "--n", "4", "--p", "2"]);
    let w = &report["windows"][0];
    assert_eq!(w["parametrization"], "delta");
    assert_eq!(w["lo"]["display"], "-3/2");
    assert_eq!(w["hi"]["display"], "3/2");
    assert_eq!(w["hi"]["value"], 1.5);
}

#[test]
fn dirac_window_under_nonnegative_curvature() {
    let report = json(&["windows", "--op", "dirac", "--n", "5", "--s", "1", "--kappa-nonneg"]);
    assert_eq!(report["enhanced"]["window"]["display"], "(0, 4)");
    assert_eq!(report["enhanced"]["window"]["parametrization"], "beta");
}

#[test]
fn ladder_on_the_three_sphere() {
    let args = ["ladder", "--n", "4", "--s", "1", "--link", "sphere", "--range", "-0.5,3.5"];
    let report = json(&args);
    let indices: Vec<i64> = report["steps"].as_array().unwrap().iter().map(|s| s["index"].as_i64().unwrap()).collect();
    assert_eq!(indices, [-1, 0, 1, 5]);

    let mut csv_args = args.to_vec();
    csv_args.extend(["--format", "csv"]);
    let csv = ok(&csv_args);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("beta_lo,beta_hi,index"));
    assert_eq!(lines.collect::<Vec<_>>(), ["-0.5,0,-1", "0,2,0", "2,3,1", "3,3.5,5"]);
}

#[test]
fn ladder_inside_base_window_is_one_row() {
    let report = json(&["ladder", "--n", "4", "--s", "1", "--range", "0.25,1.75"]);
    let steps = report["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 1);
    assert_eq!(steps[0]["index"], 0);
}

#[test]
fn ladder_endpoint_on_root_is_nudged_with_warning() {
    let out = run(&["ladder", "--n", "4", "--s", "1", "--range", "2,3.5", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("warning"), "{}", stderr(&out));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["range"][0]["display"], "2000001/1000000");
}

#[test]
fn insufficient_spectrum_exits_3_with_bound() {
    let out = run(&["ladder", "--n", "4", "--s", "1", "--range", "-0.5,3.5", "--kmax", "0"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("21/4"), "{}", stderr(&out));
}

#[test]
fn extension_and_witt_summaries() {
    let text = ok(&["extension", "--op", "laplace", "--n", "4", "--s", "1", "--beta", "2"]);
    assert!(text.contains("unique closed extension: yes; essentially self-adjoint weight: 2"), "{text}");
    let text = ok(&["extension", "--op", "laplace", "--n", "4", "--s", "1", "--beta", "3"]);
    assert!(text.starts_with("unique closed extension: no"), "{text}");
    let text = ok(&["witt", "--n", "4", "--s", "1", "--gap", "1.5"]);
    assert_eq!(text.lines().next(), Some("Witt: satisfied"));
}

#[test]
fn dirac_spectrum_file() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "#spectrum dirac test\n-1/4 1\n1/4 1\n5/2 4").unwrap();
    let path = file.path().to_str().unwrap();
    let text = ok(&["witt", "--n", "4", "--s", "1", "--dirac-file", path]);
    assert_eq!(text.lines().next(), Some("Witt: violated (eigenvalue -1/4)"));
    let report = json(&["roots", "--op", "dirac", "--n", "4", "--s", "1", "--dirac-file", path]);
    assert_eq!(report["rows"][0]["root"]["display"], "5/4");
}

#[test]
fn config_file_mirrors_flags() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "op = \"laplace\"\nn = 4\ns = 1\nrange = \"-0.5,3.5\"").unwrap();
    let path = file.path().to_str().unwrap();
    let from_file = json(&["ladder", "--config", path]);
    let from_flags = json(&["ladder", "--n", "4", "--s", "1", "--range", "-0.5,3.5"]);
    assert_eq!(from_file, from_flags);
    let overridden = json(&["ladder", "--config", path, "--n", "5"]);
    assert_eq!(overridden["cone"]["n"], 5);

    let mut bad = tempfile::NamedTempFile::new().unwrap();
    writeln!(bad, "dimension = 4").unwrap();
    assert_eq!(run(&["ladder", "--config", bad.path().to_str().unwrap()]).status.code(), Some(2));
}

fn json_samples() -> Vec<Vec<&'static str>> {
    vec![
        vec!["roots", "--op", "laplace", "--n", "5", "--s", "1/2", "--kmax", "3"],
        vec!["roots", "--op", "generic", "--coeffs", "2,-3,1"],
        vec!["windows", "--op", "laplace", "--n", "4", "--s", "0", "--beta", "-1"],
        vec!["windows", "--op", "laplace", "--n", "5", "--s", "1", "--gamma", "1"],
        vec!["windows", "--op", "dirac", "--n", "5", "--s", "1", "--kappa-nonneg"],
        vec!["windows", "--op", "ah-shifted", "--n", "4", "--p", "3", "--t", "5/2"],
        vec!["ladder", "--n", "5", "--s", "-1", "--range", "-6,3"],
        vec!["witt", "--n", "4", "--s", "1/4", "--gap", "1"],
        vec!["extension", "--op", "laplace", "--n", "4", "--s", "1", "--beta", "3"],
        vec!["solve", "--n", "4", "--s", "1", "--beta", "3", "--rhs", "1:0:0:0,2:-1:0:3"],
        vec!["mellin", "--check", "derivative", "--function", "xexp", "--zeta", "1,1"],
    ]
}

#[test]
fn json_output_round_trips_byte_identically() {
    for args in json_samples() {
        let mut full = args.clone();
        full.extend(["--format", "json"]);
        let emitted = ok(&full);
        let parsed: Value = serde_json::from_str(&emitted).unwrap();
        let again = format!("{}\n", serde_json::to_string_pretty(&parsed).unwrap());
        assert_eq!(again, emitted, "{args:?}");
    }
}

fn numbers(text: &str) -> Vec<f64> {
    let token = Regex::new(r"-?\d+(?:\.\d+)?(?:e-?\d+)?(?:/\d+)?").unwrap();
    token
        .find_iter(text)
        .map(|m| match m.as_str().split_once('/') {
            Some((p, q)) => p.parse::<f64>().unwrap() / q.parse::<f64>().unwrap(),
            None => m.as_str().parse().unwrap(),
        })
        .collect()
}

#[test]
fn every_printed_number_is_in_the_json() {
    for args in json_samples() {
        let text = ok(&args);
        let mut full = args.clone();
        full.extend(["--format", "json"]);
        let payload = numbers(&ok(&full));
        for x in numbers(&text) {
            assert!(
                payload.iter().any(|y| (x - y).abs() <= 1e-12 * x.abs().max(1.0)),
                "{args:?}: {x} printed but absent from json\n{text}"
            );
        }
    }
}

#[test]
fn mellin_checks_and_failures() {
    let text = ok(&["mellin", "--function", "gauss", "--theta", "-0.5"]);
    assert!(text.contains("PASS derivative rule"), "{text}");
    assert!(text.contains("PASS isometry"), "{text}");
    let out = run(&["mellin", "--tolerance", "1e-40"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL"));
    // e^{-x} is not in the unweighted space
    let out = run(&["mellin", "--check", "isometry", "--theta", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn mellin_reads_sampled_csv() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "t,value").unwrap();
    let count = 4001;
    for j in 0..count {
        let t = -20.0 + 40.0 * j as f64 / (count - 1) as f64;
        writeln!(file, "{t},{}", (-t.exp()).exp()).unwrap();
    }
    let report = json(&["mellin", "--samples", file.path().to_str().unwrap(), "--check", "forward", "--zeta", "2"]);
    let value = report["checks"]["forward"]["value"]["re"].as_f64().unwrap();
    assert!((value - 1.0).abs() < 1e-8, "{value}");
}

#[test]
fn verify_passes_and_reports_injected_failures() {
    let out = run(&["verify", "--filter", "symbols."]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let names: Vec<&str> = text.lines().filter_map(|l| l.strip_prefix("PASS ")).map(|l| l.split(':').next().unwrap()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    assert_eq!(names.len(), 4);

    let out = run(&["verify", "--filter", "link_spectra.", "--inject-failure", "link_spectra.product_laws"]);
    assert_eq!(out.status.code(), Some(1));
    let failed: Vec<String> = stdout(&out).lines().filter(|l| l.starts_with("FAIL")).map(String::from).collect();
    assert_eq!(failed.len(), 1);
    assert!(failed[0].starts_with("FAIL link_spectra.product_laws"), "{failed:?}");
}

#[test]
fn verify_full_battery() {
    let out = run(&["verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("0 failed"));
}
