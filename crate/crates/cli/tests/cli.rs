use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gibbs-discovery")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn toy() -> tempfile::NamedTempFile {
    let file = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(file.path(), "l,m_l\n1,1\n").unwrap();
    file
}

fn values(report: &Value) -> Vec<f64> {
    report["estimates"].as_array().unwrap().iter().map(|e| e["value"].as_f64().unwrap()).collect()
}

#[test]
fn toy_estimate() {
    let file = toy();
    let path = file.path().to_str().unwrap();
    let report = json(&run(&["estimate", path, "--prior", "pd", "--sigma", "0.5", "--theta", "1", "--l", "0"]));
    assert_eq!(values(&report), vec![0.75]);
    assert_eq!(report["fitted"], false);
}

#[test]
fn aerobic_interval() {
    let aerobic = data("aerobic.csv");
    let report = json(&run(&["ci", &aerobic, "--prior", "pd", "--fit", "--l", "0", "--level", "0.95", "--seed", "1"]));
    let e = &report["estimates"][0];
    assert!((e["value"].as_f64().unwrap() - 0.361).abs() < 0.001);
    assert!((e["interval"]["lo"].as_f64().unwrap() - 0.331).abs() < 0.001);
    assert!((e["interval"]["hi"].as_f64().unwrap() - 0.391).abs() < 0.001);
}

#[test]
fn anaerobic_fails_validation() {
    let anaerobic = data("anaerobic.csv");
    let out = run(&["validate", &anaerobic]);
    assert_eq!(out.status.code(), Some(3));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!((report["residual_k"].as_i64(), report["residual_n"].as_i64()), (Some(3), Some(42)));

    let out = run(&["estimate", &anaerobic, "--prior", "pd", "--sigma", "0.5", "--theta", "10"]);
    assert_eq!(out.status.code(), Some(3));
    let forced = run(&["estimate", &anaerobic, "--prior", "pd", "--sigma", "0.5", "--theta", "10", "--force"]);
    assert!(forced.status.success());

    assert!(run(&["validate", &data("aerobic.csv")]).status.success());
}

#[test]
fn flag_errors_exit_two() {
    let aerobic = data("aerobic.csv");
    for args in [
        vec!["estimate", &aerobic, "--prior", "pd", "--fit", "--sigma", "0.5"],
        vec!["estimate", &aerobic, "--prior", "pd", "--sigma", "0.5", "--tau", "2"],
        vec!["estimate", &aerobic, "--prior", "gg", "--sigma", "0.5", "--theta", "2"],
        vec!["estimate", &aerobic, "--prior", "pd", "--sigma", "1.5", "--theta", "2"],
        vec!["estimate", &aerobic, "--prior", "pd", "--fit", "--l", "3..1"],
        vec!["ci", &aerobic, "--prior", "pd", "--fit"],
        vec!["ci", &aerobic, "--prior", "pd", "--fit", "--seed", "1", "--level", "1.5"],
        vec!["approx", &aerobic, "--prior", "pd", "--fit", "--order", "3"],
        vec!["simulate", "--s", "1.1", "--n", "100", "--replicates", "2"],
        vec!["simulate", "--s", "0.9", "--n", "100", "--replicates", "2", "--seed", "1"],
        vec!["fit", &aerobic, "--prior", "dp"],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
    let out = Command::new(env!("CARGO_BIN_EXE_gibbs-discovery"))
        .args(["validate", &aerobic])
        .env("GIBBS_DISCOVERY_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numeric_failure_exits_four() {
    // all singletons: no interior likelihood maximum
    let file = toy();
    let out = run(&["fit", file.path().to_str().unwrap(), "--prior", "pd"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn unreadable_data_exits_three() {
    let file = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(file.path(), "freq,count\n1,2\n").unwrap();
    assert_eq!(run(&["validate", file.path().to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(run(&["validate", "/nonexistent/counts.csv"]).status.code(), Some(3));
}

#[test]
fn reports_are_byte_identical() {
    let aerobic = data("aerobic.csv");
    let args = ["ci", &aerobic, "--prior", "gg", "--sigma", "0.68", "--tau", "560", "--l", "0,1", "--draws", "500", "--seed", "4"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let sim = ["simulate", "--s", "1.1", "--n", "150", "--replicates", "3", "--groups", "1", "--seed", "2"];
    let one = Command::new(env!("CARGO_BIN_EXE_gibbs-discovery")).args(sim).env("GIBBS_DISCOVERY_THREADS", "1").output().unwrap();
    let two = Command::new(env!("CARGO_BIN_EXE_gibbs-discovery")).args(sim).env("GIBBS_DISCOVERY_THREADS", "2").output().unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, two.stdout);
}

#[test]
fn ci_points_match_estimates() {
    let aerobic = data("aerobic.csv");
    for params in [["--prior", "pd", "--sigma", "0.6685", "--theta", "46.24"], ["--prior", "gg", "--sigma", "0.668", "--tau", "564.3"]] {
        let mut est = vec!["estimate", aerobic.as_str(), "--l", "0,1,5,10,900"];
        est.extend(params);
        let mut ci = vec!["ci", aerobic.as_str(), "--l", "0,1,5,10,900", "--seed", "3", "--draws", "500"];
        ci.extend(params);
        let (e, c) = (values(&json(&run(&est))), values(&json(&run(&ci))));
        assert_eq!(e.len(), 5);
        for (x, y) in e.iter().zip(&c) {
            assert!((x - y).abs() <= 1e-10, "{x} vs {y}");
        }
        assert_eq!(e[4], 0.0);
    }
}

#[test]
fn approximations() {
    let aerobic = data("aerobic.csv");
    let common = ["--prior", "pd", "--sigma", "0.6685", "--theta", "46.24", "--l", "0..2"];
    let exact = values(&json(&run(&[&["estimate", &aerobic][..], &common].concat())));
    let first = values(&json(&run(&[&["approx", &aerobic, "--order", "1"][..], &common].concat())));
    let second = values(&json(&run(&[&["approx", &aerobic, "--order", "2"][..], &common].concat())));
    assert_eq!(exact.len(), 3);
    for i in 0..3 {
        assert!((second[i] - exact[i]).abs() <= (first[i] - exact[i]).abs() + 1e-12, "l={i}");
    }
}

#[test]
fn fit_report() {
    let report = json(&run(&["fit", &data("aerobic.csv"), "--prior", "pd"]));
    assert_eq!(report["prior"]["kind"], "pd");
    assert!((report["prior"]["sigma"].as_f64().unwrap() - 0.669).abs() < 0.01);
    assert!((report["prior"]["theta"].as_f64().unwrap() / 46.241 - 1.0).abs() < 0.05);
    assert_eq!(report["converged"], true);
}

#[test]
fn csv_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("estimates.csv");
    let status = run(&[
        "estimate",
        &data("aerobic.csv"),
        "--prior",
        "pd",
        "--sigma",
        "0.6685",
        "--theta",
        "46.24",
        "--l",
        "0,1",
        "--format",
        "csv",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    assert!(status.stdout.is_empty());
    let text = std::fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "l,method,value,lo,hi,level");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0,exact,0.36"));
}

#[test]
fn simulation_report() {
    let out = run(&["simulate", "--s", "1.1", "--n", "200", "--replicates", "2", "--groups", "1", "--seed", "5", "--format", "csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].contains("sse_bnp_pd") && lines[0].contains("sse_good_turing"));
}
