use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pauli-est"))
        .args(args)
        .env_remove("PAULI_EST_FIXTURES")
        .output()
        .expect("binary runs")
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn additive_example_run() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let res = run(&[
        "--mode",
        "additive",
        "--channel",
        "example",
        "--epsilon",
        "0.1",
        "--delta",
        "0.05",
        "--seed",
        "7",
        "--out",
        path(&out),
    ]);
    assert_eq!(
        res.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let rep = report(&out);
    let trial = &rep["trials"][0];
    assert_eq!(trial["hypothesis"].as_array().unwrap().len(), 4);
    assert!(trial["accuracy"]["max_error"].as_f64().unwrap() <= 0.1);
    assert_eq!(rep["sample_sizes"]["m"], rep["sample_sizes"]["formula_m"]);
    let hyp = fs::read_to_string(out.join("hypothesis.txt")).unwrap();
    assert_eq!(hyp.lines().count(), 4);
    assert!(out.join("trials.csv").is_file());
    assert!(out.join("timings.json").is_file());
}

#[test]
fn reports_are_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        let res = run(&["--nu", "0.1", "--trials", "3", "--seed", "11", "--out", path(dir)]);
        assert_eq!(res.status.code(), Some(0));
    }
    for file in ["report.json", "hypothesis.txt", "trials.csv"] {
        assert_eq!(
            fs::read(a.join(file)).unwrap(),
            fs::read(b.join(file)).unwrap(),
            "{file}"
        );
    }
    let c = tmp.path().join("c");
    run(&["--nu", "0.1", "--trials", "3", "--seed", "12", "--out", path(&c)]);
    assert_ne!(
        fs::read(a.join("report.json")).unwrap(),
        fs::read(c.join("report.json")).unwrap()
    );
}

#[test]
fn malformed_spec_is_a_config_error_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = tmp.path().join("bad.spec");
    fs::write(&spec, "n=2\n01 0.5\n").unwrap();
    let out = tmp.path().join("out");
    let res = run(&["--channel", path(&spec), "--out", path(&out)]);
    assert_eq!(res.status.code(), Some(1));
    assert!(!out.exists());

    let res = run(&["--mode", "fourier", "--nu", "0.1", "--out", path(&out)]);
    assert_eq!(res.status.code(), Some(1));
    let res = run(&["--epsilon", "1.5", "--out", path(&out)]);
    assert_eq!(res.status.code(), Some(1));
    let res = run(&["--channel", "no-such-fixture", "--out", path(&out)]);
    assert_eq!(res.status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn capacity_overflow_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = tmp.path().join("id.spec");
    fs::write(&spec, "n=4\n0000 1\n").unwrap();
    let out = tmp.path().join("out");
    let res = run(&[
        "--channel",
        path(&spec),
        "--epsilon",
        "0.9",
        "--samples",
        "1",
        "--out",
        path(&out),
    ]);
    assert_eq!(res.status.code(), Some(2));
    let rep = report(&out);
    assert_eq!(rep["trials"][0]["status"], "capacity_exceeded");
    assert_eq!(rep["trials"][0]["abort"]["capacity"], 4);
}

#[test]
fn below_floor_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = tmp.path().join("id.spec");
    fs::write(&spec, "n=3\n000 1\n").unwrap();
    let out = tmp.path().join("out");
    let res = run(&[
        "--mode",
        "multiplicative",
        "--channel",
        path(&spec),
        "--eta0",
        "0.01",
        "--out",
        path(&out),
    ]);
    assert_eq!(res.status.code(), Some(3));
    let rep = report(&out);
    assert_eq!(rep["trials"][0]["stage1"]["kind"], "below_floor");
    let cap = rep["sample_sizes"]["stage1"]["probe_cap"].as_u64().unwrap();
    assert!(rep["trials"][0]["stage1"]["probes_used"].as_u64().unwrap() <= cap);
}

#[test]
fn multiplicative_run_reports_both_stages() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = tmp.path().join("low.spec");
    fs::write(&spec, "n=6\n000000 0.97\n120000 0.02\n003300 0.01\n").unwrap();
    let out = tmp.path().join("out");
    let res = run(&[
        "--mode",
        "multiplicative",
        "--channel",
        path(&spec),
        "--epsilon",
        "0.4",
        "--delta",
        "0.1",
        "--out",
        path(&out),
    ]);
    assert_eq!(
        res.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let rep = report(&out);
    let t = &rep["trials"][0];
    assert_eq!(t["stage1"]["kind"], "estimate");
    assert!(t["stage2"]["samples"].as_u64().unwrap() > 0);
    assert!((rep["details"]["true_eta"].as_f64().unwrap() - 0.03).abs() < 1e-12);
}

#[test]
fn fourier_mode_cross_checks_and_dumps_eigenvalues() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let res = run(&["--mode", "fourier", "--seed", "3", "--out", path(&out)]);
    assert_eq!(res.status.code(), Some(0));
    let rep = report(&out);
    let cross = &rep["trials"][0]["cross_check"];
    assert!(cross["only_fourier"].as_array().unwrap().is_empty());
    assert!(cross["only_additive"].as_array().unwrap().is_empty());
    let table = fs::read_to_string(out.join("eigenvalues.txt")).unwrap();
    let first: Vec<&str> = table.lines().next().unwrap().split(' ').collect();
    assert_eq!(&first[..2], ["00000", "1"]);
}

#[test]
fn oracle_check_passes_on_fixtures() {
    let tmp = tempfile::tempdir().unwrap();
    for name in ["amplitude-damping", "random-rotation"] {
        let out = tmp.path().join(name);
        let res = run(&[
            "--mode",
            "oracle-check",
            "--kraus",
            name,
            "--samples",
            "50000",
            "--out",
            path(&out),
        ]);
        assert_eq!(res.status.code(), Some(0));
        let rep = report(&out);
        assert_eq!(rep["twirl_equivalence"]["pass"], true, "{name}");
        assert_eq!(rep["summary"]["pass"], true, "{name}");
        assert!(out.join("rates.spec").is_file());
    }
}

#[test]
fn bench_single_point() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let res = run(&[
        "--mode",
        "bench",
        "--grid",
        "16",
        "--samples",
        "5000",
        "--reps",
        "1",
        "--out",
        path(&out),
    ]);
    assert_eq!(res.status.code(), Some(0));
    let csv = fs::read_to_string(out.join("bench.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| l.contains(",fast,")).count(), 1);
    assert_eq!(report(&out)["grid"][0]["naive_identical"], true);
}

#[test]
fn fixture_directory_and_batch_dumps() {
    let tmp = tempfile::tempdir().unwrap();
    let fixtures = tmp.path().join("fixtures");
    fs::create_dir(&fixtures).unwrap();
    fs::write(fixtures.join("mine.spec"), "n=3\n012 0.6\n300 0.4\n").unwrap();
    let out = tmp.path().join("first");
    let res = Command::new(env!("CARGO_BIN_EXE_pauli-est"))
        .args([
            "--channel",
            "mine",
            "--epsilon",
            "0.2",
            "--dump-batch",
            "--out",
            path(&out),
        ])
        .env("PAULI_EST_FIXTURES", &fixtures)
        .output()
        .unwrap();
    assert_eq!(
        res.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let first = report(&out);

    let again = tmp.path().join("again");
    let dump = out.join("batch.dump");
    let res = Command::new(env!("CARGO_BIN_EXE_pauli-est"))
        .args([
            "--channel",
            "mine",
            "--epsilon",
            "0.2",
            "--batch",
            path(&dump),
            "--out",
            path(&again),
        ])
        .env("PAULI_EST_FIXTURES", &fixtures)
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(0));
    assert_eq!(
        first["trials"][0]["hypothesis"],
        report(&again)["trials"][0]["hypothesis"]
    );
}
