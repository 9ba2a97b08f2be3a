#![allow(clippy::approx_constant)]

use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epnlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_env(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epnlab"))
        .args(args)
        .env("EPNLAB_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(o)).unwrap()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("epnlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn ep_find_json_matches_table() {
    let table: [(usize, &[f64]); 5] = [
        (2, &[1.000]),
        (3, &[1.414]),
        (4, &[1.684, 0.406]),
        (5, &[1.885, 0.668]),
        (6, &[2.046, 0.864, 0.261]),
    ];
    for (n, want) in table {
        let o = run(&["ep-find", "--n", &n.to_string(), "--policy", "monotone", "--format", "json"]);
        assert!(o.status.success(), "n={n}");
        let v = json(&o);
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["couplings", "eliminant_text", "n", "residuals"]);
        assert_eq!(v["n"], n);
        let got: Vec<f64> = v["couplings"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= 5e-4, "n={n}: {g} vs {w}");
        }
        assert!(v["residuals"].as_array().unwrap().iter().all(|r| r.as_f64().unwrap() <= 1e-9));
    }
}

#[test]
fn ep_find_all_is_an_array() {
    let o = run(&["ep-find", "--n", "4", "--policy", "all"]);
    assert!(o.status.success());
    assert_eq!(json(&o).as_array().unwrap().len(), 2);
}

#[test]
fn spectrum_csv_has_one_row_per_eigenvalue() {
    let o = run(&["spectrum", "--n", "4", "--couplings", "1.0,0.5", "--format", "csv"]);
    assert!(o.status.success());
    let s = stdout(&o);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "re,im");
    assert_eq!(lines.len(), 5);
    assert!(!s.contains('\r'));
}

#[test]
fn spectrum_at_ep3_coupling() {
    let o = run(&["spectrum", "--n", "3", "--couplings", "1.4142135623730951", "--format", "json"]);
    assert!(o.status.success());
    let v = json(&o);
    for e in v["eigenvalues"].as_array().unwrap() {
        let (re, im) = (e[0].as_f64().unwrap(), e[1].as_f64().unwrap());
        assert!(re.hypot(im) < 1e-6);
    }
    assert_eq!(v["classification"], "real_degenerate");
}

#[test]
fn spectrum_at_eight_digit_ep3_coupling_splits() {
    let o = run(&["spectrum", "--n", "3", "--couplings", "1.4142135", "--format", "json"]);
    assert!(o.status.success());
    let a: f64 = 1.4142135;
    let split = (2.0 - a * a).sqrt();
    let v = json(&o);
    let mut mags: Vec<f64> = v["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e[0].as_f64().unwrap().hypot(e[1].as_f64().unwrap()))
        .collect();
    mags.sort_by(f64::total_cmp);
    assert!(mags[0] < 1e-12);
    assert!((mags[2] - split).abs() < 1e-12);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["spectrum", "--n", "4", "--couplings", "1.0,x"][..],
        &["spectrum", "--n", "4", "--couplings", "1.0"],
        &["spectrum", "--n", "4", "--couplings", "1,0.5", "--bogus"],
        &["spectrum", "--n", "4", "--couplings", "1,0.5", "--tol", "-1"],
        &["ep-find", "--n", "1"],
        &["domain-scan", "--n", "6", "--range", "-1:1,-1:1", "--res", "5"],
        &["nonsense"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn refused_computations_exit_one() {
    for args in [
        &["metric", "--n", "4", "--couplings", "3,0"][..],
        &["jordan", "--n", "3", "--couplings", "1"],
        &["metric", "--n", "2", "--couplings", "1"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn jordan_and_metric_succeed_inside() {
    let o = run(&["jordan", "--n", "3", "--couplings", "1.4142135623730951", "--format", "json"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["ep_order"], 3);
    assert!(v["similarity_residual"].as_f64().unwrap() < 1e-12);

    let o = run(&["metric", "--t", "0.5", "--format", "json"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["positive_definite"], true);
    let cf = v["closed_form_eigenvalues"].as_array().unwrap();
    let ev = v["eigenvalues"].as_array().unwrap();
    for (c, e) in cf.iter().zip(ev) {
        assert!((c.as_f64().unwrap() - e[0].as_f64().unwrap()).abs() < 1e-10);
    }

    let o = run(&["metric", "--family", "n2", "--a", "0.5", "--xi", "0.3", "--format", "csv"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("kind,i,j,re,im\n"));
}

#[test]
fn domain_scan_is_byte_identical_across_thread_counts() {
    let a = tmp("scan1.csv");
    let b = tmp("scan4.csv");
    let bnd = tmp("boundary.dat");
    let base = ["domain-scan", "--n", "4", "--range", "-2:2,-2:2", "--res", "40"];
    let mut args1: Vec<&str> = base.to_vec();
    let a_s = a.to_str().unwrap();
    args1.extend(["--out", a_s]);
    let mut args4: Vec<&str> = base.to_vec();
    let b_s = b.to_str().unwrap();
    let bnd_s = bnd.to_str().unwrap();
    args4.extend(["--out", b_s, "--boundary", bnd_s]);
    assert!(run_env(&args1, "1").status.success());
    assert!(run_env(&args4, "4").status.success());
    let x = std::fs::read(&a).unwrap();
    let y = std::fs::read(&b).unwrap();
    assert_eq!(x, y);
    let text = String::from_utf8(x).unwrap();
    assert!(text.starts_with("A,B,class,min_gap,max_imag\n"));
    assert_eq!(text.lines().count(), 1 + 40 * 40);
    assert!(!std::fs::read_to_string(&bnd).unwrap().trim().is_empty());
}

#[test]
fn repeated_runs_are_identical() {
    let args = ["ep-find", "--n", "6", "--policy", "all", "--format", "json"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn verify_single_criterion() {
    let o = run(&["verify", "--criterion", "3"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("criterion 3: PASS"));
}
