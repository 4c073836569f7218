use std::path::PathBuf;
use std::process::{Command, Output};

use avc_core::{BoundReport, PowerBudget};
use serde_json::Value;

fn avc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_avc")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("avc-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn bounds_single_point() {
    let out = avc(&["bounds", "--e", "4", "--p", "1"]);
    assert!(out.status.success());
    let v = json(&out);
    assert!((v["nu"].as_f64().unwrap() - 0.170_672).abs() < 1e-6);
    assert_eq!(v["worst_jammers"]["nu"]["holds"], true);
    for key in ["e", "p", "nu", "epsilon", "delta", "cap_direct", "cap_cr", "cap_q_lb", "worst_jammers"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn bounds_equal_powers_is_vacuous_for_direct_coding() {
    let v = json(&avc(&["bounds", "--e", "1", "--p", "1", "--no-search"]));
    assert_eq!(v["cap_direct_vacuous"], true);
    assert!(v["cap_cr"].as_f64().unwrap() > 0.0);
}

#[test]
fn bounds_sweep_csv() {
    let out = avc(&["bounds", "--e-range", "0.25:1:0.25", "--p-range", "0.5:1:0.5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "e,p,nu,epsilon,delta,cap_direct,cap_cr,cap_q_lb");
    assert_eq!(lines.len(), 1 + 4 * 2);
    let first: Vec<f64> = lines[1].split(',').map(|x| x.parse().unwrap()).collect();
    let r = BoundReport::closed_form(&PowerBudget::new(0.25, 0.5).unwrap());
    let expected = [r.e, r.p, r.nu, r.epsilon, r.delta, r.cap_direct, r.cap_cr, r.cap_q];
    for (got, want) in first.iter().zip(expected) {
        assert!((got - want).abs() <= 1e-11 * want.abs(), "{got} vs {want}");
    }
    for row in &lines[1..] {
        assert_eq!(row.split(',').count(), 8);
    }
}

#[test]
fn empty_sweep_is_a_usage_error() {
    let out = avc(&["bounds", "--e-range", "2:1:0.5", "--p", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = avc(&["bounds", "--e-range", "1:2", "--p", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn quadrants_unjammed_and_infeasible() {
    let v = json(&avc(&["quadrants", "--e", "1", "--p", "1"]));
    let q: Vec<f64> = v["probabilities"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let expected = 0.25 + (2.0f64 / 3.0).sqrt().asin() / std::f64::consts::TAU;
    assert!((q[0] - expected).abs() < 1e-12);
    assert!((q[0] - q[3]).abs() < 1e-15 && (q[1] - q[2]).abs() < 1e-15);
    assert_eq!(v["decomposition"]["in_triangle"], true);
    let out = avc(&["quadrants", "--e", "1", "--p", "1", "--beta", "1", "--njam", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn attack_simulation_and_determinism() {
    let args = ["simulate", "attack", "--e", "1", "--p", "1", "--m", "2", "--n", "32", "--trials", "10000", "--seed", "7"];
    let a = avc(&args);
    assert!(a.status.success());
    let v = json(&a);
    let (err, se) = (v["empirical_error"].as_f64().unwrap(), v["stderr"].as_f64().unwrap());
    assert!(err >= 0.25 - 3.0 * se);
    let b = avc(&args);
    assert_eq!(a.stdout, b.stdout);
    let single = Command::new(env!("CARGO_BIN_EXE_avc")).args(args).env("AVC_THREADS", "1").output().unwrap();
    assert_eq!(a.stdout, single.stdout);
}

#[test]
fn attack_needs_jammer_power() {
    let out = avc(&["simulate", "attack", "--e", "2", "--p", "1", "--trials", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bpsk_simulation_meets_nu() {
    let v = json(&avc(&["simulate", "bpsk", "--e", "4", "--p", "1", "--n", "10", "--trials", "20000", "--seed", "3"]));
    let (err, se) = (v["empirical_error"].as_f64().unwrap(), v["stderr"].as_f64().unwrap());
    assert!(1.0 - err >= 0.6706 - 3.0 * se);
}

#[test]
fn output_files_come_with_manifest() {
    let dir = scratch("manifest");
    let out_path = dir.join("tmsv.json");
    let csv_path = dir.join("trials.csv");
    let status = avc(&[
        "simulate",
        "tmsv",
        "--n",
        "8",
        "--trials",
        "500",
        "--seed",
        "9",
        "--policy",
        "fixed",
        "--beta",
        "-0.5",
        "--njam",
        "0.2",
        "--out",
        out_path.to_str().unwrap(),
        "--trials-csv",
        csv_path.to_str().unwrap(),
    ]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    assert!(status.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["protocol"], "tmsv");
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("tmsv.json.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "simulate");
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv.lines().count(), 501);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn verify_subcommands() {
    let out = avc(&["verify", "all", "--trials", "20000"]);
    assert!(out.status.success());
    assert_eq!(json(&out).as_array().unwrap().len(), 2);
    let out = avc(&["verify", "plackett"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("min slack"));
    assert_eq!(avc(&["verify", "nonsense"]).status.code(), Some(2));
}

#[test]
fn help_documents_flags() {
    let out = avc(&["simulate", "--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for flag in ["--e", "--p", "--n", "--m", "--trials", "--seed", "--out", "--beta", "--njam", "AVC_THREADS"] {
        assert!(text.contains(flag), "missing {flag}");
    }
}
