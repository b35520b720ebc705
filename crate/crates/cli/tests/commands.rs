use std::path::PathBuf;
use std::process::{Command, Output};

use dca_core::curvature::{ExtReal, Splitting};
use dca_core::regimes::RegimeReport;
use dca_core::worstcase::WorstCaseInstance;
use serde::{Deserialize, Serialize};
use serde_json::Value;

fn dca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dca")).args(args).output().expect("spawn dca")
}

fn json_of(args: &[&str]) -> Value {
    let mut a = args.to_vec();
    a.extend(["--output", "json"]);
    let out = dca(&a);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

#[test]
fn classify_running_example() {
    let v = json_of(&["classify", "--mu1", "1.5", "--L1", "2", "--mu2", "1", "--L2", "2.5"]);
    assert_eq!(v["report"]["regime"], "p2");
    assert!((f(&v["report"]["p"]) - 0.9167).abs() < 1e-4);

    let human = dca(&["classify", "--mu1", "1.5", "--L1", "2", "--mu2", "1", "--L2", "2.5"]);
    let text = String::from_utf8(human.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("regime") && l.trim_end().ends_with("p2")));
    assert!(text.contains("0.916667"));
}

#[test]
fn classify_nonsmooth_and_degenerate() {
    let v = json_of(&["classify", "--mu1", "1", "--L1", "inf", "--mu2", "0", "--L2", "1"]);
    assert_eq!(v["report"]["regime"], "p1");
    assert_eq!(f(&v["report"]["p"]), 2.0);
    let v = json_of(&["classify", "--mu1", "0", "--L1", "1", "--mu2", "0", "--L2", "1"]);
    assert_eq!(v["report"]["regime"], "degenerate");
    assert_eq!(f(&v["report"]["p"]), 2.0);
}

#[derive(Deserialize, Serialize)]
struct ClassifyOutput {
    splitting: Splitting,
    report: RegimeReport,
}

#[test]
fn classify_json_round_trips() {
    let out = dca(&["classify", "--mu1", "0.3", "--L1", "inf", "--mu2", "-0.1", "--L2", "0.7", "--output", "json"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let parsed: ClassifyOutput = serde_json::from_str(&text).unwrap();
    assert!(parsed.splitting.l1().is_infinite());
    let again = serde_json::to_string_pretty(&parsed).unwrap();
    assert_eq!(again + "\n", text);
}

#[test]
fn infinity_in_csv_and_json() {
    let out = dca(&["classify", "--mu1", "1", "--L1", "inf", "--mu2", "0", "--L2", "1", "--output", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("mu1,L1,mu2,L2,regime"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[1], "inf");
    assert_eq!(row[1].parse::<ExtReal>().unwrap(), ExtReal::INFINITY);

    let v = json_of(&["classify", "--mu1", "1", "--L1", "inf", "--mu2", "0", "--L2", "1"]);
    assert_eq!(v["splitting"]["l1"], "inf");
    let back: ExtReal = serde_json::from_value(v["splitting"]["l1"].clone()).unwrap();
    assert!(back.is_infinite());
}

#[test]
fn shift_examples() {
    let cases = [
        (["0.2", "3", "0.1", "4"], 0.1221, 0.6031),
        (["1", "2", "-1.5", "1.5"], -0.6526, 0.8516),
        (["1", "4", "1", "3"], 1.0, 0.8333),
    ];
    for ([m1, l1, m2, l2], lam, p) in cases {
        let v = json_of(&["shift", "--mu1", m1, "--L1", l1, "--mu2", m2, "--L2", l2]);
        assert!((f(&v["lambda_star"]) - lam).abs() < 1e-4, "{v}");
        assert!((f(&v["p_star"]) - p).abs() < 1e-4, "{v}");
    }
}

#[test]
fn shift_profile_file() {
    let path = tmp("profile.csv");
    let out = dca(&["shift", "--mu1", "0.2", "--L1", "3", "--mu2", "0.1", "--L2", "4", "--grid", "50", "--profile", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next(), Some("lambda,p,regime"));
    assert_eq!(text.lines().count(), 51);
}

#[test]
fn worstcase_examples() {
    for (regime, args) in [
        ("p1", ["0.1", "2", "-0.01", "0.5"]),
        ("p2", ["0.25", "1.5", "1", "2"]),
    ] {
        let v = json_of(&[
            "worstcase", "--regime", regime, "--mu1", args[0], "--L1", args[1], "--mu2", args[2], "--L2", args[3],
            "--delta", "1", "--N", "3",
        ]);
        assert_eq!(v["pass"], true);
        let (pred, got) = (f(&v["predicted_wc"]), f(&v["achieved_wc"]));
        assert!((pred - got).abs() <= 1e-9 * pred);
        assert!((pred - 1.0 / (3.0 * f(&v["p"]))).abs() <= 1e-12);
    }
}

#[test]
fn worstcase_unit_residual() {
    // delta = p/2 with N = 1 gives residual 1
    let p = f(&json_of(&["classify", "--mu1", "0.3", "--L1", "5", "--mu2", "0.2", "--L2", "1"])["report"]["p"]);
    let delta = (p / 2.0).to_string();
    let v = json_of(&["worstcase", "--regime", "p1", "--mu1", "0.3", "--L1", "5", "--mu2", "0.2", "--L2", "1", "--delta", &delta, "--N", "1"]);
    assert!((f(&v["achieved_wc"]) - 0.5).abs() < 1e-12);
}

#[test]
fn worstcase_dump_is_an_instance() {
    let path = tmp("instance.json");
    let out = dca(&[
        "worstcase", "--regime", "p2", "--mu1", "0.25", "--L1", "1.5", "--mu2", "1", "--L2", "2", "--N", "3",
        "--dump", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let inst: WorstCaseInstance = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(inst.n, 3);
    assert_eq!(inst.x_iters.len(), 4);
}

#[test]
fn worstcase_domain_violation_is_input_error() {
    let out = dca(&["worstcase", "--regime", "p1", "--mu1", "1", "--L1", "2", "--mu2", "0.5", "--L2", "0.5", "--N", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = dca(&["worstcase", "--regime", "p3", "--mu1", "1", "--L1", "2", "--mu2", "0.5", "--L2", "1", "--N", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn input_errors_exit_2() {
    // no decrease guarantee
    let out = dca(&["classify", "--mu1", "1", "--L1", "2", "--mu2", "-1.5", "--L2", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mu1 + mu2"));
    // unparseable number
    assert_eq!(dca(&["classify", "--mu1", "x", "--L1", "2", "--mu2", "0", "--L2", "1"]).status.code(), Some(2));
    // missing flag
    assert_eq!(dca(&["rate", "--mu1", "1"]).status.code(), Some(2));
    // stepsize out of range
    assert_eq!(dca(&["pgd-sigma", "--L-phi", "1", "--mu-phi", "0", "--gamma", "2"]).status.code(), Some(2));
}

#[test]
fn randomized_json_needs_seed() {
    let out = dca(&["verify", "--suite", "swap", "--samples", "10", "--output", "json"]);
    assert_eq!(out.status.code(), Some(2));
    let out = dca(&["verify", "--suite", "swap", "--samples", "10"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn verify_suites_pass() {
    for suite in ["boundaries", "swap", "pgd-equiv", "bounds"] {
        let v = json_of(&["verify", "--suite", suite, "--samples", "1000", "--seed", "7"]);
        assert_eq!(v["pass"], true, "{v}");
        assert_eq!(v["seed"], 7);
    }
}

#[test]
fn rate_and_pgd_commands() {
    let v = json_of(&["rate", "--mu1", "1.5", "--L1", "2", "--mu2", "1", "--L2", "2.5", "--N", "1"]);
    assert!((f(&v["bound_simple"]) - 12.0 / 11.0).abs() < 1e-12);

    let v = json_of(&["pgd-sigma", "--L-phi", "1", "--mu-phi", "0", "--gamma", "1"]);
    assert!((f(&v["sigma_plus"]) - 2.0).abs() < 1e-12);
    assert_eq!(v["branch"], "small_or_below_threshold");

    let v = json_of(&["pgd-map", "--L-phi", "1", "--mu-phi", "-0.2", "--gamma-min", "0.5", "--gamma-max", "0.5", "--points", "1"]);
    assert_eq!(v[0]["regime"], "p1");
    assert_eq!(f(&v[0]["mu2"]), 1.0);

    let v = json_of(&["pgd-run", "--a", "1.5", "--b", "0.3", "--kappa", "0.2", "--gamma", "1", "--N", "15"]);
    assert_eq!(v["pass"], true);
    assert!(f(&v["max_iterate_diff"]) <= 1e-10);
}

#[test]
fn contour_csv_shape() {
    let out = dca(&["contour", "--mu1", "1", "--L1", "2", "--points", "5", "--output", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("mu2,L2,regime,p,sigma,sigma_plus"));
    assert_eq!(text.lines().count(), 26);
}

#[test]
fn out_flag_writes_file() {
    let path = tmp("classify.json");
    let out = dca(&["classify", "--mu1", "1.5", "--L1", "2", "--mu2", "1", "--L2", "2.5", "--output", "json", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["report"]["regime"], "p2");
}

#[test]
fn spca_small_run() {
    let v = json_of(&[
        "spca", "--n", "20", "--starts", "10", "--lambdas", "0,0.3", "--epsilons", "1e-4,1e-6", "--seed", "3",
    ]);
    assert_eq!(v["counts"].as_array().unwrap().len(), 2);
    assert_eq!(v["monotone"], true);
}
