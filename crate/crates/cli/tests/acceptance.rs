//! Acceptance check for the command-line tool: every command, run twice
//! with the same flags and seed, produces byte-identical output.
//!
//! Runs without the libtest harness and prints one PASS/FAIL line.

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::Instant;

/// Side files a command writes, by flag.
const SIDE_FLAGS: [&str; 3] = ["--profile", "--dump", "--trace"];

fn run_once(args: &[String], tag: &str) -> Vec<u8> {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let mut args = args.to_vec();
    let mut side = Vec::new();
    for i in 0..args.len() {
        if SIDE_FLAGS.contains(&args[i].as_str()) {
            let p = dir.join(format!("{tag}-{}", args[i + 1]));
            args[i + 1] = p.to_string_lossy().into_owned();
            side.push(p);
        }
    }
    let out = Command::new(env!("CARGO_BIN_EXE_dca")).args(&args).output().expect("spawn dca");
    let mut bytes = out.stdout;
    bytes.extend(out.stderr);
    bytes.extend(format!("exit {:?}", out.status.code()).bytes());
    for p in side {
        bytes.extend(std::fs::read(&p).unwrap_or_default());
    }
    bytes
}

fn commands() -> Vec<Vec<String>> {
    let base: Vec<&str> = vec![
        "classify --mu1 1.5 --L1 2 --mu2 1 --L2 2.5",
        "classify --mu1 1 --L1 inf --mu2 0 --L2 1",
        "rate --mu1 1.5 --L1 2 --mu2 1 --L2 2.5 --N 10 --flo-gap 3",
        "shift --mu1 1 --L1 2 --mu2 -1.5 --L2 1.5 --profile profile.csv",
        "contour --mu1 1 --L1 2 --points 21",
        "worstcase --regime p1 --mu1 0.1 --L1 2 --mu2 -0.01 --L2 0.5 --delta 1 --N 3 --dump wc.json --trace wc.csv",
        "worstcase --regime p2 --mu1 0.25 --L1 1.5 --mu2 1 --L2 2 --delta 1 --N 3",
        "pgd-map --L-phi 1 --mu-phi 0.5 --points 50",
        "pgd-sigma --L-phi 1 --mu-phi -0.5 --gamma 1.2",
        "pgd-run --a 1.5 --b 0.3 --kappa 0.2 --gamma 1 --N 30",
        "spca --n 30 --starts 12 --seed 5",
        "verify --suite all --samples 500 --seed 11",
        "classify --mu1 1 --L1 2 --mu2 -1.5 --L2 1.5",
    ];
    let mut out = Vec::new();
    for c in base {
        for fmt in ["json", "csv", "human"] {
            let mut v: Vec<String> = c.split_whitespace().map(String::from).collect();
            v.extend(["--output".into(), fmt.into()]);
            out.push(v);
        }
    }
    out
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let t = Instant::now();
    let cmds = commands();
    let mut mismatched = Vec::new();
    for (i, c) in cmds.iter().enumerate() {
        let a = run_once(c, &format!("{i}a"));
        let b = run_once(c, &format!("{i}b"));
        if a != b {
            mismatched.push(c.join(" "));
        }
    }
    let pass = mismatched.is_empty();
    println!(
        "{} [8] determinism: {} invocations run twice, {} differ{}; {:.2}s",
        if pass { "PASS" } else { "FAIL" },
        cmds.len(),
        mismatched.len(),
        if pass { String::new() } else { format!(" ({})", mismatched.join("; ")) },
        t.elapsed().as_secs_f64()
    );
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
