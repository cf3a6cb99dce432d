use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sound_ranging::harness::{read_config, RunRecord};

fn srp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srp")).args(args).output().expect("binary runs")
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn is_sci(text: &str) -> bool {
    let Some((mantissa, exp)) = text.split_once('e') else { return false };
    let digits: String = mantissa.trim_start_matches('-').chars().filter(|c| *c != '.').collect();
    digits.len() == 17 && digits.chars().all(|c| c.is_ascii_digit()) && exp.parse::<i32>().is_ok()
}

#[test]
fn solve_writes_trace_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let (trace, report) = (dir.path().join("trace.txt"), dir.path().join("report.json"));
    let cfg = config("appendix.ini");
    let out = srp(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
        "--json-report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("Distance error:"));

    let rec: RunRecord = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let sc = read_config(&cfg).unwrap();
    assert_eq!(rec.digest, sc.digest());
    assert!(rec.success);
    let recomputed = sc.space.distance(&rec.approx, &rec.source).unwrap();
    assert!((recomputed - rec.error).abs() <= 1e-12);

    let lines: Vec<String> = std::fs::read_to_string(&trace).unwrap().lines().map(String::from).collect();
    assert_eq!(lines, rec.trace);
    assert_eq!(lines.len(), rec.counts.len());
    for (k, line) in lines.iter().enumerate() {
        let f: Vec<&str> = line.split(' ').collect();
        assert_eq!(f.len(), 8, "{line}");
        assert_eq!((f[0], f[2], f[4], f[6]), ("iter", "coverands", "r_k", "d_k"));
        assert_eq!(f[1].parse::<usize>().unwrap(), k + 1);
        assert_eq!(f[3].parse::<usize>().unwrap(), rec.counts[k]);
        assert!(is_sci(f[5]) && is_sci(f[7]), "{line}");
    }
}

#[test]
fn every_shipped_config_solves() {
    for entry in std::fs::read_dir(config("")).unwrap() {
        let path = entry.unwrap().path();
        let out = srp(&["solve", "--config", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}: {}", path.display(), String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.ini");
    let bad = write(dir.path(), "bad.ini", "[space]\ndim = 2\n[colour]\nhue = red\n");
    let a5 = write(
        dir.path(),
        "a5.ini",
        "[space]\ndim = 1\n[sensors]\nkind = explicit\npoints = 0 | 1\n[source]\nkind = explicit\npoint = 5\n\
         [solver]\ndelta = 0.01\n[initial]\ncenter = 0\nradius = 1\n",
    );
    for path in [missing, bad, a5] {
        let out = srp(&["solve", "--config", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{}", path.display());
    }
}

#[test]
fn solver_failures_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("appendix.ini")).unwrap();
    let capped = write(dir.path(), "capped.ini", &text.replace("[solver]", "[solver]\nmax_level = 2"));
    let report = dir.path().join("report.json");
    let out = srp(&["solve", "--config", capped.to_str().unwrap(), "--json-report", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let rec: RunRecord = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!((rec.halt.as_str(), rec.success), ("budget_exhausted", false));

    let unwritable = dir.path().join("missing-dir").join("trace.txt");
    let out = srp(&["solve", "--config", config("line.ini").to_str().unwrap(), "--trace", unwritable.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn demo_and_selftest() {
    let out = srp(&["demo-appendix", "--sensor-seed", "4", "--source-seed", "9"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("Iteration 1:") && text.contains("Real source:"), "{text}");

    let out = srp(&["selftest"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().count() >= 5 && text.lines().all(|l| l.starts_with("PASS ")), "{text}");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(srp(&["solve"]).status.code(), Some(2));
    assert_eq!(srp(&["frobnicate"]).status.code(), Some(2));
}
