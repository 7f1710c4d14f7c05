//! The `ktwb` binary: output stability and exit codes.

use std::process::{Command, Output};

fn ktwb(args: &[&str], seed: Option<&str>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ktwb"));
    c.args(args).env_remove("KT_SEED");
    if let Some(s) = seed {
        c.env("KT_SEED", s);
    }
    c.output().unwrap()
}

fn scratch(name: &str, text: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("ktwb-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn identical_runs_give_identical_bytes() {
    for format in ["data", "latex", "plain"] {
        let args = ["derive", "length", "--lattice", "1", "--format", format];
        let a = ktwb(&args, None);
        let b = ktwb(&args, None);
        assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{format}");
    }
}

#[test]
fn seed_variable_overrides_flag() {
    let args = |s: &'static str| ["derive", "mechanics", "--lattice", "1", "--format", "data", "--seed", s];
    let env = ktwb(&args("1"), Some("9"));
    let flag = ktwb(&args("9"), None);
    let other = ktwb(&args("1"), None);
    assert_eq!(env.stdout, flag.stdout);
    assert_ne!(env.stdout, other.stdout);
}

#[test]
fn mechanics_latex_uses_dots() {
    let out = ktwb(&["derive", "mechanics", "--format", "latex"], None);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("m\\dot q\\,\\delta q"), "{text}");
    assert!(text.contains("\\end{document}"));
}

#[test]
fn data_report_has_stages_in_order() {
    let out = ktwb(&["derive", "pc4", "--point-checks", "3", "--format", "data"], None);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let stages: Vec<&str> = v["stages"].as_array().unwrap().iter().map(|s| s["stage"].as_str().unwrap()).collect();
    assert_eq!(stages, ["variation", "ibp_split", "vertical_delta", "constraint_extract", "point_checks"]);
}

#[test]
fn theory_files_are_accepted() {
    let p = scratch("osc.theory", "theory osc\ndim 1\ncoords t @transversal t\nfield q\nlagrangian \"q'^2 - q^2\"\njetorder 1\n");
    let out = ktwb(&["derive", p.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("theory osc"));
}

#[test]
fn exit_codes() {
    let bad = scratch("bad.theory", "theory bad\ncoords t @transversal t\nfield q\nlagrangian \"k*q'^2\"\n");
    assert_eq!(ktwb(&["derive", bad.to_str().unwrap()], None).status.code(), Some(1));
    assert_eq!(ktwb(&["derive", "/nonexistent/x.theory"], None).status.code(), Some(1));
    assert_eq!(ktwb(&["derive", "mechanics", "--format", "yaml"], None).status.code(), Some(1));
    assert_eq!(ktwb(&["derive", "mechanics", "--lattice", "4x5"], None).status.code(), Some(1));
    assert_eq!(ktwb(&["derive", "mechanics"], Some("abc")).status.code(), Some(1));

    // a theory named like a shipped one but with another Lagrangian misses its golden
    let wrong = scratch(
        "mechanics.theory",
        "theory mechanics\ndim 1\ncoords t @transversal t\nfield q\nbackground m constant\nfunction V\n\
         lagrangian \"m*q'^2 - V(q)\"\njetorder 1\n",
    );
    let out = ktwb(&["check", wrong.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL el/q"));

    assert_eq!(ktwb(&["check", "mechanics"], None).status.code(), Some(0));
    assert_eq!(
        ktwb(&["derive", "mechanics", "--out", "/nonexistent/dir/report.txt"], None).status.code(),
        Some(3)
    );
}
