//! Snapshot tests over the problem files in `tests/golden`.
//!
//! Set `SKEWFORMS_BLESS=1` to rewrite the expected outputs.

use std::path::{Path, PathBuf};
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_skewforms");

/// (snapshot name, arguments, expected exit code)
const RUNS: &[(&str, &[&str], i32)] = &[
    ("closed_exact", &["closed", "exact_1form.json"], 0),
    ("closed_inline", &["closed", "--chart", "x,y", "--form", "y dx + x dy"], 0),
    ("closed_x_dy", &["closed", "x_dy.json"], 1),
    ("d_beta", &["d", "exact_1form.json", "--form", "beta"], 0),
    ("d_inline_text", &["--text", "d", "--chart", "x,y,z", "--form", "x*y*z dx + sin(y) dz"], 0),
    ("wedge", &["wedge", "exact_1form.json", "--with", "dx"], 0),
    ("analyze_x_dy", &["analyze", "x_dy.json"], 1),
    ("analyze_thermodynamics", &["analyze", "thermodynamics_form.json"], 1),
    ("analyze_plain", &["analyze", "connections.json", "--relation", "plain"], 0),
    ("analyze_torsion", &["analyze", "connections.json", "--relation", "with_torsion"], 1),
    ("commutator_sphere", &["commutator", "sphere.json", "--connection", "round"], 0),
    ("commutator_flat", &["commutator", "connections.json", "--connection", "flat"], 0),
    ("factor_thermodynamics", &["factor", "thermodynamics_form.json"], 0),
    ("factor_homogeneous", &["factor", "homogeneous.json"], 0),
    ("factor_homogeneous_second", &["factor", "homogeneous.json", "--ansatz", "second"], 0),
    ("factor_none", &["factor", "--chart", "x,y", "--form", "y dx + x^2*y^2 dy"], 1),
    ("restrict_line", &["restrict", "pseudostructures.json", "--pseudostructure", "line"], 0),
    ("restrict_plane", &["restrict", "pseudostructures.json", "--pseudostructure", "plane_z0"], 1),
    ("restrict_slanted_text", &["--text", "restrict", "pseudostructures.json", "--pseudostructure", "slanted"], 0),
    (
        "restrict_chain",
        &["restrict", "chain.json", "--pseudostructure", "surface", "--pseudostructure", "curve"],
        0,
    ),
    ("characteristics_harmonic", &["characteristics", "harmonic.json"], 0),
    ("characteristics_focusing", &["characteristics", "focusing.json", "--jobs", "3"], 0),
    ("characteristics_strip_text", &["--text", "characteristics", "strip.json"], 0),
    ("case_thermodynamics", &["case", "case_thermodynamics.json"], 0),
    ("case_thermodynamics_builtin", &["--text", "case", "--id", "thermodynamics"], 0),
    ("case_gas_potential", &["case", "case_gas_potential.json"], 0),
    ("case_gas_vorticity", &["case", "case_gas_vorticity.json"], 0),
    ("case_gas_force", &["case", "case_gas_force.json"], 0),
    ("case_gas_unsteady", &["case", "case_gas_unsteady.json"], 0),
    ("case_electromagnetic", &["case", "case_electromagnetic.json"], 0),
    ("case_hamilton_jacobi", &["case", "case_hamilton_jacobi.json"], 0),
    ("validate_connections", &["validate", "connections.json"], 0),
];

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(BIN)
        .args(args)
        .current_dir(golden_dir())
        .env_remove("SKEWFORMS_CONFIG")
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).expect("utf-8 stdout"),
        String::from_utf8(out.stderr).expect("utf-8 stderr"),
    )
}

fn files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    v.sort();
    v
}

#[test]
fn snapshots() {
    let bless = std::env::var_os("SKEWFORMS_BLESS").is_some();
    let expected_dir = golden_dir().join("expected");
    let mut failures = Vec::new();
    for (name, args, code) in RUNS {
        let (got, stdout, stderr) = run(args);
        if got != *code {
            failures.push(format!("{name}: exit {got}, expected {code}; stderr: {stderr}"));
            continue;
        }
        let path = expected_dir.join(format!("{name}.out"));
        if bless {
            std::fs::create_dir_all(&expected_dir).unwrap();
            std::fs::write(&path, &stdout).unwrap();
        } else {
            match std::fs::read_to_string(&path) {
                Ok(want) if want == stdout => {}
                Ok(_) => failures.push(format!("{name}: output differs from {}", path.display())),
                Err(e) => failures.push(format!("{name}: {e}")),
            }
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn runs_are_byte_identical() {
    for (name, args, _) in RUNS {
        let a = run(args);
        let b = run(args);
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn jobs_do_not_change_output() {
    let one = run(&["characteristics", "focusing.json", "--jobs", "1"]);
    let four = run(&["characteristics", "focusing.json", "--jobs", "4"]);
    assert_eq!(one, four);
}

#[test]
fn validate_accepts_corpus_and_rejects_malformed() {
    for path in files(&golden_dir()) {
        let p = path.to_str().unwrap();
        let (code, _, stderr) = run(&["validate", p]);
        assert_eq!(code, 0, "{p}: {stderr}");
    }
    let malformed = files(&golden_dir().join("malformed"));
    assert!(malformed.len() >= 10);
    for path in malformed {
        let p = path.to_str().unwrap();
        let (code, stdout, stderr) = run(&["validate", p]);
        assert_eq!(code, 2, "{p} was accepted");
        assert!(stdout.is_empty());
        assert!(stderr.starts_with("error: "), "{p}: {stderr}");
    }
}

#[test]
fn every_accepted_run_input_validates() {
    for (name, args, _) in RUNS {
        if let Some(file) = args.iter().find(|a| a.ends_with(".json")) {
            let (code, _, stderr) = run(&["validate", file]);
            assert_eq!(code, 0, "{name}: {stderr}");
        }
    }
}

#[test]
fn malformed_inputs_fail_other_subcommands_too() {
    for (file, cmd) in [
        ("malformed/truncated.json", "closed"),
        ("malformed/wrong_schema.json", "d"),
        ("malformed/mixed_degree.json", "analyze"),
        ("malformed/dangling_connection.json", "analyze"),
        ("malformed/fan_length.json", "characteristics"),
        ("malformed/unknown_case.json", "case"),
    ] {
        let (code, stdout, _) = run(&[cmd, file]);
        assert_eq!(code, 2, "{cmd} {file}");
        assert!(stdout.is_empty());
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["closed"]).0, 2);
    assert_eq!(run(&["closed", "--chart", "x,y", "--form", "x dz"]).0, 2);
    assert_eq!(run(&["closed", "missing-file.json"]).0, 2);
    assert_eq!(run(&["--tol", "-1", "closed", "exact_1form.json"]).0, 2);
}

#[test]
fn config_file_supplies_defaults() {
    let dir = std::env::temp_dir().join(format!("skewforms-config-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let config = dir.join("config.json");
    std::fs::write(&config, r#"{ "dt": 0.02, "steps": 10 }"#).unwrap();
    let with = |extra: &[&str]| {
        let out = Command::new(BIN)
            .args(["characteristics", "harmonic.json"])
            .args(extra)
            .current_dir(golden_dir())
            .env("SKEWFORMS_CONFIG", &config)
            .output()
            .unwrap();
        serde_json::from_slice::<serde_json::Value>(&out.stdout).unwrap()
    };
    let v = with(&[]);
    assert_eq!(v["options"]["steps"], 100, "problem file beats config");
    let v = with(&["--steps", "7"]);
    assert_eq!(v["options"]["steps"], 7, "flag beats problem file");

    std::fs::write(&config, r#"{ "seed": 5, "verbose": true }"#).unwrap();
    let out = Command::new(BIN)
        .args(["closed", "exact_1form.json"])
        .current_dir(golden_dir())
        .env("SKEWFORMS_CONFIG", &config)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn csv_export() {
    let path = std::env::temp_dir().join(format!("skewforms-fan-{}.csv", std::process::id()));
    let p = path.to_str().unwrap();
    let (code, _, stderr) = run(&["characteristics", "focusing.json", "--csv", p, "--thin", "50"]);
    assert_eq!(code, 0, "{stderr}");
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("trajectory,parameter,t,x,p,u,diagnostic"));
    // 9 trajectories, samples 0, 50, 100, 150
    assert_eq!(lines.count(), 9 * 4);
    std::fs::remove_file(&path).ok();
}
