use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use multischmidt::io::{read_state, write_state};
use multischmidt::states::{ghz, psi_star, psi_star_half_variant};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multischmidt")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn temp_file(dir: &tempfile::TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

#[test]
fn random_then_canonicalize_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let state = temp_file(&dir, "state.json");
    let canon = temp_file(&dir, "canon.json");
    assert!(run(&["random", "--dims", "2,2,3", "--seed", "3", "--out", path_str(&state), "--quiet"]).status.success());
    let out = run(&["canonicalize", "--input", path_str(&state), "--out", path_str(&canon), "--quiet"]);
    assert_eq!(out.status.code(), Some(0));
    let reloaded = read_state(&canon, false).unwrap();
    assert_eq!(reloaded.dims(), &[2, 2, 3]);
    let value: Value = serde_json::from_str(&std::fs::read_to_string(&canon).unwrap()).unwrap();
    assert_eq!(value["report"]["forced_zero_count"], 5);
    assert_eq!(value["orbit_info"]["orbit_dimension"], 15);
}

#[test]
fn example_state_is_already_canonical() {
    let dir = tempfile::tempdir().unwrap();
    let state = temp_file(&dir, "psi.json");
    write_state(&state, &psi_star()).unwrap();
    let out = run(&["canonicalize", "--input", path_str(&state), "--quiet"]);
    assert_eq!(out.status.code(), Some(0));
    let value = json_of(&out);
    let canonical = multischmidt::io::state_from_value(&value["canonical"], false).unwrap();
    assert!(canonical.max_abs_diff(&psi_star()) < 1e-8);
}

#[test]
fn corrupted_file_exits_one_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let state = temp_file(&dir, "bad.json");
    std::fs::write(&state, r#"{"dims": [2, 2, 2], "amplitudes": [[1, 0], [0, 0], "x", [0, 0], [0, 0], [0, 0], [0, 0], [0, 0]]}"#).unwrap();
    let out = run(&["canonicalize", "--input", path_str(&state)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("amplitudes[2]"));
    let out = run(&["check", "--input", path_str(&temp_file(&dir, "missing.json"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn non_normalized_input_needs_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let state = temp_file(&dir, "raw.json");
    std::fs::write(&state, r#"{"dims": [2, 2, 2], "amplitudes": [[3, 0], [0, 0], [0, 0], [1, 0], [0, 0], [0, 0], [0, 0], [1, 0]]}"#).unwrap();
    assert_eq!(run(&["entropy", "--input", path_str(&state), "--quiet"]).status.code(), Some(1));
    assert_eq!(run(&["entropy", "--input", path_str(&state), "--normalize", "--quiet"]).status.code(), Some(0));
}

#[test]
fn check_reports_failure_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let state = temp_file(&dir, "variant.json");
    write_state(&state, &psi_star_half_variant()).unwrap();
    let out = run(&["check", "--input", path_str(&state), "--quiet"]);
    assert_eq!(out.status.code(), Some(2));
    let value = json_of(&out);
    assert_eq!(value["equal_dims"]["dominance"]["passed"], false);
    assert_eq!(value["cond1"]["passed"], true);
}

#[test]
fn orbit_commands() {
    let value = json_of(&run(&["orbit", "--dims", "2,2,2", "--quiet"]));
    assert_eq!(value["orbit_dimension"], 10);
    let dir = tempfile::tempdir().unwrap();
    let state = temp_file(&dir, "wide.json");
    assert!(run(&["random", "--dims", "2,2,5", "--out", path_str(&state), "--quiet"]).status.success());
    let value = json_of(&run(&["orbit", "--input", path_str(&state), "--quiet"]));
    assert_eq!(value["stabilizer_dimension"], 1);
    assert_eq!(run(&["orbit", "--dims", "3,2,2", "--quiet"]).status.code(), Some(1));
}

#[test]
fn entropy_of_ghz() {
    let dir = tempfile::tempdir().unwrap();
    let state = temp_file(&dir, "ghz.json");
    write_state(&state, &ghz(3)).unwrap();
    let value = json_of(&run(&["entropy", "--input", path_str(&state), "--quiet"]));
    assert!((value["entropy"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-12);
    let value = json_of(&run(&["entropy", "--input", path_str(&state), "--log-base", "2", "--quiet"]));
    assert!((value["entropy"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let state = temp_file(&dir, "s.json");
    assert!(run(&["random", "--dims", "2,3,3", "--seed", "9", "--out", path_str(&state), "--quiet"]).status.success());
    let a = run(&["canonicalize", "--input", path_str(&state), "--seed", "5", "--quiet"]);
    let b = run(&["canonicalize", "--input", path_str(&state), "--seed", "5", "--quiet"]);
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn bipartite_needs_the_fallback_flag() {
    let dir = tempfile::tempdir().unwrap();
    let state = temp_file(&dir, "pair.json");
    assert!(run(&["random", "--dims", "3,2", "--out", path_str(&state), "--quiet"]).status.success());
    assert_eq!(run(&["canonicalize", "--input", path_str(&state), "--quiet"]).status.code(), Some(1));
    let out = run(&["canonicalize", "--input", path_str(&state), "--bipartite-fallback", "--quiet"]);
    assert_eq!(out.status.code(), Some(0));
    let value = json_of(&out);
    assert_eq!(value["kind"], "bipartite");
    let s: Vec<f64> = value["schmidt"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(s[0] >= s[1]);
}

#[test]
fn appendix_and_brute_force() {
    let out = run(&["appendix", "--v1sq", "1", "--quiet"]);
    assert_eq!(out.status.code(), Some(0));
    let value = json_of(&out);
    assert_eq!(value["passed"], true);
    assert!((value["quadratic"]["roots"][1].as_f64().unwrap() - 0.25).abs() < 1e-12);

    let dir = tempfile::tempdir().unwrap();
    let state = temp_file(&dir, "ghz.json");
    write_state(&state, &ghz(3)).unwrap();
    let value = json_of(&run(&["brute-force", "--input", path_str(&state), "--samples", "5000", "--quiet"]));
    let brute = value["brute_force_max"].as_f64().unwrap();
    assert!((brute - 0.5f64.sqrt()).abs() < 1e-4);
    assert!((value["multistart_max"].as_f64().unwrap() - 0.5f64.sqrt()).abs() < 1e-9);
}

#[test]
fn altforms_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let state = temp_file(&dir, "psi.json");
    write_state(&state, &psi_star()).unwrap();
    let value = json_of(&run(&["altform", "--input", path_str(&state), "--quiet"]));
    assert!(value["orthogonality_error"].as_f64().unwrap() < 1e-9);
    let value = json_of(&run(&["altform", "--form", "min-entropy", "--input", path_str(&state), "--quiet"]));
    assert!(value["entropy"].as_f64().unwrap() < multischmidt::altforms::iu_entropy(&psi_star()));
    assert_eq!(run(&["altform", "--form", "schmidt", "--input", path_str(&state), "--quiet"]).status.code(), Some(1));
}
