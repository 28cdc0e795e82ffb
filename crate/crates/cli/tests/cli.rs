use std::path::{Path, PathBuf};
use std::process::Command;

use platedual::config::Model;
use platedual::{run_config, ScenarioConfig, Start, VerificationReport};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_platedual"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

const SMALL_PLATE: &str = r#"{
  "name": "small", "seed": 1, "model": "plate_clamped",
  "grid": { "n": [9, 9] },
  "material": { "lambda": 1.0, "mu": 1.0, "thickness": 1.0 },
  "loads": { "p": { "constant": 0.5 } },
  "k_policy": { "policy": "auto" },
  "checks": { "weak_duality_trials": 20, "concavity_directions": 10, "j2_samples": 10, "coercivity_samples": 10 }
}"#;

fn run(args: &[&str]) -> (i32, String) {
    let out = bin().args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr))
}

#[test]
fn zero_load_plate_has_zero_gap_and_residuals() {
    let cfg = ScenarioConfig::from_json(&SMALL_PLATE.replace("0.5", "0.0"), "inline").unwrap();
    let out = run_config(&cfg, Start::Solve).unwrap();
    assert_eq!(out.exit_code(), 0);
    let d = out.report.dual.unwrap();
    assert_eq!(d.gap, 0.0);
    assert_eq!(d.residual_membrane, 0.0);
    assert_eq!(d.residual_moment, 0.0);
}

#[test]
fn solve_writes_reports_in_each_format() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", SMALL_PLATE);
    for (fmt, file) in [("json", "report.json"), ("csv", "summary.csv"), ("text", "report.txt")] {
        let out = dir.path().join(fmt);
        let (code, text) = run(&["solve", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--format", fmt]);
        assert_eq!(code, 0, "{text}");
        assert!(out.join(file).exists() && out.join("solution.json").exists());
    }
    let report = VerificationReport::from_json(&std::fs::read_to_string(dir.path().join("json/report.json")).unwrap()).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("csv/summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + report.checks.len());
    assert_eq!(report.model, Model::PlateClamped);
}

#[test]
fn verify_duality_from_stored_solution() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", SMALL_PLATE);
    let out = dir.path().join("o");
    assert_eq!(run(&["solve", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]).0, 0);
    let sol = out.join("solution.json");
    let (code, text) = run(&["verify-duality", cfg.to_str().unwrap(), "--from", sol.to_str().unwrap(), "--out", dir.path().join("v").to_str().unwrap()]);
    assert_eq!(code, 0, "{text}");
    // a snapshot from another grid is a configuration error
    let other = write(dir.path(), "o.json", &SMALL_PLATE.replace("[9, 9]", "[11, 11]"));
    let (code, _) = run(&["verify-duality", other.to_str().unwrap(), "--from", sol.to_str().unwrap(), "--out", dir.path().join("w").to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn configuration_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let no_k = write(dir.path(), "a.json", &SMALL_PLATE.replace(r#""k_policy": { "policy": "auto" },"#, ""));
    let (code, text) = run(&["solve", no_k.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(text.contains("k_policy"), "{text}");
    let broken = write(dir.path(), "b.json", "{ not json");
    assert_eq!(run(&["solve", broken.to_str().unwrap()]).0, 2);
    let no_seed = write(dir.path(), "c.json", &SMALL_PLATE.replace(r#""seed": 1,"#, ""));
    let (code, text) = run(&["solve", no_seed.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(text.contains("seed"));
    let big3d = write(
        dir.path(),
        "d.json",
        r#"{"name":"big","seed":1,"model":"elasticity3d_clamped","grid":{"n":[33,33,33]},"material":{"lambda":1,"mu":1}}"#,
    );
    assert_eq!(run(&["solve", big3d.to_str().unwrap()]).0, 2);
}

#[test]
fn solver_stall_exits_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.json", &SMALL_PLATE.replace(r#""k_policy""#, r#""solver": { "grad_tol": 1e-30 }, "k_policy""#));
    let (code, text) = run(&["solve", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap(), "--format", "text"]);
    assert_eq!(code, 3, "{text}");
    assert!(text.contains("FAIL  solver_converged"));
}

#[test]
fn failed_checks_exit_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "f.json", &SMALL_PLATE.replace(r#""k_policy""#, r#""solver": { "max_iters": 3 }, "k_policy""#));
    let (code, _) = run(&["solve", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code, 1);
}

#[test]
fn gradcheck_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run(&["gradcheck", scenario("elastic_clamped.json").to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--format", "text"]);
    assert_eq!(code, 0, "{text}");
    assert!(text.contains("PASS  gradcheck"));
}

#[test]
fn bundled_scenarios_parse() {
    for s in ["reference_plate.json", "mixed_plate.json", "elastic_clamped.json", "elastic_mixed.json"] {
        ScenarioConfig::load(&scenario(s)).unwrap();
    }
}
