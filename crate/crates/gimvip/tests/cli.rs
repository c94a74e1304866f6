//! End-to-end exercises of the CLI surface: exit codes, emitted files and
//! determinism.

use gimvip::shell::run_from;
use serde_json::Value;
use std::fs;
use std::path::Path;

fn run(args: &[&str]) -> u8 {
    run_from(std::iter::once("gimvip").chain(args.iter().copied()))
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn validate_example1_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let code = run(&["validate", "--builtin", "example1", "--out-dir", out]);
    assert_eq!(code, 0);
    let doc = read_json(&dir.path().join("validate_report.json"));
    assert_eq!(doc["alpha"], 0.5);
    assert!((doc["verdict"]["cond_iii_lhs"].as_f64().unwrap() - 0.75).abs() < 1e-12);
    assert_eq!(doc["Gamma"], 0.75);
    assert_eq!(doc["m"], 0.5);
}

#[test]
fn validate_with_alpha_override_fails() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(&[
        "validate",
        "--builtin",
        "example1",
        "--override-alpha",
        "10",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
}

#[test]
fn validate_missing_file_is_input_error() {
    let code = run(&["validate", "--problem", "/nonexistent/problem.json"]);
    assert_eq!(code, 2);
}

#[test]
fn validate_loads_problem_documents() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    fs::write(
        &path,
        r#"{
            "dimension": 1,
            "F": {"type": "scalar_linear", "coefficient": 0.75},
            "h": {"type": "scalar_linear", "coefficient": 0.5},
            "g": {"type": "separable_quadratic", "curvature": [1.0], "slope": [2.0], "constant": 1.0},
            "omega": {"type": "nonnegative"},
            "gamma": 1.0
        }"#,
    )
    .unwrap();
    let code = run(&[
        "validate",
        "--problem",
        path.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
}

#[test]
fn simulate_finite_respects_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let code = run(&[
        "simulate",
        "--builtin",
        "example1",
        "--regime",
        "finite",
        "--tau",
        "1",
        "--k",
        "3",
        "--w0",
        "50",
        "--settle-tol",
        "1e-8",
        "--t-max",
        "40",
        "--out-dir",
        out,
    ]);
    assert_eq!(code, 0);
    let doc = read_json(&dir.path().join("simulate_report.json"));
    assert_eq!(doc["bound_respected"], true);
    let observed = doc["observed"].as_f64().unwrap();
    let bound = doc["predicted_bound"].as_f64().unwrap();
    assert!(observed <= bound && bound <= 20.0 + 1e-9);
    assert!(dir.path().join("trajectory.csv").exists());
}

#[test]
fn simulate_predefined_with_auto_gd() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(&[
        "simulate",
        "--builtin",
        "example1",
        "--regime",
        "fixed",
        "--k3",
        "0",
        "--Td",
        "1",
        "--auto-gd",
        "--t-max",
        "2",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let doc = read_json(&dir.path().join("simulate_report.json"));
    let observed = doc["observed"].as_f64().unwrap();
    assert!(observed <= 1.0, "observed = {observed}");
    assert_eq!(doc["bound_respected"], true);
}

#[test]
fn simulate_tiny_horizon_warns_but_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(&[
        "simulate",
        "--builtin",
        "example1",
        "--t-max",
        "1e-6",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let doc = read_json(&dir.path().join("simulate_report.json"));
    assert!(doc["observed"].is_null());
    assert_eq!(doc["bound_respected"], false);
}

#[test]
fn solve_eq29_paper_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(&[
        "solve",
        "--builtin",
        "example1",
        "--method",
        "eq29",
        "--k3",
        "1",
        "--iters",
        "150",
        "--schedule",
        "paper",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let doc = read_json(&dir.path().join("solve_report.json"));
    let w = doc["final_w"][0].as_f64().unwrap();
    assert!(w.abs() <= 1e-3, "final w = {w}");
    assert!(dir.path().join("iterates.csv").exists());
}

#[test]
fn solve_alg2_k2() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(&[
        "solve",
        "--builtin",
        "example1",
        "--method",
        "alg2",
        "--k",
        "2",
        "--theta",
        "0.2",
        "--iters",
        "150",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let doc = read_json(&dir.path().join("solve_report.json"));
    let w = doc["final_w"][0].as_f64().unwrap();
    assert!(w.abs() <= 1e-2, "final w = {w}");
}

#[test]
fn solve_zero_iterations_emits_initial_state_only() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(&[
        "solve",
        "--builtin",
        "example1",
        "--method",
        "alg2",
        "--iters",
        "0",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let csv = fs::read_to_string(dir.path().join("iterates.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2); // header + w0
}

#[test]
fn solve_divergence_is_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(&[
        "solve",
        "--builtin",
        "example1",
        "--method",
        "alg2",
        "--k",
        "2",
        "--theta",
        "1e6",
        "--iters",
        "2000",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 3);
}

#[test]
fn certify_fixed_time_passes() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(&[
        "certify",
        "--builtin",
        "example1",
        "--regime",
        "fixed",
        "--k3",
        "0",
        "--t-max",
        "20",
        "--check-samples",
        "2000",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let doc = read_json(&dir.path().join("certify_report.json"));
    assert_eq!(doc["bound_respected"], true);
    let checks = doc["checks"].as_array().unwrap();
    assert!(checks.len() >= 6);
    for c in checks {
        if !c["informational"].as_bool().unwrap() {
            assert_eq!(c["pass"], true, "{c}");
        }
    }
    // the printed lower-bound variant is flagged
    let printed = checks
        .iter()
        .find(|c| c["name"] == "residual_lower_rho_minus_Lambda")
        .unwrap();
    assert_eq!(printed["informational"], true);
    assert_eq!(printed["pass"], false);
}

#[test]
fn bench_example1_is_deterministic() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [&dir_a, &dir_b] {
        let code = run(&[
            "bench",
            "example1",
            "--out-dir",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
    }
    for name in ["bench_report.json", "bench_eq29_k3_1.csv", "bench_finite_tau1_k3.csv"] {
        let a = fs::read(dir_a.path().join(name)).unwrap();
        let b = fs::read(dir_b.path().join(name)).unwrap();
        assert_eq!(a, b, "nondeterministic output: {name}");
    }
    let doc = read_json(&dir_a.path().join("bench_report.json"));
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 7);
    let k31 = rows.iter().find(|r| r["name"] == "eq29_k3_1").unwrap();
    assert_eq!(k31["paper_reported"].as_f64().unwrap(), -5.33e-5);
    assert!(k31["final_abs"].as_f64().unwrap() <= 1e-3);
    let alg2k3 = rows.iter().find(|r| r["name"] == "alg2_k3").unwrap();
    assert_eq!(alg2k3["paper_reported"].as_f64().unwrap(), 2.08);
    for r in rows.iter().filter(|r| r["kind"] == "continuous") {
        assert_eq!(r["bound_respected"], true, "{r}");
    }
}

#[test]
fn bench_unknown_name_is_input_error() {
    let code = run(&["bench", "nope"]);
    assert_eq!(code, 2);
}

#[test]
fn plot_renders_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(
        run(&[
            "simulate",
            "--builtin",
            "example1",
            "--t-max",
            "20",
            "--settle-tol",
            "1e-8",
            "--out-dir",
            out,
        ]),
        0
    );
    let csv = dir.path().join("trajectory.csv");
    let svg = dir.path().join("trajectory.svg");
    assert_eq!(
        run(&["plot", csv.to_str().unwrap(), "--out", svg.to_str().unwrap()]),
        0
    );
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg"));
    assert!(text.contains("<polyline"));
}

#[test]
fn plot_rejects_empty_and_accepts_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let out = dir.path().join("x.svg");
    assert_eq!(
        run(&["plot", empty.to_str().unwrap(), "--out", out.to_str().unwrap()]),
        2
    );
    let single = dir.path().join("single.csv");
    fs::write(&single, "t,w_0,xi_norm,V\n0.0,50.0,34.0,1250.0\n").unwrap();
    assert_eq!(
        run(&["plot", single.to_str().unwrap(), "--out", out.to_str().unwrap()]),
        0
    );
    assert!(fs::read_to_string(&out).unwrap().contains("<circle"));
}
