//! End-to-end runs of the `oversmooth` binary: exit codes, artifact schemas,
//! and manifest contents.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oversmooth"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn stdout_lines(out: &Output) -> Vec<String> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| l.to_string())
        .collect()
}

#[test]
fn solve_single_alpha_reconstruction_has_small_interior_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"
problem = "exp_growth"
n = 1000

[grid]
alpha0 = 1e-4
q = 1.5
count = 1

[noise]
deltas = [0.0]
seed = 7
"#,
    );
    let out_dir = dir.path().join("artifacts");
    let out = run(&[
        "solve",
        "--config",
        &config,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    // stdout is exactly the artifact paths
    let lines = stdout_lines(&out);
    assert_eq!(lines.len(), 2);
    assert!(lines.iter().all(|l| Path::new(l).exists()));

    let csv = fs::read_to_string(out_dir.join("reconstruction.csv")).unwrap();
    let mut worst: f64 = 0.0;
    for line in csv.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let (t, x, exact) = (cols[0], cols[1], cols[2]);
        if t <= 0.9 {
            worst = worst.max((x - exact).abs());
        }
    }
    // boundary layer near t = 1 is expected; away from it the error stays low
    assert!(worst < 0.2, "interior error {worst}");
}

#[test]
fn missing_required_field_exits_one_with_field_name() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "n = 100\n");
    let out = run(&["solve", "--config", &config]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("problem"), "stderr: {stderr}");
}

#[test]
fn oracle_rule_without_exact_solution_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"
problem = "exp_growth"
n = 100

[rule]
id = "oracle"
"#,
    );
    let out = run(&[
        "select",
        "--config",
        &config,
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("exact_solution"), "stderr: {stderr}");
}

#[test]
fn infeasible_discrepancy_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"
problem = "exp_growth"
n = 100

[grid]
alpha0 = 1e-7
q = 4.0
count = 6

[rule]
id = "discrepancy"
c_dp = 1e-6

[noise]
deltas = [0.0179]
seed = 3
"#,
    );
    let out = run(&[
        "select",
        "--config",
        &config,
        "--out",
        dir.path().join("d").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("residual target unreachable"),
        "stderr: {stderr}"
    );
}

#[test]
fn select_balancing_writes_monotone_trace_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"
problem = "exp_growth"
n = 200
exact_solution = "constant_one"

[grid]
alpha0 = 1e-9
q = 4.0
count = 12

[rule]
id = "balancing_first"
c_bp = 0.1

[noise]
deltas = [0.0179]
seed = 5
"#,
    );
    let out_dir = dir.path().join("sel");
    let out = run(&[
        "select",
        "--config",
        &config,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let trace: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("selection_trace.json")).unwrap())
            .unwrap();
    assert_eq!(trace["rule"], "balancing_first");
    let alphas: Vec<f64> = trace["alphas"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!(alphas.windows(2).all(|w| w[0] < w[1]), "grid not ascending");
    assert!(!trace["trace"].as_array().unwrap().is_empty());
    let alpha_star = trace["alpha_star"].as_f64().unwrap();
    assert!(alphas
        .iter()
        .any(|&a| (a - alpha_star).abs() < 1e-18 * 1.0_f64.max(a)));
    // comparisons walk up the grid in order
    let lows: Vec<i64> = trace["trace"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["lower_index"].as_i64().unwrap())
        .collect();
    assert!(lows.windows(2).all(|w| w[1] >= w[0]));

    assert!(out_dir.join("selected_reconstruction.csv").exists());

    // manifest embeds the effective config: round-trips to the same TOML keys
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["problem"], "exp_growth");
    assert_eq!(manifest["config"]["n"], 200);
    assert_eq!(manifest["config"]["noise"]["seed"], 5);
    assert_eq!(manifest["tool"], "oversmooth");
}

#[test]
fn select_supports_the_balancing_constant_parametrization() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"
problem = "exp_growth"
n = 150

[grid]
alpha0 = 1e-9
q = 4.0
count = 12

[rule]
id = "balancing_third"
beta = 3.0
gamma = 1.0
kappa = 1.0

[noise]
deltas = [0.0179]
seed = 9
"#,
    );
    let out_dir = dir.path().join("beta");
    let out = run(&[
        "select",
        "--config",
        &config,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let trace: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("selection_trace.json")).unwrap())
            .unwrap();
    assert_eq!(trace["rule"], "balancing_third");
}

#[test]
fn reproduce_table1_schema_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"
problem = "exp_growth"
n = 120

[grid]
alpha0 = 1e-10
q = 3.0
count = 16
"#,
    );
    let out_a = dir.path().join("a");
    let run_a = run(&[
        "reproduce",
        "table1",
        "--config",
        &config,
        "--out",
        out_a.to_str().unwrap(),
    ]);
    assert!(
        run_a.status.success(),
        "{}",
        String::from_utf8_lossy(&run_a.stderr)
    );
    let table = fs::read_to_string(out_a.join("table1.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "c_bp,c_x,kappa_x,c_alpha,kappa_alpha");
    assert_eq!(lines.len(), 4, "header plus one row per default C_BP");
    assert!(out_a.join("table1_cells.csv").exists());

    // identical config and seed give byte-identical artifacts
    let out_b = dir.path().join("b");
    let run_b = run(&[
        "reproduce",
        "table1",
        "--config",
        &config,
        "--out",
        out_b.to_str().unwrap(),
    ]);
    assert!(run_b.status.success());
    assert_eq!(
        fs::read(out_a.join("table1.csv")).unwrap(),
        fs::read(out_b.join("table1.csv")).unwrap()
    );
    assert_eq!(
        fs::read(out_a.join("table1_cells.csv")).unwrap(),
        fs::read(out_b.join("table1_cells.csv")).unwrap()
    );
}

#[test]
fn reproduce_figure2_has_six_markers() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"
problem = "exp_growth"
n = 120

[grid]
alpha0 = 1e-10
q = 3.0
count = 16
"#,
    );
    let out_dir = dir.path().join("f2");
    let out = run(&[
        "reproduce",
        "figure2",
        "--config",
        &config,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(out_dir.join("figure2.csv")).unwrap();
    let markers = text.lines().filter(|l| l.starts_with("marker,")).count();
    let curves = text.lines().filter(|l| l.starts_with("curve,")).count();
    assert_eq!(markers, 6);
    assert_eq!(curves, 16);
}

#[test]
fn reproduce_figure3_writes_eight_reconstruction_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"
problem = "exp_growth"
n = 120

[grid]
alpha0 = 1e-10
q = 3.0
count = 16
"#,
    );
    let out_dir = dir.path().join("f3");
    let out = run(&[
        "reproduce",
        "figure3",
        "--config",
        &config,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let recon_files = fs::read_dir(&out_dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| {
            let name = e.file_name().to_string_lossy().into_owned();
            name.starts_with("figure3_") && name.contains("_alpha") && name.ends_with(".csv")
        })
        .count();
    assert_eq!(recon_files, 8, "4 alphas x 2 solutions");
    assert!(out_dir.join("figure3_summary.csv").exists());
}

#[test]
fn unknown_reproduce_target_exits_one() {
    let out = run(&["reproduce", "figure9"]);
    assert_eq!(out.status.code(), Some(1));
}
