use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dot_admm::report::{read_curve_csv, read_sweep_csv, MEAN_TRIAL};

const SCENARIO: &str = "
[scenario]
name = cli-test
horizon = 40
trials = 3
master_seed = 4

[graph]
agents = 5
edges = 6

[costs]
model = logistic
dim = 3
samples = 8
reg = 1

[algorithm]
alpha = 0.5
rho = 2
theta = 1e-8

[channel]
link_success = 0.8
link_noise = 1e-3

[metrics]
residual = true
";

fn dot_admm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dot-admm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("scenario.cfg");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn run_writes_one_row_per_tick_and_trial_plus_mean() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SCENARIO);
    let out_dir = dir.path().join("out");
    let out = dot_admm(&["run", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("final mean error"));
    assert!(stdout.contains("empirical rate"));

    let text = fs::read_to_string(out_dir.join("curve.csv")).unwrap();
    assert!(text.starts_with("k,trial,tracking_error,consensus_error,residual,theory_bound\n"));
    let rows = read_curve_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 40 * (3 + 1));
    let mean: Vec<_> = rows.iter().filter(|r| r.trial == MEAN_TRIAL).collect();
    assert_eq!(mean.len(), 40);
    assert_eq!(mean.first().unwrap().k, 1);
    assert!(rows.iter().all(|r| r.residual.is_finite() && r.theory_bound.is_nan()));
}

#[test]
fn same_seed_gives_identical_bytes_and_seed_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SCENARIO);
    let run = |name: &str, extra: &[&str]| {
        let out_dir = dir.path().join(name);
        let mut args = vec!["run", cfg.as_str(), "--out", out_dir.to_str().unwrap()];
        args.extend_from_slice(extra);
        assert!(dot_admm(&args).status.success());
        fs::read(out_dir.join("curve.csv")).unwrap()
    };
    let a = run("a", &[]);
    let b = run("b", &[]);
    let c = run("c", &["--seed", "99"]);
    let d = run("d", &["--seed", "99"]);
    assert_eq!(a, b);
    assert_eq!(c, d);
    assert_ne!(a, c);
}

#[test]
fn missing_alpha_is_a_config_error_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SCENARIO.replace("alpha = 0.5\n", ""));
    let out = dot_admm(&["run", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("alpha"));
}

#[test]
fn unknown_key_error_names_key_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SCENARIO.replace("rho = 2", "rho = 2\nbeta = 3"));
    let out = dot_admm(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("beta") && err.contains("line 21"), "{err}");
}

#[test]
fn unreadable_config_is_a_config_error() {
    let out = dot_admm(&["run", "/definitely/not/here.cfg"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn infeasible_edge_count_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SCENARIO.replace("edges = 6", "edges = 40"));
    let out = dot_admm(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("edges"));
}

#[test]
fn unwritable_output_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SCENARIO);
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = dot_admm(&["run", &cfg, "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn delta_sweep_writes_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SCENARIO);
    let out_dir = dir.path().join("sweep");
    let out = dot_admm(&[
        "sweep",
        &cfg,
        "--axis",
        "delta",
        "--values",
        "1e-4,1e-3,1e-2,1e-1",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(String::from_utf8_lossy(&out.stdout).contains("asymptotic error along delta"));
    let text = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    assert!(text.starts_with("axis_value,asymptotic_error,mean_inner_iters\n"));
    let rows = read_sweep_csv(text.as_bytes()).unwrap();
    assert_eq!(
        rows.iter().map(|r| r.axis_value).collect::<Vec<_>>(),
        [1e-4, 1e-3, 1e-2, 1e-1]
    );
}

#[test]
fn slow_nodes_axis_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SCENARIO);
    let out = dot_admm(&[
        "sweep",
        &cfg,
        "--axis",
        "slow_nodes",
        "--values",
        "0,2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn bad_sweep_arguments_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SCENARIO);
    for (axis, values) in [
        ("delta", ""),
        ("delta", "1e-3,,1e-2"),
        ("slow_nodes", "1.5"),
        ("gamma", "1"),
    ] {
        let out = dot_admm(&["sweep", &cfg, "--axis", axis, "--values", values]);
        assert_eq!(
            out.status.code(),
            Some(2),
            "axis {axis} values {values:?}: {}",
            stderr(&out)
        );
    }
}

#[test]
fn validate_passes() {
    let out = dot_admm(&["validate"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().count() >= 9);
    assert!(!stdout.contains("FAIL"));
}
