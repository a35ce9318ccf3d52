//! End-to-end tests of the binary: exit-code contract, artifact layout,
//! and byte-identical determinism given a seed.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sojourn(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sojourn"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).expect("config written");
    path.display().to_string()
}

const DELAY_CONFIG: &str = r#"
experiment = "friedrichs_time_delay"
seed = 7

[grid]
n_points = 2048
x_min = -32.0
x_max = 32.0

[[model]]
kind = "lorentzian"
coupling = 1.0

[state]
center = 0.0
width = 2.0
momentum = 0.0

[localization]
kind = "plateau_bump"
plateau_radius = 1.0
decay_scale = 1.0

[sojourn]
r_schedule = [4.0, 8.0, 12.0, 16.0]
t_cutoff_factor = 4.0
dt = 0.02
"#;

#[test]
fn reference_run_passes_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "delay.toml", DELAY_CONFIG);
    let out = sojourn(&["run", &config, "--out-dir", "out"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("out/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], serde_json::Value::Bool(true));
    assert_eq!(summary["experiment"], "friedrichs_time_delay");
    assert!(summary["details"]["relative_gap"].as_f64().unwrap() <= 0.05);

    let csv = fs::read_to_string(dir.path().join("out/results.csv")).unwrap();
    assert!(csv.starts_with("# schema: sojourn-cli/friedrichs_time_delay v1"));
    assert!(csv.lines().nth(1).unwrap().starts_with("r,t0_r,t0_r_s,t_r,tau_r"));
    // header comment + column row + one row per radius
    assert_eq!(csv.lines().count(), 2 + 4);

    let svg = fs::read_to_string(dir.path().join("out/convergence.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("Eisenbud-Wigner"));
}

#[test]
fn identical_config_and_seed_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "delay.toml", DELAY_CONFIG);
    for out_dir in ["a", "b"] {
        let out = sojourn(&["run", &config, "--out-dir", out_dir], dir.path());
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for file in ["results.csv", "summary.json"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
}

#[test]
fn seeded_sampling_is_reproducible_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "loc.toml",
        r#"
experiment = "localization_properties"
seed = 3

[localization]
kind = "plateau_bump"
plateau_radius = 1.0
decay_scale = 1.0

[properties]
samples = 5
max_dim = 2
"#,
    );
    for (out_dir, seed) in [("a", "3"), ("b", "3"), ("c", "4")] {
        let out = sojourn(&["run", &config, "--out-dir", out_dir, "--seed", seed], dir.path());
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = fs::read(dir.path().join("a/results.csv")).unwrap();
    let b = fs::read(dir.path().join("b/results.csv")).unwrap();
    let c = fs::read(dir.path().join("c/results.csv")).unwrap();
    assert_eq!(a, b, "same seed must reproduce the same samples");
    assert_ne!(a, c, "a different seed must draw different samples");
}

#[test]
fn schema_violations_exit_2_with_the_field_path() {
    let dir = tempfile::tempdir().unwrap();

    let bad_type = write_config(
        dir.path(),
        "bad_type.toml",
        "experiment = \"friedrichs_time_delay\"\n[sojourn]\nr_schedule = [4.0]\ndt = \"fast\"\n",
    );
    let out = sojourn(&["validate", &bad_type], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sojourn.dt"));

    let missing = write_config(
        dir.path(),
        "missing.toml",
        "experiment = \"friedrichs_time_delay\"\n",
    );
    let out = sojourn(&["run", &missing], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid"));
}

#[test]
fn kappa_window_violation_is_diagnosed() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "kappa.toml",
        r#"
experiment = "integral_formula"
dispersion = "schroedinger"

[grid]
n_points = 1024
x_min = -32.0
x_max = 32.0

[state]
center = 0.0
width = 2.0
momentum = 0.0

[localization]
kind = "plateau_bump"
plateau_radius = 1.0
decay_scale = 1.0

[sojourn]
r_schedule = [4.0]
"#,
    );
    let out = sojourn(&["validate", &config], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("state.momentum"), "{stderr}");
    assert!(stderr.contains("critical point"), "{stderr}");
}

#[test]
fn non_convergence_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // a single radius cannot support the power-law extrapolation, and the
    // short cutoff starves the sojourn window; either path must exit 3
    let config = write_config(
        dir.path(),
        "short.toml",
        r#"
experiment = "friedrichs_time_delay"

[grid]
n_points = 2048
x_min = -32.0
x_max = 32.0

[[model]]
kind = "lorentzian"
coupling = 1.0

[state]
center = 0.0
width = 2.0
momentum = 0.0

[localization]
kind = "plateau_bump"
plateau_radius = 1.0
decay_scale = 1.0

[sojourn]
r_schedule = [4.0]
t_cutoff_factor = 0.5
dt = 0.02
"#,
    );
    let out = sojourn(&["run", &config], dir.path());
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("did not converge"));
}

#[test]
fn validate_echoes_the_normalized_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "delay.toml", DELAY_CONFIG);
    let out = sojourn(&["validate", &config], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.trim_end().ends_with("ok"));
    // defaults not present in the input appear in the normalized echo
    assert!(stdout.contains("quad_tol"));
    assert!(stdout.contains("extrapolation = \"power_fit\""));
}
