//! End-to-end checks of the binary: verbs, exit codes, file outputs and
//! byte determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bipolar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bipolar"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_small_config(dir: &Path, extra: &str) -> std::path::PathBuf {
    let text = format!(
        r#"
[grid]
x_left = -20.0
x_right = 20.0
n_points = 128

[packet]
gamma = 0.5
x0 = -4.0
p0 = 2.0
mass = 1.0

[potential]
kind = "eckart"
v0 = 1.0
alpha = 1.0

[time]
dt = 0.001
t_max = 0.5
snapshot_count = 3

[oracle]
enabled = true
dt_divisor = 4
{extra}
"#
    );
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn list_presets_names_every_benchmark() {
    let out = bipolar(&["list-presets"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for name in [
        "eckart-proton",
        "eckart-electron",
        "barrier-ramp-spliced",
        "barrier-ramp-left",
        "two-surface",
        "free-particle",
    ] {
        assert!(text.contains(name), "missing preset {name} in:\n{text}");
    }
}

#[test]
fn run_writes_deterministic_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_small_config(tmp.path(), "");
    let config = config.to_str().unwrap();

    let out1 = bipolar(&["run", "--config", config, "--output", tmp.path().join("a").to_str().unwrap()]);
    assert!(out1.status.success(), "{}", String::from_utf8_lossy(&out1.stderr));
    let out2 = bipolar(&["run", "--config", config, "--output", tmp.path().join("b").to_str().unwrap()]);
    assert!(out2.status.success());

    for name in [
        "config.toml",
        "summary.json",
        "snapshots/snapshot_0000.csv",
        "snapshots/snapshot_0002.csv",
    ] {
        let a = fs::read(tmp.path().join("a").join(name)).unwrap();
        let b = fs::read(tmp.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} not byte-identical across identical runs");
    }

    // summary is valid JSON carrying the config echo and oracle result
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("a/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["grid"]["n_points"], 128);
    assert!(summary["summary"]["oracle_max_abs_diff"].is_number());
    assert_eq!(summary["summary"]["schedule"]["steps"], 500);
}

#[test]
fn expanded_preset_config_reruns_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let a_dir = tmp.path().join("a");
    let b_dir = tmp.path().join("b");
    let out = bipolar(&[
        "run",
        "--preset",
        "free-particle",
        "--set",
        "time.t_max=2.0",
        "--set",
        "time.snapshot_count=2",
        "--output",
        a_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // rerun from the emitted expanded config
    let out = bipolar(&[
        "run",
        "--config",
        a_dir.join("config.toml").to_str().unwrap(),
        "--output",
        b_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(
        fs::read(a_dir.join("summary.json")).unwrap(),
        fs::read(b_dir.join("summary.json")).unwrap()
    );
}

#[test]
fn validate_reports_admissibility_finding() {
    let out = bipolar(&["validate", "--preset", "eckart-proton"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("no findings"));

    let out = bipolar(&[
        "validate",
        "--preset",
        "eckart-proton",
        "--set",
        "packet.p0=0.0",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("admissibility"), "{text}");

    let out = bipolar(&[
        "validate",
        "--preset",
        "eckart-proton",
        "--set",
        "packet.x0=-34.8",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("edge-clearance"));
}

#[test]
fn invalid_configs_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    // malformed grid
    let out = bipolar(&[
        "run",
        "--preset",
        "free-particle",
        "--set",
        "grid.n_points=3",
    ]);
    assert_eq!(out.status.code(), Some(2));

    // unknown field
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "[grd]\nx_left=-1\n").unwrap();
    let out = bipolar(&["run", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    // neither preset nor config
    let out = bipolar(&["run"]);
    assert_eq!(out.status.code(), Some(2));

    // unknown preset
    let out = bipolar(&["run", "--preset", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn instability_aborts_with_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_small_config(
        tmp.path(),
        "",
    );
    let out = bipolar(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--oracle",
        "off",
        "--set",
        "time.dt=0.5",
        "--set",
        "time.t_max=400",
        "--set",
        "packet.mass=0.001",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn failed_assert_exits_4_only_with_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_small_config(
        tmp.path(),
        "[[asserts]]\ncheck = \"rt-sum\"\nmin = 5.0\nmax = 6.0\n",
    );
    let config = config.to_str().unwrap();
    let out = bipolar(&["run", "--config", config, "--oracle", "off"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("FAIL"));

    let out = bipolar(&["run", "--config", config, "--oracle", "off", "--assert"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn oracle_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_small_config(tmp.path(), "");
    let out = bipolar(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--oracle",
        "off",
    ]);
    assert!(out.status.success());
    assert!(!stdout(&out).contains("oracle max"));
}
