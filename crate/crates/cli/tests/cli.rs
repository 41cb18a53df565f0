use std::path::Path;
use std::process::{Command, Output};

fn wvsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wvsim")).args(args).output().unwrap()
}

fn small_run(dir: &Path) -> Vec<String> {
    [
        "--points-per-axis=128",
        "--half-width=15",
        "--orbitals=0:5:1",
        "--dt=0.001",
        "--t-final=1",
        "--record-stride=100",
        "--spectrum-states=40",
    ]
    .iter()
    .map(|s| s.to_string())
    .chain([format!("--outputs={}", dir.display())])
    .collect()
}

fn run(sub: &str, config: &str, dir: &Path, extra: &[&str]) -> Output {
    let flags = small_run(dir);
    let mut args = vec![sub, config];
    args.extend(flags.iter().map(String::as_str));
    args.extend_from_slice(extra);
    wvsim(&args)
}

#[test]
fn config_prints_the_merged_preset() {
    let out = wvsim(&["config", "paper-n2", "--seed=9", "--orbitals=1:2:1,-3:0:0.5"]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["n_particles"], 2);
    assert_eq!(json["seed"], 9);
    assert_eq!(json["orbitals"][1]["center"], -3.0);
    assert_eq!(json["mode"], "identical");
}

#[test]
fn simulate_then_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run("simulate", "paper-n1", tmp.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("observables.csv").is_file());
    std::fs::remove_dir_all(tmp.path().join("plots")).unwrap();
    let report = wvsim(&["report", tmp.path().to_str().unwrap()]);
    assert!(report.status.success());
    assert!(tmp.path().join("plots").join("expectation.svg").is_file());
}

#[test]
fn config_files_are_accepted() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("run.json");
    std::fs::write(&file, r#"{"n_particles": 1, "orbitals": [{"center": 1, "boost": 3, "width": 1}]}"#).unwrap();
    let out = run("weakvalues", file.to_str().unwrap(), tmp.path(), &["--points=-1,0,1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(tmp.path().join("weakvalues.csv")).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 11 * 3);
}

#[test]
fn spectrum_subcommand() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run("spectrum", "paper-n1", tmp.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("spectrum.csv").is_file());
    assert!(tmp.path().join("spectrum.json").is_file());
}

#[test]
fn bad_input_is_a_usage_error() {
    for args in [
        &["simulate", "paper-n7"][..],
        &["simulate", "paper-n1", "--n-particles=2"],
        &["simulate", "paper-n1", "--points-per-axis=1000"],
        &["simulate", "paper-n1", "--mode=bosons"],
        &["simulate", "/nonexistent/config.json"],
        &["simulate"],
        &["weakvalues", "paper-n1"],
    ] {
        let out = wvsim(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn unwritable_output_is_a_run_error() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let out = run("simulate", "paper-n1", &blocker.join("sub"), &[]);
    assert_eq!(out.status.code(), Some(1));
}
