use std::path::Path;
use std::process::{Command, Output};

fn cutdg(args: &[&str], env: Option<(&str, &Path)>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cutdg"));
    cmd.args(args).env_remove("CUTDG_OUTPUT_DIR");
    if let Some((k, v)) = env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const SMALL: &str = "[problem]\nname = \"advection_nonsmooth\"\nt_end = 0.1\n[mesh]\nn = 20\n[scheme]\ndegree = 1\n";

#[test]
fn run_writes_the_three_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out_dir = tmp.path().join("out");
    let out = cutdg(&["run", &cfg, "-o", out_dir.to_str().unwrap()], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["solution.csv", "diagnostics.csv", "report.json"] {
        assert!(out_dir.join(f).is_file(), "missing {f}");
    }
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["problem"], "advection_nonsmooth");
    assert!(String::from_utf8_lossy(&out.stdout).contains("range ["));
}

#[test]
fn output_directory_comes_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let env_dir = tmp.path().join("env");
    let out = cutdg(&["run", &cfg], Some(("CUTDG_OUTPUT_DIR", &env_dir)));
    assert!(out.status.success());
    assert!(env_dir.join("solution.csv").is_file());
}

#[test]
fn converge_writes_a_table() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = cutdg(&["converge", &cfg, "--levels", "10,20,40", "-o", tmp.path().to_str().unwrap()], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("convergence.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn bad_configs_exit_with_code_2() {
    let tmp = tempfile::tempdir().unwrap();
    for body in ["[problem]\nname = \"no_such_problem\"\n", "[problem]\nname = \"sod\"\ncolour = 1\n", "[mesh]\nn = \"many\"\n"]
    {
        let cfg = write_config(tmp.path(), body);
        let out = cutdg(&["run", &cfg], Some(("CUTDG_OUTPUT_DIR", tmp.path())));
        assert_eq!(out.status.code(), Some(2), "{body}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn verify_reports_each_check() {
    let out = cutdg(&["verify", "quadrature", "--json"], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().count() > 0);
    for line in stdout.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["passed"], true);
    }
}

#[test]
fn reproduce_list_names_every_id() {
    let out = cutdg(&["reproduce", "list"], None);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    for id in cutdg_cli::reproduce::IDS {
        assert!(stdout.contains(id), "{id}");
    }
}

#[test]
fn unknown_reproduction_is_rejected() {
    let out = cutdg(&["reproduce", "nothing-here"], None);
    assert!(!out.status.success());
}
