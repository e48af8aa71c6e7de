//! End-to-end checks of the binary: exit-code discipline, subcommand
//! round trips, and the strictness of config parsing.

use std::path::PathBuf;
use std::process::{Command, Output};

fn dnlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dnlab"))
}

fn run(args: &[&str]) -> Output {
    dnlab().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("experiment"));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();

    let out = run(&["experiment", "run", "/definitely/not/here.json"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("config error"));

    let bad_kind = dir.path().join("kind.json");
    std::fs::write(&bad_kind, r#"{"kind":"frequency"}"#).unwrap();
    let out = run(&["experiment", "run", bad_kind.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("unknown experiment kind"));

    let bad_eps = dir.path().join("eps.json");
    std::fs::write(
        &bad_eps,
        r#"{"kind":"instability","base":{"surface":"disk","boundary_nodes":64},
            "site_a":[0.3,0.0],"site_b":[-0.3,0.0],"cyl_len":0.5,"eps":[0.05,0.1]}"#,
    )
    .unwrap();
    let out = run(&["experiment", "run", bad_eps.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("strictly decreasing"));

    let unknown_field = dir.path().join("extra.json");
    std::fs::write(
        &unknown_field,
        r#"{"kind":"genus","surfaces":[{"surface":"disk","boundary_nodes":64}],"bogus":1}"#,
    )
    .unwrap();
    let out = run(&["experiment", "run", unknown_field.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("bogus"));
}

#[test]
fn mesh_dn_genus_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let disk = dir.path().join("disk.surf");
    let dn_csv = dir.path().join("disk-dn.csv");

    let out = run(&[
        "mesh",
        "build",
        "--surface",
        "disk",
        "--boundary-nodes",
        "64",
        "--rings",
        "16",
        "--out",
        disk.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("genus 0"));

    let out = run(&[
        "dn",
        "compute",
        "--mesh",
        disk.to_str().unwrap(),
        "--out",
        dn_csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = std::fs::read_to_string(&dn_csv).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("N=64 L="), "header {header:?}");
    assert_eq!(csv.lines().count(), 65, "header plus one row per node");

    let out = run(&["genus", "--mesh", disk.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).starts_with("genus 0"));

    let torus = dir.path().join("torus.surf");
    let out = run(&[
        "mesh",
        "build",
        "--surface",
        "torus-with-hole",
        "--boundary-nodes",
        "64",
        "--out",
        torus.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = run(&["genus", "--mesh", torus.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).starts_with("genus 1"));

    // An unreachable gap demand is a scientific failure, not a config error.
    let out = run(&[
        "genus",
        "--mesh",
        torus.to_str().unwrap(),
        "--gap-factor",
        "1e9",
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("singular profile head"));
}

#[test]
fn single_member_instability_passes_and_renders() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("one.json");
    std::fs::write(
        &cfg,
        r#"{
          "kind": "instability",
          "base": {"surface": "disk", "boundary_nodes": 128, "rings": 32, "radius": 2.0},
          "site_a": [0.7, 0.0],
          "site_b": [-0.7, 0.0],
          "cyl_len": 0.5,
          "eps": [0.15]
        }"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "experiment",
        "run",
        cfg.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let report = out_dir.join("report.json");
    let json = std::fs::read_to_string(&report).unwrap();
    assert!(json.contains("\"pass\": true"));
    let csv = std::fs::read_to_string(out_dir.join("instability.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2, "header plus the single member");
    assert!(csv.starts_with("eps,d_eps,b_eps,genus_eps"));

    let out = run(&["report", "render", report.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("result: pass"));
}

#[test]
fn failed_verdicts_exit_one_but_still_write_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.json");
    // A symmetry tolerance below machine precision forces failing verdicts
    // while the run itself completes.
    std::fs::write(
        &cfg,
        r#"{
          "kind": "double-symmetry",
          "base": {"surface": "torus-with-hole", "boundary_nodes": 64, "hole_radius": 0.25},
          "tolerances": {"gap_factor": 10.0, "solver": 1e-18}
        }"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "experiment",
        "run",
        cfg.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    let json = std::fs::read_to_string(out_dir.join("report.json")).unwrap();
    assert!(json.contains("\"pass\": false"));
}

#[test]
fn shipped_sample_config_runs_clean() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs_dir().join("double-symmetry.json");
    let out = run(&[
        "experiment",
        "run",
        cfg.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("result: pass"));
}
