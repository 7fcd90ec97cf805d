use std::path::Path;
use std::process::{Command, Output};

fn weaktraj(args: &[&str], out_env: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_weaktraj"));
    cmd.args(args).env_remove("WEAKTRAJ_OUT");
    if let Some(dir) = out_env {
        cmd.env("WEAKTRAJ_OUT", dir);
    }
    cmd.output().unwrap()
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

#[test]
fn list_names_every_scenario() {
    let o = weaktraj(&["list"], None);
    assert_eq!(o.status.code(), Some(0));
    let s = text(&o.stdout);
    for n in ["single", "fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "gscale", "pfilter"] {
        assert!(s.lines().any(|l| l.starts_with(n)), "{n} missing from\n{s}");
    }
}

#[test]
fn run_writes_outputs_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let o = weaktraj(&["run", "--scenario", "fig2a", "--out", out], None);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let dir = tmp.path().join("fig2a");
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["passed"], true);
    let files = manifest["files"].as_array().unwrap();
    let names: Vec<&str> = files.iter().map(|f| f["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["scan.csv", "bundle.csv"]);
    for n in names {
        assert!(dir.join(n).is_file());
    }
    let scan = std::fs::read_to_string(dir.join("scan.csv")).unwrap();
    assert!(scan.lines().any(|l| l == "w,t_w,re_A,im_A,abs_A,type,shift_prediction"));
}

#[test]
fn output_root_comes_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = weaktraj(&["run", "--scenario", "single"], Some(tmp.path()));
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    assert!(tmp.path().join("single/manifest.json").is_file());
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = weaktraj(
            &["run", "--scenario", "fig2b", "--seed", "7", "--out", d.path().to_str().unwrap()],
            None,
        );
        assert_eq!(o.status.code(), Some(0));
    }
    for f in ["scan.csv", "bundle.csv"] {
        let x = std::fs::read(a.path().join("fig2b").join(f)).unwrap();
        let y = std::fs::read(b.path().join("fig2b").join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
}

#[test]
fn usage_errors_exit_with_one() {
    let o = weaktraj(&["check", "--scenario", "nope"], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains("fig3a"));
    let o = weaktraj(&["check", "--scenario", "fig2a", "--set", "physics.d=-1"], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains("physics.d"));
    let o = weaktraj(&["check"], None);
    assert_eq!(o.status.code(), Some(1));
    let o = weaktraj(&["check", "--scenario", "fig2a", "--config", "/nonexistent/cfg.json"], None);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn failed_physics_checks_exit_with_two() {
    let o = weaktraj(
        &["check", "--scenario", "pfilter", "--set", "post_selection.p_sel=1.3333333333333333"],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stdout).contains("FAIL suppression_ratio"));
}

#[test]
fn config_file_supplies_scenario_and_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("cfg.json");
    std::fs::write(&path, r#"{"scenario": "fig2c", "numerics": {"bundle": {"n_samples": 3}}}"#).unwrap();
    let o = weaktraj(&["check", "--config", path.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    assert!(text(&o.stdout).contains("PASS classified_type3"));
    assert!(std::fs::read_dir(tmp.path()).unwrap().count() == 1, "check must not write outputs");
}
