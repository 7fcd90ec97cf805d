use super::*;

fn cfg(name: &str, sets: &[&str]) -> Result<ScenarioConfig> {
    let sets: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
    load_config(Some(name), None, &sets)
}

#[test]
fn registry_has_the_named_studies() {
    let names: Vec<&str> = list_scenarios().iter().map(|s| s.name).collect();
    for n in ["single", "fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "gscale", "pfilter"] {
        assert!(names.contains(&n), "{n}");
    }
    for s in list_scenarios() {
        let c = load_config(Some(s.name), None, &[]).unwrap();
        assert_eq!(c.scenario.as_deref(), Some(s.name));
    }
}

#[test]
fn unknown_scenario_lists_valid_names() {
    let e = cfg("fig9", &[]).unwrap_err().to_string();
    assert!(e.contains("fig9") && e.contains("fig2a") && e.contains("pfilter"), "{e}");
}

#[test]
fn empty_file_needs_a_scenario() {
    assert!(load_config(None, Some(""), &[]).is_err());
    let c = load_config(Some("fig2a"), Some("  \n"), &[]).unwrap();
    assert_eq!(c.physics, Physics::default());
    let named = load_config(None, Some(r#"{"scenario": "fig2b"}"#), &[]).unwrap();
    assert_eq!(named.study.pointer, PointerSlot::C);
}

#[test]
fn overrides_are_validated_per_field() {
    let e = cfg("fig2a", &["physics.d=-1"]).unwrap_err();
    match e {
        Error::InvalidParameter { field, .. } => assert_eq!(field, "physics.d"),
        other => panic!("{other}"),
    }
    let g0 = cfg("fig3a", &["physics.g=0"]).unwrap();
    assert_eq!(g0.physics.g, 0.0);
    assert!(cfg("fig2a", &["physics.gg=1"]).is_err());
    assert!(cfg("fig2a", &["physics"]).is_err());
    assert!(cfg("fig2a", &["physics.g.x=1"]).is_err());
    let c = cfg("fig2a", &["study.pointer=c", "numerics.scan.n=11", "seed=4"]).unwrap();
    assert_eq!((c.study.pointer, c.numerics.scan.n, c.seed), (PointerSlot::C, 11, 4));
}

#[test]
fn unknown_keys_and_syntax_errors_are_reported() {
    let e = load_config(Some("fig2a"), Some(r#"{"physics": {"x9": 1}}"#), &[]).unwrap_err().to_string();
    assert!(e.contains("x9"), "{e}");
    let e = load_config(Some("fig2a"), Some("{\n  \"seed\": 1,\n  oops\n}"), &[]).unwrap_err().to_string();
    assert!(e.contains("line 3"), "{e}");
}

#[test]
fn config_round_trips_through_json() {
    let c = cfg("pfilter", &[]).unwrap();
    let text = serde_json::to_string(&c).unwrap();
    let back = resolve(serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(c, back);
}

fn run(name: &str) -> RunManifest {
    run_scenario(&cfg(name, &[]).unwrap(), None, Exec::default()).unwrap()
}

#[test]
fn weak_value_scenarios_pass_their_checks() {
    for name in ["single", "fig2a", "fig2b", "fig2c", "pfilter"] {
        let m = run(name);
        let failed: Vec<_> = m.failed_checks().collect();
        assert!(m.passed, "{name}: {failed:?}");
        assert!(m.checks.len() >= 2);
    }
    let b = run("fig2b");
    assert!(b.checks.iter().any(|c| c.name == "propagator_form" && c.passed));
    assert_eq!(b.results["weak_value_type"], 2.0);
}

#[test]
fn outputs_are_deterministic_and_listed() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg("fig2b", &["numerics.bundle.n_samples=5"]).unwrap();
    let a = run_scenario(&c, Some(dir.path()), Exec::Parallel).unwrap();
    let b = run_scenario(&c, None, Exec::Sequential).unwrap();
    assert_eq!(a.files, b.files);
    for f in &a.files {
        let bytes = std::fs::read(dir.path().join(&f.name)).unwrap();
        assert_eq!(bytes.len() as u64, f.bytes);
    }
    let manifest: RunManifest =
        serde_json::from_slice(&std::fs::read(dir.path().join(MANIFEST_NAME)).unwrap()).unwrap();
    assert_eq!(manifest.files, a.files);
    assert_eq!(manifest.config, c);
    let other = run_scenario(&cfg("fig2b", &["numerics.bundle.n_samples=5", "seed=1"]).unwrap(), None, Exec::Sequential).unwrap();
    let bundle = |m: &RunManifest| m.files.iter().find(|f| f.name == "bundle.csv").unwrap().sha256.clone();
    assert_ne!(bundle(&a), bundle(&other));
}

#[test]
fn failing_checks_are_reported_not_raised() {
    // a filter that admits the classical momentum cannot suppress the weak value
    let c = cfg("pfilter", &["post_selection.p_sel=1.3333333333333333"]).unwrap();
    let m = run_scenario(&c, None, Exec::default()).unwrap();
    assert!(!m.passed);
    assert!(m.failed_checks().any(|c| c.name == "suppression_ratio"));
}

#[test]
fn check_margins_have_the_right_sign() {
    let ok = CheckOutcome::new("a", 0.5, Relation::Lt, 1.0);
    assert!(ok.passed && ok.margin > 0.0);
    let bad = CheckOutcome::new("b", 0.5, Relation::Ge, 1.0);
    assert!(!bad.passed && bad.margin < 0.0);
    assert!(!CheckOutcome::new("c", f64::NAN, Relation::Lt, 1.0).passed);
    assert!(CheckOutcome::flag("d", true).passed);
}
