use qfound_core::suites::{self, Config, Context, Suite};

#[test]
fn every_suite_passes_at_defaults() {
    let cfg = Config::default();
    for suite in Suite::SINGLE {
        let report = suites::run(suite, &cfg, &Context::default()).unwrap();
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.pass).map(|c| c.id.as_str()).collect();
        assert!(failed.is_empty(), "{suite}: {failed:?}");
        assert!(report.checks.iter().all(|c| c.id.starts_with(suite.name())));
    }
}

#[test]
fn reports_are_reproducible_and_seeded() {
    let cfg = Config::from_json(r#"{"bell": {"n_samples": 20000}}"#).unwrap();
    let run = |seed| suites::run(Suite::Bell, &cfg, &Context { seed, tolerance_scale: 1.0 }).unwrap().to_json();
    assert_eq!(run(3), run(3));
    assert_ne!(run(3), run(4));
}

#[test]
fn tolerance_scale_multiplies_tolerances() {
    let cfg = Config::default();
    let base = suites::run(Suite::Charge, &cfg, &Context::default()).unwrap();
    let loose = suites::run(Suite::Charge, &cfg, &Context { seed: 1, tolerance_scale: 10.0 }).unwrap();
    let central = |r: &qfound_core::report::SuiteReport| r.check("charge.central").unwrap().tolerance.unwrap();
    assert!((central(&loose) / central(&base) - 10.0).abs() < 1e-12);
    assert!(suites::run(Suite::Charge, &cfg, &Context { seed: 1, tolerance_scale: 0.0 }).is_err());
}

#[test]
fn malformed_sections_are_rejected() {
    let cfg = Config::from_json(r#"{"epr": {"pair": {"width": -1}}}"#).unwrap();
    assert_eq!(cfg.epr.pair.n_sites, 256);
    assert!(suites::run(Suite::Epr, &cfg, &Context::default()).is_err());
    assert!(Config::from_json(r#"{"bell": {"angles": [0, 1]}}"#).is_err());
    assert!(Config::from_json(r#"{"dynamics": {"t_final": "long"}}"#).is_err());
}
