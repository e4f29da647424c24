use std::f64::consts::PI;

use vlt_core::fields::read_field;
use vlt_core::harness::{evaluate, run_experiment, ExperimentConfig, Method, RunManifest, MANIFEST_FILE};
use vlt_core::{PhantomId, TransformKind};

fn small(method: Method, dir: &std::path::Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(method, dir);
    cfg.n = Some(64);
    cfg.noise = vec![0.0, 10.0];
    cfg
}

#[test]
fn experiment_writes_grids_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let m = run_experiment(&small(Method::Ltm, dir.path())).unwrap();
    assert_eq!(m.get("status"), Some("ok"));
    assert_eq!(m.get("method"), Some("ltm"));
    assert_eq!(m.get("n"), Some("64"));

    let on_disk = RunManifest::read(dir.path().join(MANIFEST_FILE)).unwrap();
    assert_eq!(on_disk, m);
    let files: Vec<(&str, &str)> = m.with_prefix("file.").collect();
    assert!(files.iter().any(|(k, _)| k.starts_with("file.original.")));
    assert!(files.iter().any(|(k, _)| k.starts_with("file.data.")));
    assert!(files.iter().any(|(k, _)| k.starts_with("file.noise10.rec.")));
    for (_, name) in files {
        assert_eq!(read_field(dir.path().join(name)).unwrap().n(), 64);
    }
    for comp in ["f11", "f12", "f22"] {
        for noise in [0.0, 10.0] {
            let e = m.error(noise, comp).unwrap();
            assert!(e.is_finite() && e >= 0.0);
        }
    }
}

#[test]
fn manifest_errors_match_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(Method::D2Phi, dir.path());
    cfg.source = Some(TransformKind::Mixed);
    cfg.angle = PI / 4.0;
    let m = run_experiment(&cfg).unwrap();
    let ev = evaluate(&cfg).unwrap();
    for noise in [0.0, 10.0] {
        let printed = m.error(noise, "phi").unwrap();
        assert!((printed - ev.error(noise, "phi").unwrap()).abs() < 1e-6);
    }
    assert!(m.error(10.0, "phi").unwrap() > m.error(0.0, "phi").unwrap());
}

#[test]
fn failed_run_records_error_status() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(Method::Ll1t, dir.path());
    cfg.angle = PI / 4.0;
    assert!(run_experiment(&cfg).is_err());
    let m = RunManifest::read(dir.path().join(MANIFEST_FILE)).unwrap();
    assert_eq!(m.get("status"), Some("error"));
    assert!(m.get("error").unwrap().contains("u1^2 != u2^2"));
}

#[test]
fn star_experiment_notes_kept_angles() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(Method::Star, dir.path());
    cfg.phantom = PhantomId::Letters;
    cfg.star_mask = true;
    let m = run_experiment(&cfg).unwrap();
    assert_eq!(m.get("star_mask"), Some("0.9"));
    let kept: usize = m.with_prefix("info.").find(|(k, _)| k.contains("kept_angles")).unwrap().1.parse().unwrap();
    assert!(kept > 150 && kept < 180);
}
