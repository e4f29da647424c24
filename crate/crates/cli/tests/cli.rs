use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn vlt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vlt")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn phantom_component_to_stdout() {
    let o = vlt(&["phantom", "--phantom", "2", "--n", "16", "--component", "f12"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n=16 order=y-ascending"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 16);
    assert!(rows.iter().all(|r| r.split(',').count() == 16));
    assert!(rows.iter().any(|r| r.contains('1')));
}

#[test]
fn phantom_all_components_need_out() {
    assert_eq!(code(&vlt(&["phantom", "--n", "16"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let o = vlt(&["phantom", "--n", "16", "--out", path(dir.path())]);
    assert_eq!(code(&o), 0);
    for c in ["f11", "f12", "f22", "phi", "g1", "g2"] {
        assert!(dir.path().join(format!("phantom1_{c}.csv")).exists(), "{c}");
    }
    assert_eq!(code(&vlt(&["phantom", "--n", "16", "--component", "f33"])), 2);
}

#[test]
fn forward_vline_and_star() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path());
    let o = vlt(&["forward", "--phantom", "1", "--angle", "pi/4", "--kind", "L,M1", "--n", "24", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 2);

    let o = vlt(&["forward", "--star", "--phantom", "2", "--n", "24", "--out", out]);
    assert_eq!(code(&o), 0);
    for c in ["long", "mixed", "trans"] {
        assert!(dir.path().join(format!("star_{c}.csv")).exists());
    }
    assert_eq!(code(&vlt(&["forward", "--star", "--kind", "L", "--n", "24", "--out", out])), 2);
    assert_eq!(code(&vlt(&["forward", "--kind", "Q", "--n", "24", "--out", out])), 2);
}

#[test]
fn invert_reports_errors_and_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = vlt(&[
        "invert", "--method", "d2phi", "--kind", "M", "--n", "48", "--noise", "5", "--seed", "3", "--out",
        path(dir.path()),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("error.noise5.phi"));
    let manifest = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains("status=ok"));
    assert!(manifest.contains("seed=3"));
}

#[test]
fn precondition_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = vlt(&["invert", "--method", "ll1t", "--angle", "pi/4", "--n", "32", "--out", path(dir.path())]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("precondition"));
    assert_eq!(code(&vlt(&["invert", "--method", "nope", "--out", path(dir.path())])), 2);
    assert_eq!(code(&vlt(&["invert", "--method", "ltm", "--star", "--out", path(dir.path())])), 2);
}

#[test]
fn experiment_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, format!("command=experiment\nmethod=ltm\nn=96\nnoise=0,10\nseed=7\nout={}\n", out.display())).unwrap();
    let o = vlt(&["--config", path(&cfg), "--n", "48"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("n=48"));
    assert!(manifest.contains("error.noise10.f12="));
    assert!(manifest.lines().any(|l| l.starts_with("preview.")));
}

#[test]
fn thread_cap_is_honored_and_validated() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, sub: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_vlt"))
            .env("VLT_THREADS", threads)
            .args(["invert", "--method", "ll1m", "--angle", "pi/4", "--n", "48", "--noise", "10", "--seed", "1", "--out"])
            .arg(dir.path().join(sub))
            .output()
            .unwrap();
        (code(&o), stdout(&o))
    };
    assert_eq!(run("zero", "bad").0, 2);
    let (c1, one) = run("1", "one");
    let (c4, four) = run("4", "four");
    assert_eq!((c1, c4), (0, 0));
    let errors = |s: &str| s.lines().filter(|l| l.starts_with("error.")).map(String::from).collect::<Vec<_>>();
    assert_eq!(errors(&one), errors(&four));
}

#[test]
fn pde_selftest_prints_orders() {
    let o = vlt(&["pde-selftest", "--n", "40,80"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let text = stdout(&o);
    for kind in ["elliptic", "parabolic", "hyperbolic"] {
        assert!(text.lines().any(|l| l.starts_with(kind) && l.contains("order")), "{text}");
    }
    assert_eq!(code(&vlt(&["pde-selftest", "--n", "40"])), 2);
}
