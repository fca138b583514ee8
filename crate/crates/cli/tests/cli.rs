use std::path::Path;
use std::process::{Command, Output};

fn varilab(args: &[&str], env_root: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_varilab"));
    cmd.args(args).env_remove("VARILAB_OUTPUT_ROOT");
    if let Some(root) = env_root {
        cmd.env("VARILAB_OUTPUT_ROOT", root);
    }
    cmd.output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const AXIOMS: &str = "scenario = \"axiom-check\"\n[solver]\nsamples = 300\n";

#[test]
fn list_names_the_catalog() {
    let o = varilab(&["list"], None);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("two-circles ")));
    assert_eq!(text.lines().count(), varilab::scenarios::catalog::names().len());
}

#[test]
fn negative_depth_is_reported_with_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "scenario = \"flat-halfplane\"\n\n[discretization]\ndepth = -3\n");
    let o = varilab(&["validate", &cfg], None);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("bad.toml:4: discretization.depth:"), "{err}");
}

#[test]
fn emitted_defaults_validate_clean() {
    let dir = tempfile::tempdir().unwrap();
    for name in varilab::scenarios::catalog::names() {
        let o = varilab(&["emit-default", name], None);
        assert!(o.status.success());
        let cfg = write(dir.path(), &format!("{name}.toml"), &String::from_utf8(o.stdout).unwrap());
        let v = varilab(&["validate", &cfg], None);
        assert!(v.status.success(), "{name}: {}", stderr(&v));
    }
    assert_eq!(varilab(&["emit-default", "no-such-thing"], None).status.code(), Some(2));
}

#[test]
fn unreadable_config_is_a_usage_error() {
    let o = varilab(&["run", "/nonexistent/cfg.toml"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cannot read"));
}

#[test]
fn depth_flag_is_range_checked() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "scenario = \"flat-halfplane\"\n");
    let o = varilab(&["run", &cfg, "--depth", "-1", "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("discretization.depth"));
    let cfg = write(dir.path(), "d.toml", AXIOMS);
    let o = varilab(&["run", &cfg, "--depth", "3"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.toml", AXIOMS);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = varilab(&["run", &cfg, "--quiet", "--out", out.to_str().unwrap()], None);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(o.stdout.is_empty());
    }
    let csv = |d: &Path| std::fs::read(d.join("axioms.csv")).unwrap();
    assert_eq!(csv(&a), csv(&b));
    let o = varilab(&["run", &cfg, "--seed", "5", "--out", b.to_str().unwrap()], None);
    assert!(o.status.success());
    assert_ne!(csv(&a), csv(&b));
    let summary = std::fs::read_to_string(b.join("summary.json")).unwrap();
    assert!(summary.contains("\"seed\": 5"));
}

#[test]
fn output_root_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.toml", AXIOMS);
    let root = dir.path().join("root");
    let o = varilab(&["run", &cfg, "--quiet"], Some(&root));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(root.join("axiom-check").join("summary.json").is_file());
}

#[test]
fn failed_criteria_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    // far too coarse for Allard's identity to hold to 1e-3
    let cfg = write(dir.path(), "c.toml", "scenario = \"tilted-cone\"\n[discretization]\ndepth = 2\n");
    let o = varilab(&["run", &cfg, "--out", dir.path().join("o").to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL allard"));
}

#[test]
fn numerical_failure_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "scenario = \"two-circles\"\n[discretization]\nh = 0.1\ndepth = 0\n\
         [discretization.density_grid]\nmin = 5.0\nmax = 9.0\npoints = 4\nspacing = \"log\"\n",
    );
    let out = dir.path().join("o");
    let o = varilab(&["run", &cfg, "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(3));
    assert!(out.join("summary.json").is_file());
}
