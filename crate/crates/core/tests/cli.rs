use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("conic-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(command: &str, config: &Path, out: &Path) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_conic"))
        .args([command, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    (o.status.code().unwrap_or(-1), String::from_utf8_lossy(&o.stderr).into_owned())
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn potential_is_deterministic() {
    let dir = scratch("potential");
    let cfg = write_config(
        &dir,
        r#"{"profile":{"kind":"hyperboloid","params":{"a":1}},"command":"potential","xi":{"min":-50,"max":50,"count":21}}"#,
    );
    let (a, b) = (dir.join("a"), dir.join("b"));
    assert_eq!(run("potential", &cfg, &a).0, 0);
    assert_eq!(run("potential", &cfg, &b).0, 0);
    let names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert!(!names.is_empty());
    for n in names {
        assert_eq!(fs::read(a.join(&n)).unwrap(), fs::read(b.join(&n)).unwrap(), "{n:?} differs between runs");
    }
    let csv = fs::read_to_string(a.join("potential.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "xi,rho,V,xi2V");
    assert_eq!(csv.lines().count(), 22);
}

#[test]
fn describe_and_statphase_succeed() {
    let dir = scratch("ok");
    let cfg = write_config(&dir, r#"{"profile":{"kind":"cylinder"}}"#);
    assert_eq!(run("describe", &cfg, &dir.join("d")).0, 0);
    assert!(dir.join("d/describe.txt").exists());
    let (code, err) = run("statphase", &cfg, &dir.join("s"));
    assert_eq!(code, 0, "{err}");
    let csv = fs::read_to_string(dir.join("s/statphase.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "case,t,lhs,rhs,ratio,oracle_error");
    assert_eq!(csv.lines().count(), 13);
}

#[test]
fn bad_configs_exit_with_one() {
    let dir = scratch("bad");
    for body in [
        r#"{"profile":{"kind":"cylinder"},"unexpected":1}"#,
        r#"{"profile":{"kind":"sphere"}}"#,
        r#"{"profile":{"kind":"cylinder"},"command":"jost"}"#,
        r#"not json"#,
    ] {
        let cfg = write_config(&dir, body);
        let (code, err) = run("describe", &cfg, &dir.join("o"));
        assert_eq!(code, 1, "{body}");
        assert!(err.starts_with("error:"), "{err}");
    }
    let (code, _) = run("describe", &dir.join("missing.json"), &dir.join("o"));
    assert_eq!(code, 1);
}
