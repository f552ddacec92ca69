//! End-to-end tests of the command line binary: exit codes, structured
//! errors on stderr, output naming, and byte-level determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_semispec");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn binary")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("config.toml");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const FAST_AIRY: &str = r#"
[problem]
potential = "x"
domain = { a = 0.0, b = 1.0 }
h = 0.1
"#;

fn stderr_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().unwrap_or_default();
    serde_json::from_str(line).unwrap_or_else(|e| panic!("stderr not JSON ({e}): {text}"))
}

#[test]
fn missing_config_is_exit_1_with_json_error() {
    let out = run(&["spectrum"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_json(&out);
    assert_eq!(err["error"], "config");
}

#[test]
fn empty_hs_is_exit_1_hs_empty() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"
[problem]
potential = "x"
domain = { a = 0.0, b = 1.0 }
hs = []
"#,
    );
    let out = run(&["sweep", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_json(&out);
    assert_eq!(err["error"], "config");
    assert_eq!(err["message"], "config error: hs empty");
}

#[test]
fn spectrum_writes_hash_named_outputs_and_sidecar() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), FAST_AIRY);
    let out_dir = tmp.path().join("out");
    let out = run(&["spectrum", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let names: Vec<String> = fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    let spectrum = names.iter().find(|n| n.starts_with("spectrum.")).unwrap();
    let sidecar = names.iter().find(|n| n.starts_with("run.")).unwrap();
    // both carry the same 12-hex config hash
    let hash = spectrum.split('.').nth(1).unwrap();
    assert_eq!(hash.len(), 12);
    assert!(hash.chars().all(|c| c.is_ascii_hexdigit()));
    assert!(sidecar.contains(hash));

    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join(sidecar)).unwrap()).unwrap();
    assert_eq!(meta["config_hash"], hash);
    assert_eq!(meta["subcommand"], "spectrum");
}

#[test]
fn identical_config_gives_byte_identical_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), FAST_AIRY);
    let read_all = |dir: &Path| -> Vec<(String, Vec<u8>)> {
        let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (
                    e.file_name().into_string().unwrap(),
                    fs::read(e.path()).unwrap(),
                )
            })
            .collect();
        v.sort();
        v
    };
    let d1 = tmp.path().join("a");
    let d2 = tmp.path().join("b");
    for d in [&d1, &d2] {
        let out = run(&["spectrum", "--config", &cfg, "--out", d.to_str().unwrap()]);
        assert!(out.status.success());
    }
    assert_eq!(read_all(&d1), read_all(&d2));
}

#[test]
fn regime_violation_is_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    // interior critical point: the gl preset must refuse
    let cfg = write_config(
        tmp.path(),
        r#"
[problem]
potential = "x^2"
domain = { a = -1.0, b = 1.0 }

[gl]
rs = [5.0]
"#,
    );
    let out_dir = tmp.path().join("out");
    let out = run(&["gl", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "regime");
}

#[test]
fn infeasible_resolution_is_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"
[problem]
potential = "x"
domain = { a = 0.0, b = 1.0 }
h = 1e-6

[grid]
n_max_1d = 200
"#,
    );
    let out_dir = tmp.path().join("out");
    let out = run(&["spectrum", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["error"], "infeasible_resolution");
}

#[test]
fn threads_flag_and_env_are_accepted() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), FAST_AIRY);
    let out_dir = tmp.path().join("out");
    let out = run(&[
        "spectrum",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
        "--threads",
        "1",
    ]);
    assert!(out.status.success());

    let out = Command::new(BIN)
        .args(["spectrum", "--config", &cfg, "--out", out_dir.to_str().unwrap()])
        .env("SEMISPEC_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn dense_cap_flag_switches_method() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), FAST_AIRY);
    let out_dir = tmp.path().join("out");
    let out = run(&[
        "spectrum",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
        "--dense-cap",
        "2",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let name = fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| {
            p.file_name()
                .unwrap()
                .to_str()
                .unwrap()
                .starts_with("spectrum.")
        })
        .unwrap();
    let body = fs::read_to_string(name).unwrap();
    assert!(body.contains("ShiftInvert"), "method not switched: {body}");
}
