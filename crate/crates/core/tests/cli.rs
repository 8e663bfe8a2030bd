use std::fs;
use std::path::Path;
use std::process::Command;

fn oscillab(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_oscillab"))
        .args(args)
        .env_remove("OSCILLAB_THREADS")
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, json).unwrap();
    p.display().to_string()
}

const RATE: &str = r#"{
  "model": {"kind": "tar", "a": 0.5, "b": -0.3},
  "seed": 11,
  "reference": {"size": 200000},
  "experiment": {"n_grid": [256, 512, 1024], "bandwidth": {"rule": "power_law", "eta": 0.5},
                 "replicates": 4, "checks": {"decomposition": true}}
}"#;

#[test]
fn oscillate_prints_the_modulus() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"model": {"kind": "iid", "innovation": {"kind": "uniform", "lo": 0, "hi": 1}},
            "oscillate": {"sample": [0.25, 0.75], "b": [0.25, 0.5], "bruteforce_step": 0.001}}"#,
    );
    let out = dir.path().join("out");
    let (code, stdout, stderr) = oscillab(&["oscillate", "-c", &cfg, "-o", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("0.7071067811865476"), "{stdout}");
    for f in ["raw.csv", "aggregate.csv", "verdict.json", "run-manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let v: serde_json::Value = serde_json::from_slice(&fs::read(out.join("verdict.json")).unwrap()).unwrap();
    assert_eq!(v["overall"], "pass");
}

#[test]
fn rate_reproduces_from_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "rate.json", RATE);
    let a = dir.path().join("a");
    let (code, _, stderr) = oscillab(&["rate", "-c", &cfg, "-o", a.to_str().unwrap(), "--seed", "42"]);
    assert!(code == 0 || code == 1, "{stderr}");
    let m: serde_json::Value = serde_json::from_slice(&fs::read(a.join("run-manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 42);
    assert_eq!(m["subcommand"], "rate");
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);

    let b = dir.path().join("b");
    let seed = m["seed"].to_string();
    let (code2, _, _) = oscillab(&["rate", "-c", &cfg, "-o", b.to_str().unwrap(), "--seed", &seed, "--threads", "3"]);
    assert_eq!(code, code2);
    for f in ["raw.csv", "aggregate.csv", "verdict.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let header = fs::read_to_string(a.join("raw.csv")).unwrap();
    assert!(header.starts_with("n_index,rep,n,b,delta,"));
    assert_eq!(header.lines().count(), 1 + 3 * 4);
}

#[test]
fn refuses_to_overwrite_without_force() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s.json", r#"{"model": {"kind": "iid"}, "simulate": {"n": 10}}"#);
    let out = dir.path().join("o");
    let o = out.to_str().unwrap();
    assert_eq!(oscillab(&["simulate", "-c", &cfg, "-o", o]).0, 0);
    let first = fs::read(out.join("raw.csv")).unwrap();
    let (code, _, stderr) = oscillab(&["simulate", "-c", &cfg, "-o", o, "--seed", "5"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("--force"), "{stderr}");
    assert_eq!(fs::read(out.join("raw.csv")).unwrap(), first);
    assert_eq!(oscillab(&["simulate", "-c", &cfg, "-o", o, "--seed", "5", "--force"]).0, 0);
    assert_ne!(fs::read(out.join("raw.csv")).unwrap(), first);
}

#[test]
fn failed_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let strict = RATE.replace(r#""decomposition": true"#, r#""slope_tolerance": 0"#);
    let cfg = write_config(dir.path(), "strict.json", &strict);
    let out = dir.path().join("o");
    let (code, stdout, _) = oscillab(&["rate", "-c", &cfg, "-o", out.to_str().unwrap()]);
    assert_eq!(code, 1, "{stdout}");
    assert!(stdout.contains("FAIL"), "{stdout}");
    let v: serde_json::Value = serde_json::from_slice(&fs::read(out.join("verdict.json")).unwrap()).unwrap();
    assert_eq!(v["overall"], "fail");
    assert_eq!(v["checks"]["rate_slope"]["outcome"], "fail");
}

#[test]
fn configuration_errors_exit_two_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("o");
    let o = o.to_str().unwrap();
    let cases = [
        (r#"{"model": {"kind": "iid"}, "sede": 1}"#, "simulate", "sede"),
        (r#"{"model": {"kind": "tar", "a": 1.5, "b": 0}, "simulate": {"n": 10}}"#, "simulate", "model.a"),
        (r#"{"model": {"kind": "iid"}}"#, "rate", "experiment"),
        (
            r#"{"model": {"kind": "iid"}, "experiment": {"n_grid": [100, 200], "bandwidth": {"rule": "power_law", "eta": 0.5}, "replicates": 2}}"#,
            "rate",
            "n_grid",
        ),
    ];
    for (i, (json, sub, key)) in cases.iter().enumerate() {
        let cfg = write_config(dir.path(), &format!("{i}.json"), json);
        let (code, _, stderr) = oscillab(&[sub, "-c", &cfg, "-o", o, "--force"]);
        assert_eq!(code, 2, "{json}: {stderr}");
        assert!(stderr.contains(key), "{json}: {stderr}");
    }
    assert_eq!(oscillab(&["simulate", "-c", "/nonexistent.json", "-o", o]).0, 2);
    assert_eq!(oscillab(&["simulate", "--bogus"]).0, 2);
    assert_eq!(oscillab(&["nonsense"]).0, 2);
}

#[test]
fn unsupported_computation_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "d.json",
        r#"{"model": {"kind": "linear", "coeffs": [1, 0.5], "innovation": {"kind": "uniform", "lo": 0, "hi": 1}},
            "dependence": {"max_lag": 4, "replicates": 100, "cf_terms": true}}"#,
    );
    let (code, _, stderr) = oscillab(&["dependence", "-c", &cfg, "-o", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code, 3, "{stderr}");
}

#[test]
fn check_conditions_reports_integrability() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"model": {"kind": "iid", "innovation": {"kind": "cauchy"}}, "conditions": {"alpha": [1]}}"#,
    );
    let out = dir.path().join("o");
    let (code, stdout, stderr) = oscillab(&["check-conditions", "-c", &cfg, "-o", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{stdout}{stderr}");
    let raw = fs::read_to_string(out.join("raw.csv")).unwrap();
    assert!(raw.contains("1.25"), "{raw}");
}

#[test]
fn selftest_passes() {
    let (code, stdout, _) = oscillab(&["selftest"]);
    assert_eq!(code, 0, "{stdout}");
    assert!(!stdout.contains("FAIL"));
}
