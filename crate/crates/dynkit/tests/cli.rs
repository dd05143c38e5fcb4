use std::path::Path;
use std::process::{Command, Output};

fn dynkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynkit")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn bt_at_zero() {
    let o = dynkit(&["ghm", "bt", "--r", "0"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["M"].as_f64(), Some(-1.0));
    assert_eq!(v["B"].as_f64(), Some(1.0));
    assert_eq!(v["jacobian"][1][1].as_f64(), Some(2.0));
}

#[test]
fn unit_multiplier_is_a_validation_error() {
    let o = dynkit(&["classify", "--multipliers", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("non-hyperbolic"));
    assert!(o.stdout.is_empty());
}

#[test]
fn classify_saddle_focus_example() {
    let o = dynkit(&["classify", "--multipliers", "0.35355339059327373+0.35355339059327373i,0.35355339059327373-0.35355339059327373i,0.1,3"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["satisfies_eq1"], true);
    assert_eq!(v["sectionally_dissipative"], false);
}

#[test]
fn bad_arguments_exit_2() {
    for args in [
        &["ghm", "bt", "--r", "2"][..],
        &["nope"],
        &[],
        &["bif", "sweep", "--nm", "0"],
        &["wander", "--map", "spin"],
        &["historic"],
        &["renorm", "verify", "--gamma", "1.5"],
    ] {
        assert_eq!(dynkit(args).status.code(), Some(2), "{args:?}");
    }
}

fn sweep_args(out: &Path) -> Vec<String> {
    let v = [
        "bif", "sweep", "--r", "0.02", "--m-range", "-0.9,-0.8", "--b-range", "0.98,1.0", "--nm", "2", "--nb", "2",
        "--transient", "2000", "--samples", "2000", "--out",
    ];
    let mut a: Vec<String> = v.iter().map(|s| s.to_string()).collect();
    a.push(out.display().to_string());
    a
}

#[test]
fn sweep_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let args = sweep_args(&out);
    let o = dynkit(&args.iter().map(|s| s.as_str()).collect::<Vec<_>>());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "M,B,label,lyap1,lyap2,rot");
    assert_eq!(lines.len(), 5);
}

#[test]
fn config_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = sweep_args(&a);
    assert!(dynkit(&args.iter().map(|s| s.as_str()).collect::<Vec<_>>()).status.success());
    let cfg = serde_json::json!({
        "command": {"bif": {"sweep": {
            "r": 0.02, "m_range": [-0.9, -0.8], "b_range": [0.98, 1.0], "nm": 2, "nb": 2,
            "transient": 2000, "samples": 2000
        }}},
        "out": b,
        "threads": 3
    });
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, cfg.to_string()).unwrap();
    let o = dynkit(&["--config", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn unknown_config_key_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"command": {"ghm": {"bt": {"r": 0, "extra": 1}}}}"#).unwrap();
    let o = dynkit(&["--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn repeated_runs_identical() {
    let dir = tempfile::tempdir().unwrap();
    let orbit = dir.path().join("orbit.csv");
    let orbit_s = orbit.to_str().unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["ghm", "orbit", "--m", "1.4", "--b", "-0.3", "--n", "3000", "--transient", "100", "--out", orbit_s],
        vec!["ghm", "fixed-points", "--m", "-0.5", "--b", "0.8"],
        vec!["ghm", "lyapunov", "--m", "1.4", "--b", "-0.3", "--n", "20000"],
        vec!["bif", "fold", "--r", "0.02", "--step", "0.05"],
        vec!["bif", "hopf", "--r", "0.02", "--step", "0.05"],
        vec!["historic", "--input", orbit_s, "--observable", "box:0,1,-1,1"],
        vec!["wander", "--map", "rotation:0.1", "--center", "1,0", "--radius", "0.01", "--n", "50"],
        vec!["wander", "--map", "ghm:0,0.3,0", "--center", "0.1,0.1", "--radius", "0.01", "--n", "50", "--threads", "2"],
    ];
    for args in &runs {
        let first = dynkit(args);
        assert!(first.status.success(), "{args:?}: {}", String::from_utf8_lossy(&first.stderr));
        let a = if args.contains(&"--out") { std::fs::read(&orbit).unwrap() } else { first.stdout.clone() };
        let second = dynkit(args);
        let b = if args.contains(&"--out") { std::fs::read(&orbit).unwrap() } else { second.stdout.clone() };
        assert_eq!(a, b, "{args:?}");
    }
    let text = std::fs::read_to_string(&orbit).unwrap();
    assert!(text.starts_with("i,x,y\n101,"));
    assert_eq!(text.lines().count(), 3001);
}
