use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn uqsp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uqsp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn passing_suite_exits_zero_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ybe.json");
    let o = uqsp(&[
        "verify",
        "--suite",
        "ybe",
        "--n",
        "1",
        "--trials",
        "3",
        "--seed",
        "9",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["suite"], "ybe");
    assert_eq!(v["status"], "pass");
    assert_eq!(v["exact"], true);
    assert_eq!(v["params"]["seed"], 9);
    assert_eq!(v["residual_max"], "0");
    assert!(!v["details"].as_array().unwrap().is_empty());
    assert!(String::from_utf8_lossy(&o.stdout).contains("1/1 suites passed"));
}

#[test]
fn config_errors_exit_two() {
    for args in [
        &["verify", "--suite", "ybe", "--trials", "0"][..],
        &["verify", "--suite", "nonsense"],
        &["verify", "--suite", "ybe", "--backend", "quad"],
        &["verify", "--suite", "spectra", "--backend", "exact"],
        &["bethe-check", "--q", "7/10"],
    ] {
        let o = uqsp(args);
        assert_eq!(code(&o), 2, "{args:?}");
        let err: Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
        assert_eq!(err["error"], "config");
    }
}

#[test]
fn perturbed_r_exits_one() {
    let o = uqsp(&[
        "verify",
        "--suite",
        "inverses",
        "--n",
        "1",
        "--trials",
        "2",
        "--perturb-r",
        "1/1000",
    ]);
    assert_eq!(code(&o), 1);
}

#[test]
fn config_file_merges_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out = dir.path().join("r.json");
    fs::write(
        &cfg,
        r#"{"suite": "inverses", "n": 2, "trials": 2, "seed": 5, "inhom": ["1", "2"]}"#,
    )
    .unwrap();
    let o = uqsp(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "6",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["suite"], "inverses");
    assert_eq!(v["params"]["n"], 2);
    assert_eq!(v["params"]["L"], 2);
    assert_eq!(v["params"]["seed"], 6);

    fs::write(&cfg, r#"{"suite": "ybe", "colour": "blue"}"#).unwrap();
    assert_eq!(
        code(&uqsp(&["verify", "--config", cfg.to_str().unwrap()])),
        2
    );
}

#[test]
fn solve_then_check_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("roots.json");
    let o = uqsp(&[
        "bethe-solve",
        "--n",
        "1",
        "--q",
        "7/10",
        "--inhom",
        "1",
        "--M",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let roots = v["roots"].as_array().unwrap();
    assert!(!roots.is_empty());
    let u = roots[0]["us"][0].as_str().unwrap().to_string();

    let good = uqsp(&[
        "bethe-check",
        "--n",
        "1",
        "--q",
        "7/10",
        "--inhom",
        "1",
        "--u",
        &u,
    ]);
    assert_eq!(code(&good), 0, "{}", String::from_utf8_lossy(&good.stdout));
    let bad = uqsp(&[
        "bethe-check",
        "--n",
        "1",
        "--q",
        "7/10",
        "--inhom",
        "1",
        "--u",
        "0.5+0.5i",
    ]);
    assert_eq!(code(&bad), 1);
}

#[test]
fn chain_reports_vacuum() {
    let o = uqsp(&[
        "chain", "--n", "2", "--q", "7/10", "--inhom", "1,3/2", "--x", "2",
    ]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("dim=16"), "{text}");
    assert!(text.contains("λ_1(2)"), "{text}");
}
