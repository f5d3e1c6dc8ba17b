use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

const EXP1: &str = r#"{"kind":"exponential","params":{"lambda":1}}"#;
const EXP_MEAN2: &str = r#"{"kind":"exponential","params":{"lambda":0.5}}"#;
const WEIBULL: &str = r#"{"kind":"weibull","params":{"k":2,"lambda":1}}"#;
const NUMERIC: &str = r#"{"kind":"numeric","params":{"knots":[[0,1],[0.5,0.7],[1,0.4],[2,0.1]]}}"#;

fn fraceq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fraceq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

#[test]
fn suite_passes() {
    let out = fraceq(&["suite"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    let results = report["results"].as_array().unwrap();
    assert!(results.len() > 30);
    assert!(results.iter().all(|r| r["pass"] == true));
    assert_eq!(report["header"]["config"]["command"], "suite");
}

#[test]
fn characterize_weibull_is_informational() {
    let out = fraceq(&["characterize", "--dist", WEIBULL, "--alpha", "1", "--n", "1"]);
    assert_eq!(code(&out), 0);
    let report = stdout_json(&out);
    assert_eq!(report["summary"]["is_fixed_point"], false);
    assert!(report["summary"]["max_deviation"].as_f64().unwrap() >= 0.05);
}

#[test]
fn characterize_exponential_is_fixed_point() {
    let out = fraceq(&["characterize", "--dist", EXP1, "--alpha", "0.5,1", "--n", "1,2"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["summary"]["is_fixed_point"], true);
}

#[test]
fn order_failure_is_informational() {
    let out = fraceq(&["order", "--x", EXP1, "--y", EXP_MEAN2, "--alpha", "0.5"]);
    assert_eq!(code(&out), 0);
    let verdict = &stdout_json(&out)["summary"]["orders"][0];
    assert_eq!(verdict["holds"], false);
    assert_eq!(verdict["worst_t"].as_f64(), Some(0.0));
}

#[test]
fn mvt_and_actuarial_pass() {
    let out = fraceq(&[
        "mvt",
        "--x",
        EXP1,
        "--y",
        EXP_MEAN2,
        "--alpha",
        "1,1.5",
        "--g",
        r#"[{"coef":1,"exp":2}]"#,
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = fraceq(&[
        "actuarial",
        "--severity",
        EXP1,
        "--r",
        "0.5",
        "--s",
        "1",
        "--u",
        "1",
        "--v",
        "2",
        "--g",
        r#"[{"coef":1,"exp":0.5}]"#,
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let checks: Vec<String> = stdout_json(&out)["results"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["check"].as_str().unwrap().to_string())
        .collect();
    assert!(checks.contains(&"ratio_independence".to_string()));
    assert!(checks.contains(&"deductible_z_density".to_string()));
}

#[test]
fn mvt_reports_order_violation_as_failure() {
    // reversed pair: the larger variable passed as x
    let out = fraceq(&["mvt", "--x", EXP_MEAN2, "--y", EXP1, "--alpha", "1"]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout_json(&out)["results"][0]["check"], "survival_bounded_order");
}

#[test]
fn taylor_records_skips() {
    let out = fraceq(&[
        "taylor",
        "--dist",
        EXP1,
        "--g",
        r#"[{"coef":1,"exp":0.5}]"#,
        "--alpha",
        "1",
        "--n",
        "0,1",
    ]);
    assert_eq!(code(&out), 0);
    let report = stdout_json(&out);
    assert_eq!(report["results"].as_array().unwrap().len(), 1);
    assert_eq!(report["summary"]["skipped"].as_array().unwrap().len(), 1);
    let out = fraceq(&["taylor", "--dist", EXP1, "--g", r#"[{"coef":1,"exp":2}]"#, "--caputo"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["results"][0]["check"], "caputo_taylor");
}

#[test]
fn reports_are_deterministic_and_embed_config() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = fraceq(&[
            "eqdist",
            "--dist",
            NUMERIC,
            "--alpha",
            "0.5",
            "--n",
            "1,2",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (ja, jb) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let (va, vb): (Value, Value) = (
        serde_json::from_slice(&ja).unwrap(),
        serde_json::from_slice(&jb).unwrap(),
    );
    // the output path is part of the config; everything else must match byte for byte
    assert_eq!(va["results"], vb["results"]);
    let strip = |v: &Value| {
        let mut v = v.clone();
        v["header"]["config"].as_object_mut().unwrap().remove("out");
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(strip(&va), strip(&vb));
    assert_eq!(va["header"]["config"]["dist"]["kind"], "numeric");
    assert_eq!(va["header"]["config"]["alphas"], serde_json::json!([0.5]));

    let out1 = fraceq(&["eqdist", "--dist", EXP1]);
    let out2 = fraceq(&["eqdist", "--dist", EXP1]);
    assert_eq!(out1.stdout, out2.stdout);
}

#[test]
fn csv_grids_one_file_per_order() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("grids");
    let out = fraceq(&[
        "eqdist",
        "--dist",
        EXP1,
        "--alpha",
        "0.5,1",
        "--n",
        "2",
        "--grid",
        "12",
        "--format",
        "csv",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let mut names: Vec<String> = fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["eqdist_alpha0.5_n2.csv", "eqdist_alpha1_n2.csv", "report.json"]);
    let text = fs::read_to_string(out_dir.join("eqdist_alpha0.5_n2.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,value,oracle_value,abs_diff"));
    assert_eq!(lines.count(), 12);
}

#[test]
fn exit_codes() {
    let out = fraceq(&["frobnicate"]);
    assert_eq!(code(&out), 2);

    let out = fraceq(&[
        "eqdist",
        "--dist",
        "{\"kind\":\"exponential\",\n\"params\":{\"lambda\":}}",
    ]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");

    let out = fraceq(&["eqdist", "--dist", EXP1, "--grid", "4"]);
    assert_eq!(code(&out), 2);

    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("fail.json");
    let out = fraceq(&[
        "eqdist",
        "--dist",
        EXP1,
        "--tol",
        "1e-300",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(report.exists(), "report is written even when checks fail");

    let out = fraceq(&[
        "eqdist",
        "--dist",
        NUMERIC,
        "--alpha",
        "0.3",
        "--abs-tol",
        "1e-300",
        "--rel-tol",
        "1e-300",
    ]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));

    let out = fraceq(&["eqdist", "--dist", "/nonexistent/spec.json"]);
    assert_eq!(code(&out), 4);
    let out = fraceq(&["eqdist", "--dist", EXP1, "--out", "/nonexistent/dir/r.json"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn spec_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dist.json");
    fs::write(&path, WEIBULL).unwrap();
    let out = fraceq(&["eqdist", "--dist", path.to_str().unwrap(), "--alpha", "1", "--n", "1"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["header"]["config"]["dist"]["kind"], "weibull");
}
