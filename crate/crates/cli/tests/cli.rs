use std::process::{Command, Output};

use serde_json::Value;

fn skein(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skein")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn error_kind(out: &Output) -> String {
    let v: Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    v["error"].as_str().expect("error kind").to_string()
}

const EXAMPLE: [&str; 11] = [
    "trace", "--matrix", "2,1,-7,-3", "--sign", "plus", "--character", "auto", "--k", "1,1", "--n", "9",
];

#[test]
fn example_trace_is_exact_zero() {
    let out = skein(&EXAMPLE);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let row = &v["rows"][0];
    assert_eq!(row["n"], 9);
    assert_eq!(row["is_exact_zero"], true);
    assert_eq!(row["abs_trace"], 0.0);
    assert_eq!(row["abs_trace_sq_exact"], "0");
    assert_eq!(row["log_trace_over_n"], "-inf");
    assert_eq!(v["summary"]["zeros"], serde_json::json!([9]));
}

#[test]
fn gauss_k6_n9() {
    let out = skein(&["gauss", "--k", "6", "--n", "9"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["rows"][0]["abs_trace_sq_exact"], "27");
}

#[test]
fn punctured_n9() {
    let out = skein(&["punctured", "--n", "9"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["rows"][0]["abs_trace_sq_exact"], "3");
}

#[test]
fn verify_passes_on_example() {
    let out = skein(&["verify", "--matrix", "2,1,-7,-3", "--character", "auto", "--k", "1,1", "--n", "3..11"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);
    assert_eq!(v["summary"]["all_verified"], true);
}

#[test]
fn even_n_is_rejected() {
    let out = skein(&["trace", "--matrix", "2,1,1,1", "--n", "8"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_kind(&out), "EvenLevel");
    assert!(out.stdout.is_empty());
}

#[test]
fn bad_matrix_is_rejected() {
    for m in ["2,1,1,2", "1,2,3", "a,b,c,d"] {
        let out = skein(&["trace", "--matrix", m, "--n", "9"]);
        assert_eq!(out.status.code(), Some(2), "matrix {m}");
        error_kind(&out);
    }
}

#[test]
fn non_invariant_character_is_rejected() {
    let out = skein(&["trace", "--matrix", "1,1,0,1", "--character", "0,1/4", "--n", "9"]);
    assert_eq!(out.status.code(), Some(2));
    error_kind(&out);
}

#[test]
fn unknown_flag_is_invalid_input() {
    let out = skein(&["trace", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_kind(&out), "InvalidInput");
}

#[test]
fn tampered_gauss_fails_verification() {
    let out = skein(&["gauss", "--k", "6", "--n", "9", "--tamper-gauss"]);
    assert_eq!(out.status.code(), Some(1));
    let out = skein(&["accept", "--only", "4", "--tamper-gauss", "--output", "pretty"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn json_is_byte_identical_across_runs_and_workers() {
    let args = ["sweep", "--matrix", "2,1,-7,-3", "--character", "auto", "--k", "1,1", "--n", "3..41"];
    let a = skein(&args);
    let b = skein(&[&args[..], &["--workers", "1"]].concat());
    let c = skein(&[&args[..], &["--workers", "4"]].concat());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn csv_matches_json() {
    let base = ["trace", "--matrix", "2,1,-7,-3", "--character", "auto", "--k", "1,1", "--n", "3..15"];
    let j = json(&skein(&base));
    let csv = skein(&[&base[..], &["--output", "csv"]].concat());
    let text = String::from_utf8(csv.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,abs_trace,abs_trace_sq_exact,log_trace_over_n,is_exact_zero,path"));
    let rows = j["rows"].as_array().unwrap();
    let csv_rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(csv_rows.len(), rows.len());
    for (r, c) in rows.iter().zip(&csv_rows) {
        assert_eq!(r["n"].to_string(), c[0]);
        assert_eq!(r["abs_trace"].as_f64().unwrap(), c[1].parse::<f64>().unwrap());
        assert_eq!(r["abs_trace_sq_exact"].as_str().unwrap_or(""), c[2]);
        match &r["log_trace_over_n"] {
            Value::String(s) => assert_eq!(s, c[3]),
            v => assert_eq!(v.as_f64().unwrap(), c[3].parse::<f64>().unwrap()),
        }
        assert_eq!(r["is_exact_zero"].to_string(), c[4]);
        assert_eq!(r["path"].as_str().unwrap(), c[5]);
    }
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("skein-out-{}.json", std::process::id()));
    let out = skein(&["gauss", "--k", "6", "--n", "9", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(v["rows"][0]["abs_trace_sq_exact"], "27");
}

#[test]
fn timings_only_when_requested() {
    let plain = String::from_utf8(skein(&["gauss", "--k", "6", "--n", "9"]).stdout).unwrap();
    assert!(!plain.contains("elapsed_ms"));
    let timed = String::from_utf8(skein(&["gauss", "--k", "6", "--n", "9", "--timings"]).stdout).unwrap();
    assert!(timed.contains("elapsed_ms"));
}

#[test]
fn accept_only_filters_by_module() {
    let out = skein(&["accept", "--only", "torus_rep", "--output", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let crit = v["criteria"].as_array().unwrap();
    assert!(!crit.is_empty());
    assert!(crit.iter().all(|c| c["module"] == "torus_rep" && c["passed"] == true));
}
