mod common;

use std::path::PathBuf;
use std::process::{Command, Output};

use common::*;
use nucbound::io::{format_sci, parse_matrix, write_tensor};
use nucbound::DenseTensor;
use serde_json::Value;

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nucbound-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn tensor_file(name: &str, a: &DenseTensor) -> PathBuf {
    temp_file(name, &write_tensor(a, Some("test input")))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nucbound"))
        .args(args)
        .env("NUCBOUND_THREADS", "2")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn bounds_on_sharp_instance() {
    let path = tensor_file("sharp.txt", &sharp_instance(4));
    let out = run(&["bounds", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc = json(&out);
    assert!((num(&doc["lower"]) - 2.0).abs() < 1e-12);
    assert!((num(&doc["upper"]) - 2.0).abs() < 1e-12);
    assert!((num(&doc["per_mode"][0]["flattening_nuclear"]) - 1.0).abs() < 1e-12);
    assert!(doc["certificate"].is_object());
    assert_eq!(doc["shape"], serde_json::json!([1, 4, 4]));
}

#[test]
fn bounds_on_zero_tensor() {
    let path = temp_file("zero.txt", "shape: 2 2 2\n0 0\n0 0\n0 0\n0 0\n");
    let out = run(&["bounds", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    for key in ["lower", "upper", "hash_norm", "hs_upper"] {
        assert_eq!(num(&doc[key]), 0.0);
    }
    assert!(doc["certificate"].is_null());
    assert!(!stdout(&out).contains("-0.0"), "{}", stdout(&out));
}

#[test]
fn truncated_input_is_a_parse_error() {
    let path = temp_file("short.txt", "shape: 2 2 2\n1 2 3\n4 5 6 7\n");
    let out = run(&["bounds", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("expected 8 entries, found 7"), "{err}");
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn malformed_token_reports_position() {
    let path = temp_file("bad.txt", "shape: 2 2\n1 2\n3 x\n");
    let out = run(&["bounds", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("line 3, column 3"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn non_finite_entry_is_rejected() {
    let path = temp_file("nan.txt", "shape: 2\n1 nan\n");
    let out = run(&["bounds", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn missing_file_is_an_io_error() {
    let out = run(&["bounds", "/nonexistent/definitely/missing.txt"]);
    assert_eq!(out.status.code(), Some(7));
}

#[test]
fn bad_flags_are_usage_errors() {
    let path = tensor_file("usage.txt", &sharp_instance(2));
    assert_eq!(
        run(&["bounds", path.to_str().unwrap(), "--tol", "-1"])
            .status
            .code(),
        Some(64)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn flatten_prints_the_unfolding() {
    let a = DenseTensor::new(vec![2, 2, 2], (1..=8).map(f64::from).collect()).unwrap();
    let path = tensor_file("seq.txt", &a);
    let out = run(&["flatten", path.to_str().unwrap(), "--mode", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("# mode-2 flattening of a 2x2x2 tensor\n"));
    let m = parse_matrix(&text).unwrap();
    assert_eq!(m.data(), &[1.0, 2.0, 5.0, 6.0, 3.0, 4.0, 7.0, 8.0]);
}

#[test]
fn flatten_roundtrips_exactly() {
    let a = gaussian_tensor(&[3, 2, 4], &mut rng(51));
    let path = tensor_file("random.txt", &a);
    for mode in 1..=3 {
        let out = run(&[
            "flatten",
            path.to_str().unwrap(),
            "--mode",
            &mode.to_string(),
        ]);
        let m = parse_matrix(&stdout(&out)).unwrap();
        assert_eq!(m, a.flatten(mode).unwrap());
        assert_eq!(DenseTensor::unflatten(&m, a.shape(), mode).unwrap(), a);
    }
}

#[test]
fn flatten_rejects_out_of_range_modes() {
    let path = tensor_file("modes.txt", &sharp_instance(2));
    for mode in ["0", "4"] {
        let out = run(&["flatten", path.to_str().unwrap(), "--mode", mode]);
        assert_eq!(out.status.code(), Some(4));
    }
}

#[test]
fn certify_rank_one_and_orthogonal_terms() {
    let a = DenseTensor::rank_one(&[vec![1.0, 2.0], vec![3.0, -1.0, 0.5], vec![2.0, 2.0]]).unwrap();
    let path = tensor_file("r1.txt", &a);
    let out = run(&["certify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["certified"], Value::Bool(true));
    assert!((num(&doc["certificate"]["value"]) - a.hs_norm()).abs() < 1e-12);

    let (b, total) = orthogonal_terms_tensor([3, 4, 2], 3, &mut rng(52));
    let path = tensor_file("orth.txt", &b);
    let out = run(&["certify", path.to_str().unwrap(), "--mode", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(rel_diff(num(&json(&out)["certificate"]["value"]), total) < 1e-10);
}

#[test]
fn certify_generic_tensor_fails() {
    let path = tensor_file("generic.txt", &gaussian_tensor(&[3, 3, 3], &mut rng(53)));
    let out = run(&["certify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json(&out);
    assert_eq!(doc["certified"], Value::Bool(false));
    assert!(num(&doc["max_z_deviation"]) > 1e-6);
}

#[test]
fn certify_requires_order_three() {
    let path = tensor_file("order4.txt", &gaussian_tensor(&[2, 2, 2, 2], &mut rng(54)));
    assert_eq!(
        run(&["certify", path.to_str().unwrap()]).status.code(),
        Some(5)
    );
    let path = tensor_file("order2.txt", &gaussian_tensor(&[2, 3], &mut rng(55)));
    assert_eq!(
        run(&["certify", path.to_str().unwrap()]).status.code(),
        Some(5)
    );
}

#[test]
fn oracle_on_sharp_instance() {
    let path = tensor_file("sharp-oracle.txt", &sharp_instance(4));
    let out = run(&["oracle", path.to_str().unwrap(), "--seed", "42"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc = json(&out);
    assert!((num(&doc["dual_lower"]) - 2.0).abs() < 1e-10);
    assert!((num(&doc["primal_upper"]) - 2.0).abs() < 1e-3);
    assert!(num(&doc["spectral_lower"]) <= num(&doc["spectral_upper"]) * (1.0 + 1e-12));
    assert_eq!(doc["seed"], serde_json::json!(42));
}

#[test]
fn oracle_on_rank_one() {
    let a = DenseTensor::rank_one(&[vec![1.0, 1.0], vec![2.0, 0.0], vec![0.0, 3.0]]).unwrap();
    let path = tensor_file("r1-oracle.txt", &a);
    let out = run(&["oracle", path.to_str().unwrap(), "--restarts", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert!(rel_diff(num(&doc["primal_upper"]), a.hs_norm()) < 1e-6);
}

#[test]
fn oracle_refuses_large_inputs() {
    let mut text = String::from("shape: 100 100 100\n");
    for _ in 0..10_000 {
        text.push_str(&"1 ".repeat(100));
        text.push('\n');
    }
    let path = temp_file("large.txt", &text);
    let out = run(&["oracle", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(6));
}

#[test]
fn output_is_deterministic() {
    let path = tensor_file("det.txt", &gaussian_tensor(&[2, 2, 3], &mut rng(56)));
    let p = path.to_str().unwrap();
    for args in [
        vec!["bounds", p],
        vec!["oracle", p, "--restarts", "3", "--seed", "9"],
    ] {
        let first = run(&args);
        let second = run(&args);
        assert_eq!(first.stdout, second.stdout);
        assert_eq!(first.status.code(), second.status.code());
    }
}

#[test]
fn pretty_and_json_agree() {
    let path = tensor_file("pretty.txt", &gaussian_tensor(&[2, 3, 4], &mut rng(57)));
    let p = path.to_str().unwrap();
    let doc = json(&run(&["bounds", p]));
    let pretty = stdout(&run(&["bounds", p, "--pretty"]));
    for key in ["lower", "upper", "hash_norm", "hs_upper"] {
        let text = format_sci(num(&doc[key]));
        assert!(
            pretty.contains(&text),
            "{key}: {text} missing from\n{pretty}"
        );
    }
}
