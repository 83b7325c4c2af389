use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("anyonstack").chain(args.iter().copied());
    let code = anyonstack_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn report(args: &[&str]) -> (i32, Value) {
    let (code, out, err) = run(args);
    let v = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out} {err}"));
    (code, v)
}

fn without_timings(text: &str) -> String {
    text.lines().filter(|l| !l.contains("\"elapsed_ms\"")).collect::<Vec<_>>().join("\n")
}

#[test]
fn anyons_report() {
    let (code, r) = report(&["anyons", "--group", "Z2"]);
    assert_eq!(code, 0);
    assert_eq!(r["sector_count"], 4);
    assert_eq!(r["version"], 1);
    assert_eq!(r["seed"], 42);
    assert_eq!(r["command"], "anyons --group Z2");
    let (_, r) = report(&["anyons", "--group", "S3"]);
    let qdims: Vec<u64> = r["anyons"].as_array().unwrap().iter().map(|a| a["qdim"].as_u64().unwrap()).collect();
    assert_eq!(qdims, vec![1, 1, 2, 3, 3, 2, 2, 2]);
}

#[test]
fn stack_check_counts() {
    let (code, r) = report(&["stack-check", "--group", "Z2", "--group2", "Z3"]);
    assert_eq!(code, 0);
    assert_eq!(r["stack"]["product_count"], 36);
    assert_eq!(r["stack"]["bijection"].as_array().unwrap().len(), 36);
}

#[test]
fn fusion_reports() {
    let (code, r) = report(&["fusion", "--group", "Z2"]);
    assert_eq!(code, 0);
    // toric code: e x m = epsilon, each label its own conjugate
    assert_eq!(r["conjugates"], serde_json::json!([0, 1, 2, 3]));
    assert_eq!(r["entries"].as_array().unwrap().len(), 16);
    let (code, _) = report(&["fusion", "--group", "Z2", "--group2", "Z3"]);
    assert_eq!(code, 0);
}

#[test]
fn input_errors_exit_with_two() {
    assert_eq!(run(&["anyons", "--group", "Y3"]).0, 2);
    assert_eq!(run(&["anyons", "--bogus"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["lattice-check", "--group", "Z2", "--lx", "1"]).0, 2);
    assert_eq!(run(&["lattice-check", "--group", "Z2", "--ribbon", "{\"start\": 3}"]).0, 2);
    assert_eq!(run(&["entropy", "--regions", "[{\"label\": \"a\", \"edges\": [99]}]"]).0, 2);
    assert_eq!(run(&["lattice-check", "--group", "S3", "--lx", "3", "--ly", "3"]).0, 2);
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("stack-check"));
}

#[test]
fn max_dim_from_the_environment() {
    let bin = env!("CARGO_BIN_EXE_anyonstack");
    let status = Command::new(bin)
        .args(["lattice-check", "--group", "Z2"])
        .env("ANYONSTACK_MAX_DIM", "16")
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
    let status = Command::new(bin)
        .args(["lattice-check", "--group", "Z2"])
        .env("ANYONSTACK_MAX_DIM", "256")
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0));
}

#[test]
fn lattice_check_with_stacking_and_ribbon() {
    let ribbon = r#"{"start": {"vertex": 0, "face": 0}, "steps": [{"kind": "direct", "edge": 0}, {"kind": "dual", "edge": 10}]}"#;
    let (code, r) = report(&["lattice-check", "--group", "Z2", "--lx", "3", "--ly", "3", "--ribbon", ribbon]);
    assert_eq!(code, 0, "{r}");
    let names: Vec<String> = r["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap().to_string()).collect();
    assert!(names.iter().any(|n| n.starts_with("ribbon_endpoint_locality")), "{names:?}");
    assert_eq!(r["lattice"]["edges"], 18);

    let short = r#"{"start": {"vertex": 0, "face": 0}, "steps": [{"kind": "direct", "edge": 0}]}"#;
    let (code, r) = report(&["lattice-check", "--group", "Z2", "--group2", "Z2", "--ribbon", short, "--samples", "10"]);
    assert_eq!(code, 0, "{r}");
    let names: Vec<String> = r["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap().to_string()).collect();
    assert!(names.iter().any(|n| n.starts_with("ribbon_factorization")), "{names:?}");
}

#[test]
fn entropy_outputs_and_csv() {
    let dir = std::env::temp_dir().join(format!("anyonstack-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("points.csv");
    let out = dir.join("report.json");
    let (code, text, _) = run(&[
        "entropy", "--lx", "4", "--ly", "4", "--fit-tee", "--axiom-a0",
        "--csv", csv.to_str().unwrap(), "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(text.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let gamma = r["fits"][0]["gamma"].as_f64().unwrap();
    assert!((gamma - std::f64::consts::LN_2).abs() < 1e-6);
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert!(rows.starts_with("convention,region,entropy,boundary,components"));
    assert_eq!(rows.lines().count(), 1 + 3 * 3);

    // the dense path is used and cross-checked when the lattice is small
    let (code, r) = report(&["entropy", "--lx", "3", "--ly", "2", "--regions", "[{\"label\": \"a\", \"edges\": [0, 1, 6]}]"]);
    assert_eq!(code, 0);
    assert!(r["regions"][0]["dense_entropy"].is_number());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn set_check_report() {
    let (code, r) = report(&["set-check"]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["set"]["num_qubits"], 21);
    assert!(r["set"]["eigenspace_dim"].as_u64().unwrap() >= 1);
    let (code, _) = report(&["set-check", "--boundary", "torus", "--decoupled"]);
    assert_eq!(code, 0);
}

#[test]
fn reports_are_reproducible() {
    let a = run(&["all", "--suite", "fusion", "--threads", "1"]).1;
    let b = run(&["all", "--suite", "fusion", "--threads", "3"]).1;
    assert_eq!(without_timings(&a), without_timings(&b));
    let c = run(&["all", "--suite", "fusion", "--seed", "7"]).1;
    assert!(c.contains("\"seed\": 7"));
}
