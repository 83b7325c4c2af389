//! The nine acceptance criteria, each driven through the command-line entry
//! point, with one printed pass/fail line per criterion.

use std::time::{Duration, Instant};

use anyonstack_core::group::{build_group, GroupSpec};
use serde_json::Value;

type Criterion = (&'static str, Box<dyn Fn() -> Outcome>);

struct Outcome {
    ok: bool,
    note: String,
}

fn cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("anyonstack").chain(args.iter().copied());
    let code = anyonstack_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap() + &String::from_utf8(err).unwrap())
}

/// Run one suite; pass iff exit 0, every check passes and the runtime is within `limit`.
fn suite(name: &str, limit: Option<Duration>) -> (Outcome, Value) {
    let start = Instant::now();
    let (code, text) = cli(&["all", "--suite", name]);
    let elapsed = start.elapsed();
    let report: Value = serde_json::from_str(&text).unwrap_or(Value::Null);
    let checks = report["checks"].as_array().cloned().unwrap_or_default();
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| c["status"] != "pass")
        .map(|c| format!("{} ({})", c["name"].as_str().unwrap_or("?"), c["metric"]))
        .collect();
    let ok = code == 0 && failed.is_empty() && !checks.is_empty() && limit.is_none_or(|l| elapsed <= l);
    let mut note = format!("{} checks in {:.1}s", checks.len(), elapsed.as_secs_f64());
    if let Some(l) = limit {
        note.push_str(&format!(" (limit {}s)", l.as_secs()));
    }
    if !failed.is_empty() {
        note.push_str(&format!("; failing: {}", failed.join(", ")));
    }
    if code != 0 && failed.is_empty() {
        note.push_str(&format!("; exit {code}: {}", text.lines().next().unwrap_or("")));
    }
    (Outcome { ok, note }, report)
}

/// Sector count as the number of commuting pairs up to simultaneous conjugation,
/// by Burnside: pairwise commuting triples divided by `|G|`.
fn commuting_pair_count(name: &str) -> usize {
    let g = build_group(&GroupSpec::named(name), 2000).unwrap();
    let n = g.order();
    let c = |a: usize, b: usize| g.mul(a, b) == g.mul(b, a);
    let mut triples = 0;
    for a in 0..n {
        for b in (0..n).filter(|&b| c(a, b)) {
            triples += (0..n).filter(|&x| c(x, a) && c(x, b)).count();
        }
    }
    assert_eq!(triples % n, 0);
    triples / n
}

fn criterion_1() -> Outcome {
    let (mut o, report) = suite("counting", Some(Duration::from_secs(10)));
    let expected = [("Z2", 4), ("Z3", 9), ("S3", 8), ("D4", 22), ("Q8", 22), ("Z4", 16), ("Z2xZ2", 16)];
    for (name, count) in expected {
        let oracle = commuting_pair_count(name);
        if oracle != count {
            o.ok = false;
            o.note.push_str(&format!("; oracle {name} gave {oracle}"));
        }
    }
    let pairs = report["results"]["pairs"].as_array().cloned().unwrap_or_default();
    let lookup = |n: &str| expected.iter().find(|e| e.0 == n).map(|e| e.1);
    for p in &pairs {
        let (l, r) = (p["left"].as_str().unwrap_or(""), p["right"].as_str().unwrap_or(""));
        let want = lookup(l).zip(lookup(r)).map(|(a, b)| a * b);
        if want != p["product_count"].as_u64().map(|x| x as usize) || p["bijection_size"] != p["product_count"] {
            o.ok = false;
            o.note.push_str(&format!("; {l}x{r} gave {}", p["product_count"]));
        }
    }
    if pairs.len() != 28 {
        o.ok = false;
        o.note.push_str(&format!("; {} pairs instead of 28", pairs.len()));
    }
    o
}

fn criterion_6() -> Outcome {
    let (mut o, report) = suite("entropy", None);
    let fit = &report["results"]["fits"][0];
    let gamma = fit["gamma"].as_f64().unwrap_or(f64::NAN);
    let residual = fit["residual"].as_f64().unwrap_or(f64::NAN);
    if !((gamma - std::f64::consts::LN_2).abs() <= 1e-6 && residual < 1e-8) {
        o.ok = false;
    }
    o.note.push_str(&format!("; gamma = {gamma:.12}, residual = {residual:.1e}"));
    o
}

fn criterion_9() -> Outcome {
    let limit = Duration::from_secs(600);
    let mut runs = Vec::new();
    let mut slowest = Duration::ZERO;
    for threads in ["1", "4"] {
        let start = Instant::now();
        let (code, text) = cli(&["all", "--suite", "desk", "--threads", threads]);
        slowest = slowest.max(start.elapsed());
        runs.push((code, text.lines().filter(|l| !l.contains("\"elapsed_ms\"")).collect::<Vec<_>>().join("\n")));
    }
    let identical = runs[0].1 == runs[1].1;
    let passed = runs.iter().all(|r| r.0 == 0);
    Outcome {
        ok: identical && passed && slowest <= limit,
        note: format!(
            "threads 1 vs 4 identical: {identical}; all checks pass: {passed}; slowest run {:.1}s (limit {}s)",
            slowest.as_secs_f64(),
            limit.as_secs()
        ),
    }
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("1 sector counting under direct products", Box::new(criterion_1)),
        ("2 fusion factorization", Box::new(|| suite("fusion", Some(Duration::from_secs(120))).0)),
        ("3 quantum double stacking", Box::new(|| suite("stacking", Some(Duration::from_secs(60))).0)),
        ("4 frustration-free ground states", Box::new(|| suite("frustration", None).0)),
        ("5 ribbon factorization", Box::new(|| suite("ribbons", None).0)),
        ("6 entropic diagnostics", Box::new(criterion_6)),
        ("7 symmetry-enriched toric code", Box::new(|| suite("set", None).0)),
        ("8 character tables", Box::new(|| suite("characters", None).0)),
        ("9 determinism across thread counts", Box::new(criterion_9)),
    ];
    let mut failures = Vec::new();
    for (name, run) in criteria {
        let o = run();
        println!("criterion {name}: {} ({})", if o.ok { "PASS" } else { "FAIL" }, o.note);
        if !o.ok {
            failures.push(name);
        }
    }
    if !failures.is_empty() {
        eprintln!("failed criteria: {failures:?}");
        std::process::exit(1);
    }
}
