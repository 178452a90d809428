use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn polycond(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polycond")).args(args).output().unwrap()
}

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn phi_matches_closed_forms() {
    for (name, expected) in [
        ("simplex(4)", 1.0),
        ("l1ball(2)", 1.0),
        ("simplex(5)", 2.0 / (5.0f64 - 0.2).sqrt()),
    ] {
        let v = json(&polycond(&["phi", "--builtin", name]));
        let phi = v["phi"].as_f64().unwrap();
        assert!((phi - expected).abs() < 1e-9, "{name}: {phi}");
        assert!(v["face"]["atom_indices"].is_array());
    }
}

#[test]
fn constants_on_fixture() {
    let v = json(&polycond(&["constants", "--problem", &fixture("flat_direction.json")]));
    assert_eq!(v["mu_rel"].as_f64(), Some(0.0));
    assert!((v["mu_star_lb"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    // Infinite κ has no JSON number.
    assert!(v["kappa_rel"].is_null());

    let v = json(&polycond(&["constants", "--builtin", "simplex(4)"]));
    assert!((v["kappa_rel"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn solve_writes_trace_and_verify_accepts_it() {
    let dir = tempfile::tempdir().unwrap();
    for algo in ["fw-away", "pg"] {
        let trace = dir.path().join(format!("{algo}.csv"));
        let t = trace.to_str().unwrap();
        let out = polycond(&["solve", "--builtin", "simplex(4)", "--algo", algo, "--iters", "200", "--out", t]);
        assert!(out.status.success());
        let text = fs::read_to_string(&trace).unwrap();
        assert!(text.starts_with("k,f,gap,step_type,alpha,alpha_max,support_size\n"));

        let verdict = dir.path().join(format!("{algo}.verdict.csv"));
        let out = polycond(&[
            "verify",
            "--builtin",
            "simplex(4)",
            "--trace",
            t,
            "--out",
            verdict.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let rows = fs::read_to_string(&verdict).unwrap();
        assert!(rows.lines().nth(1).unwrap().ends_with(",true"));
    }
}

#[test]
fn violated_trace_exits_one_and_first_row_passes() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("stuck.csv");
    // f★ = 1/8 on simplex(4); the objective never moves off 0.5.
    let mut text = String::from("k,f,gap,step_type,alpha,alpha_max,support_size\n");
    for k in 0..40 {
        text.push_str(&format!("{k},5.0e-1,1.0e0,regular,0,1,1\n"));
    }
    fs::write(&trace, text).unwrap();
    let out = polycond(&["verify", "--builtin", "simplex(4)", "--trace", trace.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k,gap,bound,holds"));
    assert!(lines.next().unwrap().ends_with(",true"));
    assert!(csv.contains(",false"));
}

#[test]
fn linear_objective_takes_one_step() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("linear.json");
    fs::write(
        &p,
        r#"{"atoms": [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
            "objective": {"quadratic": {"q": [[0, 0, 0], [0, 0, 0], [0, 0, 0]], "b": [3, -1, 2]}}}"#,
    )
    .unwrap();
    let out = polycond(&["solve", "--problem", p.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("1,-1.0000000000000000e0,"));
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\n  \"atoms\": [[1, 0],\n   [0, 1]]\n  \"objective\": 3\n}").unwrap();
    let out = polycond(&["phi", "--problem", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));

    let mismatch = dir.path().join("mismatch.json");
    fs::write(
        &mismatch,
        r#"{"atoms": [[1, 0], [0, 1]], "objective": {"quadratic": {"q": [[1, 0, 0], [0, 1, 0], [0, 0, 1]], "b": [0, 0, 0]}}}"#,
    )
    .unwrap();
    let out = polycond(&["constants", "--problem", mismatch.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("objective.q"));

    assert_eq!(polycond(&["phi"]).status.code(), Some(2));
    assert_eq!(polycond(&["phi", "--builtin", "simplex(1)"]).status.code(), Some(2));
    let cap = polycond(&["phi", "--builtin", "random_quadratic(2,17,0,1)"]);
    assert_eq!(cap.status.code(), Some(2));
}

#[test]
fn estimate_is_reproducible_across_thread_counts() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_polycond"))
            .args(["estimate", "--builtin", "random_quadratic(3,5,2,4)", "--samples", "500", "--seed", "9"])
            .env("POLYCOND_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    let four = run("4");
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stdout, run("1").stdout);
}

#[test]
fn grid_estimate_on_fixture() {
    let v = json(&polycond(&["estimate", "--problem", &fixture("flat_direction.json"), "--grid", "0.01", "--samples", "50"]));
    let mu = v["mu_star"]["estimate"].as_f64().unwrap();
    assert!((0.45..=0.55).contains(&mu), "{mu}");
}
