use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dcoset"))
}

fn instance(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("instances").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

#[test]
fn z5_orbits() {
    let out = run(&["orbits", "--instance", &instance("z5_times2.json")]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["results"]["count"], 2);
    assert_eq!(r["results"]["sizes"], serde_json::json!([4, 1]));
    assert_eq!(r["instance_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn load_errors_have_distinct_codes() {
    let out = run(&["orbits", "--instance", &instance("torsion_violation.json")]);
    assert_eq!(out.status.code(), Some(6));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("derivation.values[0]"), "{err}");

    assert_eq!(run(&["orbits", "--instance", &instance("empty.json")]).status.code(), Some(4));
    assert_eq!(run(&["orbits", "--instance", "/no/such/file.json"]).status.code(), Some(3));
    assert_eq!(run(&["orbits"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn schema_error_names_the_field() {
    let dir = std::env::temp_dir().join(format!("dcoset-schema-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.json");
    std::fs::write(
        &path,
        r#"{"schema_version": 1, "acting_group": {"free_rank": 1},
            "module": {"group": {"free_rank": 0, "torsion": [5]}, "action": [[[2, 1]]]}}"#,
    )
    .unwrap();
    let out = run(&["orbits", "--instance", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&out.stderr).contains("module.action[0][0]"));
}

#[test]
fn caps_and_refusals() {
    let z5 = instance("z5_times2.json");
    assert_eq!(run(&["orbits", "--instance", &z5, "--cap-elements", "3"]).status.code(), Some(7));
    // brute force needs a finite acting group
    assert_eq!(run(&["doublecosets", "--method", "bruteforce", "--instance", &z5]).status.code(), Some(8));
}

#[test]
fn double_cosets_both_methods_agree() {
    let out = run(&["doublecosets", "--method", "both", "--instance", &instance("z3sq_swap.json")]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["results"]["counts_agree"], true);
    assert_eq!(r["results"]["orbits"]["count"], r["results"]["bruteforce"]["count"]);

    let out = run(&["verify-bijection", "--instance", &instance("z3sq_swap.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["results"]["passed"], true);
}

#[test]
fn restrict_on_sample() {
    let out = run(&["check-restrict", "--instance", &instance("z3sq_swap.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["results"]["passed"], true);
}

#[test]
fn algebra_commands() {
    let out = run(&["minpoly", "--instance", &instance("z2_cubic.json")]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["results"]["minimal_polynomial"]["text"], "X^3 + X + 1");

    let out = run(&["collision-poly", "--instance", &instance("z2_cubic.json")]);
    assert_eq!(out.status.code(), Some(0));
    let checks = &report(&out)["results"]["checks"];
    assert_eq!(checks["f_vanishes"], true);
    assert_eq!(checks["relation_holds"], true);

    let out = run(&["collision-poly", "--instance", &instance("z2_cubic.json"), "--prime-budget", "0"]);
    assert_eq!(out.status.code(), Some(7));
}

#[test]
fn norm_commands() {
    let out = run(&["norm", "--instance", &instance("quadratic_field.json")]);
    assert_eq!(out.status.code(), Some(0));
    // N(1 + sqrt 2) = -1
    assert_eq!(report(&out)["results"]["norms"][0]["norm"], "-1");

    let out = run(&["nu-scaled", "--mu", "-2,0,1", "--n", "7"]);
    let r = report(&out);
    // 49 * (1/49 - 2)
    assert_eq!(r["results"]["value"], "-97");
    assert_eq!(r["results"]["agree"], true);

    let out = run(&["coprimality", "--mu", "1,-3,1", "--n-max", "50"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(run(&["nu-scaled", "--mu", "1,2", "--n", "3"]).status.code(), Some(2));
}

#[test]
fn selftest_budget_zero_is_empty() {
    let out = run(&["selftest", "--budget", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["results"]["suites"], serde_json::json!({}));
}

#[test]
fn selftest_catches_untwisted_multiplication() {
    let out = run(&["selftest", "--seed", "42", "--budget", "5", "--mutate", "untwisted"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    let suite = &r["results"]["suites"]["verify_bijection"];
    assert!(suite["failed"].as_u64().unwrap() > 0);
    let witness = &suite["first_failure"]["witness"]["instance"];
    assert_eq!(witness["schema_version"], 1);
    // the witness is itself a loadable instance
    let dir = std::env::temp_dir().join(format!("dcoset-witness-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("witness.json");
    std::fs::write(&path, witness.to_string()).unwrap();
    let out = run(&["verify-bijection", "--instance", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn out_flag_and_timing() {
    let dir = std::env::temp_dir().join(format!("dcoset-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("r.json");
    let out = run(&["orbits", "--instance", &instance("z5_times2.json"), "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(!text.contains("timing_ms"));
    let out = run(&["orbits", "--instance", &instance("z5_times2.json"), "--timing"]);
    assert!(report(&out).get("timing_ms").is_some());
}

#[test]
fn help_documents_exit_codes() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for code in 0..=8 {
        assert!(text.contains(&format!("  {code}  ")), "exit code {code} missing from help");
    }
}
