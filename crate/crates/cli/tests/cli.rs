use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hybrid-explain"));
    c.env_remove("SMACE_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn exported(case: &str) -> (tempfile::TempDir, PathBuf, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["reproduce", "--case", case, "--export", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let sys = dir.path().join("system.json");
    let inst = dir.path().join("instance.json");
    (dir, sys, inst)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn reproduce_rules_generic_analytic() {
    let o = run(&["reproduce", "--case", "rules-generic", "--analytic-bounds"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.lines().last() == Some("PASS"), "{out}");
    assert!(out.contains("-0.9000") && out.contains("-0.5000") && out.contains("0.8000"));
}

#[test]
fn reproduce_rules_violation_analytic() {
    let o = run(&["reproduce", "--case", "rules-violation", "--analytic-bounds"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("-0.9900"));
}

#[test]
fn unknown_case_is_usage_error() {
    let o = run(&["reproduce", "--case", "table-9"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("unknown case"));
}

#[test]
fn validate_reports_diagnostics_and_exit_status() {
    let (dir, sys, _) = exported("hybrid");
    let o = run(&["validate", "--system", s(&sys)]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "ok\n");

    let text = std::fs::read_to_string(&sys)
        .unwrap()
        .replace("\"x2\",\n        \"x3\"", "\"m2\",\n        \"x3\"");
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, text).unwrap();
    let o = run(&["validate", "--system", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("internal-model-input"), "{}", stdout(&o));
}

#[test]
fn malformed_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.json");
    std::fs::write(&p, r#"{"features": [], "policy": {"rules": []}, "extra": true}"#).unwrap();
    let o = run(&["validate", "--system", s(&p)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown field"), "{}", stderr(&o));
}

#[test]
fn explain_unknown_rule_exits_2() {
    let (_dir, sys, inst) = exported("hybrid");
    let o = run(&["explain", "--system", s(&sys), "--instance", s(&inst), "--rule", "R9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("RuleNotInPolicy"));
}

#[test]
fn explain_json_matches_library() {
    let (_dir, sys, inst) = exported("hybrid");
    let o = run(&[
        "explain",
        "--system",
        s(&sys),
        "--instance",
        s(&inst),
        "--format",
        "json",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let ex = hybrid_explain::report::explanation_from_json(&stdout(&o)).unwrap();
    assert_eq!(ex.rule, "R3");
    assert_eq!(ex.recompute(), ex.e);
    assert!(ex.e[0] < 0.0 && ex.e[1] < 0.0 && ex.e[2] > 0.0);
    assert_eq!(hybrid_explain::report::to_json(&ex), stdout(&o));
}

#[test]
fn linear_backend_agrees_with_exact() {
    let (_dir, sys, inst) = exported("hybrid");
    let get = |backend: &str| {
        let o = run(&[
            "explain",
            "--system",
            s(&sys),
            "--instance",
            s(&inst),
            "--backend",
            backend,
            "--format",
            "json",
        ]);
        hybrid_explain::report::explanation_from_json(&stdout(&o)).unwrap().e
    };
    for (a, b) in get("exact").iter().zip(get("linear")) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn seed_falls_back_to_environment() {
    let (_dir, sys, inst) = exported("hybrid");
    let args = [
        "compare",
        "--system",
        s(&sys),
        "--instance",
        s(&inst),
        "--format",
        "json",
    ];
    let with_env = bin().args(args).env("SMACE_SEED", "9").output().unwrap();
    let with_flag = run(&[&args[..], &["--seed", "9"]].concat());
    let default = run(&args);
    assert_eq!(stdout(&with_env), stdout(&with_flag));
    assert_ne!(stdout(&with_env), stdout(&default));
    assert!(stdout(&with_env).contains("\"seed\": 9"));
}

#[test]
fn compare_table_lists_requested_methods() {
    let (_dir, sys, inst) = exported("rules-generic");
    let o = run(&[
        "compare",
        "--system",
        s(&sys),
        "--instance",
        s(&inst),
        "--methods",
        "smace,shap",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let header = stdout(&o).lines().next().unwrap().to_owned();
    assert!(header.contains("smace") && header.contains("shap") && !header.contains("lime"));
}

#[test]
fn named_instance_and_missing_dataset() {
    let (dir, sys, _) = exported("rules-generic");
    let named = dir.path().join("named.json");
    std::fs::write(&named, r#"{"x1": 0.6, "x2": 0.1, "x3": 0.4}"#).unwrap();
    let o = run(&["explain", "--system", s(&sys), "--instance", s(&named)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("R1"));

    let text = std::fs::read_to_string(&sys).unwrap();
    let cut = text.find(",\n  \"dataset\"").unwrap();
    let no_data = dir.path().join("nodata.json");
    std::fs::write(&no_data, format!("{}\n}}\n", &text[..cut])).unwrap();
    let o = run(&["explain", "--system", s(&no_data), "--instance", s(&named)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no reference data"));
    let o = run(&[
        "explain",
        "--system",
        s(&no_data),
        "--instance",
        s(&named),
        "--dataset",
        s(&dir.path().join("data.csv")),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
}
