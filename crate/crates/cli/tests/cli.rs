use std::path::Path;

use qforge::catalog::{make_test_state, StateKind};
use qforge_cli::{run, EXIT_ERROR, EXIT_OK, EXIT_VIOLATION};

struct Output {
    code: i32,
    out: String,
    err: String,
}

fn qforge(args: &[&str]) -> Output {
    let mut argv = vec!["qforge"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    Output { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_ghz3_writes_432_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("ghz3.json");
    let r = qforge(&["generate", "--seed", "ghz:3", "--out", path_str(&file)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert!(r.out.lines().any(|l| l == "conditions: 432"));
    let set = qforge::forge::ConditionSet::load(&file).unwrap();
    assert_eq!(set.len(), 432);
}

#[test]
fn check_werner_half_against_bell_set() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bell2.json");
    assert_eq!(qforge(&["generate", "--seed", "bell:2", "--out", path_str(&file)]).code, EXIT_OK);
    let r = qforge(&["check", "--set", path_str(&file), "--state", "werner:0.5"]);
    assert_eq!(r.code, EXIT_VIOLATION);
    let hits: Vec<&str> = r.out.lines().filter(|l| l.ends_with("yes")).collect();
    assert_eq!(hits.len(), 1);
    assert!(hits[0].contains("0.625000000"));
    assert!(r.out.contains("violated: 1 of 24"));
    assert!(!r.out.contains("SANITY_FAIL"));

    let quiet = qforge(&["check", "--set", path_str(&file), "--state", "werner:0.2", "--violated-only"]);
    assert_eq!(quiet.code, EXIT_OK);
    assert!(quiet.out.contains("violated: 0 of 24"));
}

#[test]
fn overlap_of_w3() {
    let r = qforge(&["overlap", "--seed", "w:3"]);
    assert_eq!(r.code, EXIT_OK);
    let line = r.out.lines().find(|l| l.starts_with("P_E = ")).unwrap();
    let v: f64 = line["P_E = ".len()..].parse().unwrap();
    assert!((v - 4.0 / 9.0).abs() < 1e-6);
}

#[test]
fn identical_inputs_give_identical_output() {
    let args = ["overlap", "--seed", "h:3", "--restarts", "16", "--prng-seed", "7"];
    assert_eq!(qforge(&args).out, qforge(&args).out);
    let rep = ["report", "--seed", "ghz:3", "--state", "sigma_b:0.1", "--json"];
    assert_eq!(qforge(&rep).out, qforge(&rep).out);
}

#[test]
fn settings_for_hypergraph_seed() {
    let r = qforge(&["settings", "--seed", "h:3"]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.out.contains("total settings: 27"));
    assert!(r.out.contains("support size: 28 non-identity labels"));
    assert!(r.out.contains("settings needed: 13"));
    assert!(r.out.contains("minimal: true"));
}

#[test]
fn catalog_lists_ids() {
    let r = qforge(&["catalog"]);
    assert_eq!(r.code, EXIT_OK);
    for id in ["bell:", "ghz:", "w:", "h:", "upb3", "werner:", "rho_a:", "sigma_b:"] {
        assert!(r.out.contains(id), "{id}");
    }
}

#[test]
fn report_json_and_text() {
    let r = qforge(&["report", "--seed", "w:3", "--state", "sigma_b:0.1", "--json"]);
    assert_eq!(r.code, EXIT_VIOLATION, "{}", r.err);
    let doc: serde_json::Value = serde_json::from_str(&r.out).unwrap();
    assert_eq!(doc["conditions"]["count"], 3456);
    assert_eq!(doc["settings"]["needed"], 7);
    assert!(!doc["check"]["violated"].as_array().unwrap().is_empty());

    let t = qforge(&["report", "--seed", "bell:3"]);
    assert_eq!(t.code, EXIT_OK);
    assert!(t.out.contains("conditions: 216"));
    assert!(t.out.contains("P_E = 0.333333333"));
}

#[test]
fn state_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("bell3.json");
    let state = dir.path().join("rho.json");
    make_test_state(StateKind::RhoA, 0.35).unwrap().state.save(&state).unwrap();
    assert_eq!(qforge(&["generate", "--seed", "bell:3", "--out", path_str(&set)]).code, EXIT_OK);
    let r = qforge(&["check", "--set", path_str(&set), "--state", path_str(&state)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert!(r.out.contains("violated: 0 of 216"));
}

#[test]
fn errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let r = qforge(&["overlap", "--seed", "nope:3"]);
    assert_eq!(r.code, EXIT_ERROR);
    assert!(r.err.starts_with("error:"));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"format\": 1}").unwrap();
    let r = qforge(&["check", "--set", path_str(&bad), "--state", "werner:0.5"]);
    assert_eq!(r.code, EXIT_ERROR);
    assert!(!r.err.is_empty());

    let set = dir.path().join("bell2.json");
    assert_eq!(qforge(&["generate", "--seed", "bell:2", "--out", path_str(&set)]).code, EXIT_OK);
    let r = qforge(&["check", "--set", path_str(&set), "--state", "rho_a:0.5"]);
    assert_eq!(r.code, EXIT_ERROR);
    assert!(r.err.contains("dimension mismatch"));

    let r = qforge(&["check", "--set", path_str(&set), "--state", "ghz:3"]);
    assert_eq!(r.code, EXIT_ERROR);

    assert_eq!(qforge(&["frobnicate"]).code, EXIT_ERROR);
    assert_eq!(qforge(&["generate", "--seed", "bell:2", "--out", path_str(&set), "--bound", "2"]).code, EXIT_ERROR);
}

#[test]
fn help_documents_exit_codes() {
    let r = qforge(&["--help"]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.out.contains("Exit status: 0 on success, 1 on error, 2"));
}
