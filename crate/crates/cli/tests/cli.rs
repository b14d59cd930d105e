use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const EXAMPLE: [&str; 8] = [
    "--alpha",
    "0.02,0.04,0.06",
    "--beta",
    "0.2,0.5,0.7",
    "--alpha-star",
    "0.01,0.03,0.05",
    "--beta-star",
    "0.1,0.3,0.5",
];

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_lfr-stoch"));
    c.env_remove("LFR_STOCH_OUT");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&o.stdout),
            String::from_utf8_lossy(&o.stderr)
        )
    })
}

#[test]
fn compare_hazard_example_holds() {
    let mut args = vec!["compare", "--relation", "hr"];
    args.extend(EXAMPLE);
    let o = run(&args);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["verdict"]["status"], "holds");
    assert!((v["verdict"]["margin"].as_f64().unwrap() - 0.03).abs() < 1e-12);
}

#[test]
fn compare_with_itself_has_zero_margin() {
    let o = run(&[
        "compare", "--relation", "st", "--alpha", "0.3,0.1", "--beta", "1,2", "--alpha-star", "0.3,0.1",
        "--beta-star", "1,2",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["verdict"]["margin"], 0.0);
}

#[test]
fn compare_lr_counterexample_reports_witnesses() {
    let o = run(&[
        "compare", "--relation", "lr", "--alpha", "0.1,0.3,0.5", "--beta", "0.1", "--alpha-star", "0.2,0.4,0.6",
        "--beta-star", "0.1",
    ]);
    assert_eq!(code(&o), 3);
    let v = stdout_json(&o);
    assert_eq!(v["verdict"]["status"], "violated");
    assert!(!v["verdict"]["witnesses"].as_array().unwrap().is_empty());
}

#[test]
fn compare_input_errors() {
    let o = run(&["compare", "--relation", "hr", "--alpha", "0.1", "--beta", "1"]);
    assert_eq!(code(&o), 2);
    assert!(o.stdout.is_empty());
    let o = run(&["compare", "--relation", "bogus"]);
    assert_eq!(code(&o), 2);
    let o = run(&["compare", "--relation", "st", "--alpha", "-1", "--beta", "1", "--alpha-star", "1", "--beta-star", "1"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha"));
}

#[test]
fn regress_writes_summary_and_curves() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["regress", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["case_count"], 14);
    assert_eq!(v["mismatch_count"], 0);
    let csvs = fs::read_dir(&out)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv"))
        .count();
    assert!(csvs >= 12, "{csvs} csv files");
    let cases: Value = serde_json::from_str(&fs::read_to_string(out.join("cases.json")).unwrap()).unwrap();
    assert_eq!(cases["records"].as_array().unwrap().len(), 14);
}

#[test]
fn regress_is_tolerance_stable() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["regress", "--tol", "1e-3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn regress_uses_env_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["regress"])
        .env("LFR_STOCH_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("cases.json").exists());
}

#[test]
fn regress_preset_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["regress", "--dump-presets"]);
    assert_eq!(code(&o), 0);
    let presets = dir.path().join("presets.json");
    fs::write(&presets, &o.stdout).unwrap();
    let out = dir.path().join("out");
    let o = run(&["regress", "--presets", presets.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);

    // a counterexample relabelled as an example is a mismatch
    let mut cases: Value = serde_json::from_slice(&fs::read(&presets).unwrap()).unwrap();
    cases[1]["expected"] = Value::String("holds".into());
    fs::write(&presets, cases.to_string()).unwrap();
    let o = run(&["regress", "--presets", presets.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("MISMATCH"));

    fs::write(&presets, "[{\"label\": 1}]").unwrap();
    let o = run(&["regress", "--presets", presets.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let bad = cases.to_string().replacen("0.02", "-0.02", 1);
    fs::write(&presets, bad).unwrap();
    let o = run(&["regress", "--presets", presets.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn search_exit_codes() {
    let o = run(&["search", "--relation", "hr", "--regime", "alpha_le,beta_ge", "--box", "0.01,1", "--seed", "3"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["result"]["found"], true);
    assert_eq!(v["result"]["verdict"]["status"], "violated");

    let o = run(&["search", "--relation", "st", "--regime", "alpha_ge,beta_ge", "--budget", "10000"]);
    assert_eq!(code(&o), 5);
    assert_eq!(stdout_json(&o)["result"]["trials_used"], 10000);

    let o = run(&["search", "--relation", "st", "--box", "2,1"]);
    assert_eq!(code(&o), 2);
    let o = run(&["search", "--relation", "st", "--regime", "alpha_sideways"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn search_is_seed_deterministic() {
    let args = ["search", "--relation", "st", "--kind", "parallel", "--regime", "alpha_le,beta_ge", "--seed", "11"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn mc_exit_codes() {
    let sys = ["--alpha", "0.2,0.4,0.6", "--beta", "0.8,1,1.5", "--kind", "parallel"];
    let mut args = vec!["mc", "--size", "100000", "--seed", "5"];
    args.extend(sys);
    let o = run(&args);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert!(v["report"]["statistic"].as_f64().unwrap() < v["report"]["threshold"].as_f64().unwrap());

    let mut args = vec!["mc", "--size", "10"];
    args.extend(sys);
    assert_eq!(code(&run(&args)), 2);

    let mut args = vec!["mc", "--size", "10000", "--against-kind", "series"];
    args.extend(sys);
    assert_eq!(code(&run(&args)), 3);
}

#[test]
fn mc_writes_samples() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let o = run(&[
        "mc", "--size", "200", "--alpha", "1", "--beta", "1", "--samples-out", path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(path).unwrap();
    assert!(text.starts_with("# {"));
    assert_eq!(text.lines().count(), 202);
}

fn write_scenario(dir: &Path, body: &str) -> String {
    let p = dir.join("scenario.json");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const SCENARIO: &str = r#"{
  "version": 1,
  "seed": 4,
  "systems": {
    "x": { "kind": "series", "components": [
      { "alpha": 0.02, "beta": 0.2 }, { "alpha": 0.04, "beta": 0.5 }, { "alpha": 0.06, "beta": 0.7 } ] },
    "y": { "kind": "series", "components": [
      { "alpha": 0.01, "beta": 0.1 }, { "alpha": 0.03, "beta": 0.3 }, { "alpha": 0.05, "beta": 0.5 } ] }
  },
  "tasks": [
    { "task": "compare", "a": "x", "b": "y", "relation": "hr" },
    { "task": "theorem", "theorem": "series_st", "x": "x", "y": "y" },
    { "task": "mc", "system": "x", "size": 20000 },
    { "task": "curve", "figure_id": "hr_gap", "quantity": "hrf_diff", "x": "x", "y": "y" }
  ]
}"#;

#[test]
fn run_scenario_tasks() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), SCENARIO);
    let out = dir.path().join("curves");
    let o = run(&["run", "--scenario", &path, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 4);
    assert_eq!(results[1]["case"]["conditions_met"], true);
    let csv = fs::read_to_string(out.join("hr_gap.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1002);

    // compare with named systems, flags overriding the grid size
    let o = run(&["compare", "--scenario", &path, "--a", "y", "--b", "x", "--relation", "st", "--grid-n", "50"]);
    assert_eq!(code(&o), 3);
    assert_eq!(stdout_json(&o)["verdict"]["resolution"], 50);

    let o = run(&["mc", "--scenario", &path, "--system", "x", "--against", "y", "--size", "5000"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn inconclusive_exit() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{
      "version": 1,
      "tolerance": { "sf_floor": 0.5 },
      "systems": { "p": { "kind": "parallel", "components": [ { "alpha": 1, "beta": 1 }, { "alpha": 2, "beta": 0 } ] } },
      "tasks": [ { "task": "compare", "a": "p", "b": "p", "relation": "hr" } ]
    }"#;
    let path = write_scenario(dir.path(), body);
    let o = run(&["run", "--scenario", &path, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 4);
}

#[test]
fn scenario_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), &SCENARIO.replace("\"version\": 1", "\"version\": 9"));
    assert_eq!(code(&run(&["run", "--scenario", &path])), 2);
    let path = write_scenario(dir.path(), &SCENARIO.replace("\"a\": \"x\"", "\"a\": \"nope\""));
    assert_eq!(code(&run(&["run", "--scenario", &path])), 2);
    assert_eq!(code(&run(&["run", "--scenario", "/nonexistent/scenario.json"])), 2);
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}
