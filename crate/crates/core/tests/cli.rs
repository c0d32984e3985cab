use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_ghostgap")
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], config: &Path) -> Output {
    Command::new(bin())
        .args(args)
        .arg("--config")
        .arg(config)
        .env_remove("GHOSTGAP_BUDGET")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).unwrap()
}

#[test]
fn separation_check_single_point() {
    let out = run(&["separation-check"], &configs_dir().join("separation_single_point.json"));
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["results"]["check"], true);
    assert_eq!(report["results"]["probability"], "3/16");
    assert_eq!(report["tool"], "ghostgap");
    assert!(report["config_hash"].as_str().unwrap().len() == 64);
    assert!(report["timestamps"]["started_unix_ms"].is_u64());
}

#[test]
fn report_is_one_line() {
    let out = run(&["vcdim"], &configs_dir().join("threshold_minimal.json"));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
    let report: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(report["results"]["vc_dimension"]["value"], 1);
}

#[test]
fn exit_codes_by_category() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("parse", r#"{"domain": {"size": 3}, "bogus": 1}"#, 2, "parse"),
        ("zero_eps", r#"{"domain": {"size": 3}, "class": {"threshold": {}}, "eps": "0"}"#, 3, "validation"),
        (
            "cap",
            r#"{"domain": {"size": 10}, "class": {"threshold": {}}, "eps": "1/2", "m": 4, "budget": {"enumeration_cap": 100}}"#,
            4,
            "cap_exceeded",
        ),
        (
            "budget",
            r#"{"domain": {"size": 12}, "class": {"interval": {}}, "eps": "1/2", "budget": {"subset_cap": 3}}"#,
            4,
            "budget_exceeded",
        ),
    ];
    for (name, text, code, category) in cases {
        let path = write_config(dir.path(), &format!("{name}.json"), text);
        let cmd = if name == "budget" { "vcdim" } else { "prob-exact" };
        let out = run(&[cmd], &path);
        assert_eq!(out.status.code(), Some(code), "{name}");
        let err = stderr_json(&out);
        assert_eq!(err["error"], category, "{name}");
        assert_eq!(err["exit_code"], code);
    }
    let missing = run(&["vcdim"], &dir.path().join("absent.json"));
    assert_eq!(missing.status.code(), Some(1));
    assert_eq!(stderr_json(&missing)["error"], "io");
}

#[test]
fn parse_error_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "bad.json", "{\n  \"domain\": {\"size\": 3},\n  \"m\": -1\n}");
    let out = run(&["vcdim"], &path);
    let err = stderr_json(&out);
    assert_eq!(err["line"], 3);
    assert_eq!(err["field"], "m");
}

#[test]
fn env_budget_applies_below_config() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"domain": {"size": 4}, "class": {"threshold": {}}, "eps": "1/2", "m": 2}"#;
    let path = write_config(dir.path(), "c.json", text);
    let out = Command::new(bin())
        .args(["prob-exact", "--config"])
        .arg(&path)
        .env("GHOSTGAP_BUDGET", "enumeration_cap=10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));

    let text = r#"{"domain": {"size": 4}, "class": {"threshold": {}}, "eps": "1/2", "m": 2,
        "budget": {"enumeration_cap": 1000}}"#;
    let path = write_config(dir.path(), "d.json", text);
    let out = Command::new(bin())
        .args(["prob-exact", "--config"])
        .arg(&path)
        .env("GHOSTGAP_BUDGET", "enumeration_cap=10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn out_and_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let csv = dir.path().join("t.csv");
    let out = Command::new(bin())
        .args(["bound-check", "--config"])
        .arg(configs_dir().join("bound_sweep.json"))
        .arg("--out")
        .arg(&report)
        .arg("--csv")
        .arg(&csv)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["results"]["all_satisfied"], true);
    let table = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "m,eps,probability,probability_f64,growth_2m,bound,bound_satisfied");
    assert_eq!(lines.len(), 1 + 2 * 4);
    assert!(lines[1].starts_with("1,1/4,"));
}

#[test]
fn seed_and_trials_overrides_enter_the_hash() {
    let path = configs_dir().join("exact_vs_mc.json");
    let a = stdout_json(&run(&["prob-mc", "--trials", "2000", "--seed", "1"], &path));
    let b = stdout_json(&run(&["prob-mc", "--trials", "2000", "--seed", "2"], &path));
    assert_eq!(a["seed"], 1);
    assert_eq!(a["config"]["trials"], 2000);
    assert_ne!(a["config_hash"], b["config_hash"]);
    assert_eq!(a["results"]["estimates"][0]["trials"], 2000);
}

#[test]
fn threads_do_not_change_reports() {
    let path = configs_dir().join("exact_vs_mc.json");
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("timestamps");
        v.to_string()
    };
    let one = strip(stdout_json(&run(&["prob-mc", "--threads", "1", "--trials", "20000"], &path)));
    let eight = strip(stdout_json(&run(&["prob-mc", "--threads", "8", "--trials", "20000"], &path)));
    assert_eq!(one, eight);
}

#[test]
fn construct_dump_lists_every_parameter() {
    let out = run(&["construct-dump"], &configs_dir().join("patch_of_amalg.json"));
    let report = stdout_json(&out);
    let rows = report["results"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), report["results"]["parameters"].as_u64().unwrap() as usize);
    assert!(rows.iter().all(|r| r["labels"].as_str().unwrap().len() == 5));
}

#[test]
fn help_lists_subcommands() {
    let out = Command::new(bin()).arg("--help").output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    for cmd in [
        "vcdim", "growth", "sauer-check", "prob-exact", "prob-mc", "bound-check",
        "exchange-check", "separation-check", "pac-m", "construct-dump",
    ] {
        assert!(text.contains(cmd), "{cmd}");
    }
}
