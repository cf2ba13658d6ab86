use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bvlaw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bvlaw")).args(args).output().unwrap()
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).to_path_buf()
}

fn scenario(name: &str) -> String {
    root().join("../../scenarios").join(name).to_string_lossy().into_owned()
}

fn strip_header(text: &str) -> String {
    text.lines().filter(|l| !l.contains("generated_unix_seconds")).collect::<Vec<_>>().join("\n")
}

#[test]
fn constants_table() {
    let out = bvlaw(&["constants", "--max-dimension", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.contains("1.5707963268"), "{text}");
}

#[test]
fn run_is_repeatable() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = scenario("tv-burgers.json");
    for dir in [&a, &b] {
        let out = bvlaw(&["run", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for file in ["tv_theorem_r1.json", "tv_special_ck_r2.json", "summary.csv", "u_r2.csv"] {
        let x = fs::read_to_string(a.path().join("tv-burgers").join(file)).unwrap();
        let y = fs::read_to_string(b.path().join("tv-burgers").join(file)).unwrap();
        assert_eq!(strip_header(&x), strip_header(&y), "{file}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.path().join("tv-burgers/tv_theorem_r1.json")).unwrap()).unwrap();
    for key in ["estimate_id", "lhs", "rhs", "terms", "coefficients", "grid", "verdict"] {
        assert!(report["body"].get(key).is_some(), "missing {key}");
    }
}

#[test]
fn violated_at_both_resolutions_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = root().join("tests/fixtures/violating.json");
    let out = bvlaw(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let summary = fs::read_to_string(dir.path().join("violating/summary.csv")).unwrap();
    assert_eq!(summary.matches(",violated").count(), 2, "{summary}");
}

#[test]
fn loose_tolerance_overrides_the_violation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = root().join("tests/fixtures/violating.json");
    let out = bvlaw(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--tolerance-abs",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("broken.json");
    fs::write(
        &cfg,
        "{\n  \"schema_version\": 1,\n  \"name\": \"broken\",\n  \"model\": {\"dimension\": 1, \"flux\": {\"id\": \"burgers\"}},\n  \"initial_data\": {\"id\": \"zero\"},\n  \"estimates\": [\"tv_theorem\"]\n}\n",
    )
    .unwrap();
    let out = bvlaw(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("`grid`") && err.contains("line"), "{err}");
}

#[test]
fn suite_isolates_failures_and_warns_when_empty() {
    let empty = tempfile::tempdir().unwrap();
    let out_dir = tempfile::tempdir().unwrap();
    let out = bvlaw(&["suite", "--config", empty.path().to_str().unwrap(), "--out", out_dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));

    let mixed = tempfile::tempdir().unwrap();
    fs::copy(scenario("tv-burgers.json"), mixed.path().join("a.json")).unwrap();
    fs::write(mixed.path().join("b.json"), "{ not json").unwrap();
    let out = bvlaw(&[
        "suite",
        "--config",
        mixed.path().to_str().unwrap(),
        "--out",
        out_dir.path().to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let summary = fs::read_to_string(out_dir.path().join("summary.csv")).unwrap();
    assert!(summary.contains("tv-burgers,1,tv_theorem"), "{summary}");
    assert!(summary.contains("b,,,,,,error: config error"), "{summary}");
}

#[test]
fn converge_needs_three_scales() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario("tv-burgers.json");
    let d = dir.path().to_str().unwrap();
    let out = bvlaw(&["converge", "--config", &cfg, "--out", d, "--resolution-scale", "1,2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("need ≥ 3"));

    let out = bvlaw(&["converge", "--config", &cfg, "--out", d, "--resolution-scale", "1,2,4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("observed order"));
    let table = fs::read_to_string(dir.path().join("tv-burgers/convergence.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 3 * 2);
}
