use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    format!("{}/../../data/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

fn endwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_endwalk")).args(args).env_remove("ENDWALK_JOBS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn solve_t3_gives_mu_two() {
    let o = endwalk(&["solve", &data("t3")]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert!((v["mu_w"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert!(v["components"].as_array().unwrap().iter().any(|c| c["class"] == "IPersistent"));
}

#[test]
fn compare_triangle_edge_matches() {
    let o = endwalk(&["compare", "--n", "12", &data("triangle_edge")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("12/12 coefficients match"));
}

#[test]
fn validate_reports_bad_ports() {
    let o = endwalk(&["validate", &fixture("bad_ports")]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["valid"], false);
    assert!(!v["violations"].as_array().unwrap().is_empty());
}

#[test]
fn validate_accepts_bundled_templates() {
    for name in ["double_ray", "t3", "triangle_edge", "k4_edge", "hex_tree"] {
        let o = endwalk(&["validate", &data(name)]);
        assert_eq!(o.status.code(), Some(0), "{name}");
        assert_eq!(json(&o)["valid"], true);
    }
}

#[test]
fn invalid_template_fails_other_commands() {
    let o = endwalk(&["series", &fixture("bad_ports")]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(endwalk(&["bogus"]).status.code(), Some(64));
    assert_eq!(endwalk(&[]).status.code(), Some(64));
    assert_eq!(endwalk(&["series", "--n", "x", &data("t3")]).status.code(), Some(64));
    assert_eq!(endwalk(&["system", "--format", "csv", &data("t3")]).status.code(), Some(64));
    assert_eq!(endwalk(&["--help"]).status.code(), Some(0));
}

#[test]
fn resource_limit_exits_2() {
    let o = endwalk(&["oracle", "--n", "20", "--instance-cap", "100", &data("t3")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn jobs_env_overrides_flag() {
    let run = |env: &str| {
        Command::new(env!("CARGO_BIN_EXE_endwalk"))
            .args(["--jobs", "1", "series", "--n", "5", &data("t3")])
            .env("ENDWALK_JOBS", env)
            .output()
            .unwrap()
    };
    assert_eq!(run("2").status.code(), Some(0));
    assert_eq!(run("many").status.code(), Some(64));
}

#[test]
fn output_is_deterministic() {
    let a = endwalk(&["system", &data("triangle_edge")]);
    let b = endwalk(&["--jobs", "3", "system", &data("triangle_edge")]);
    assert_eq!(a.stdout, b.stdout);
    let s = endwalk(&["solve", &data("k4_edge")]);
    assert_eq!(s.stdout, endwalk(&["solve", &data("k4_edge")]).stdout);
    let text = stdout(&s);
    let keys: Vec<&str> = text.lines().filter(|l| l.starts_with("  \"")).map(|l| l.trim().split('"').nth(1).unwrap()).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn series_with_returns_csv() {
    let o = endwalk(&["series", "--n", "4", "--returns", "--format", "csv", &data("k4_edge")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "n,c,sar\n0,1,0\n1,4,4\n2,12,6\n3,30,6\n4,72,0\n");
}

#[test]
fn oracle_and_series_agree_on_double_ray() {
    let s = json(&endwalk(&["series", "--n", "6", &data("double_ray")]));
    let o = json(&endwalk(&["oracle", "--n", "6", &data("double_ray")]));
    assert_eq!(s["c"], serde_json::json!([1, 2, 2, 2, 2, 2, 2]));
    assert_eq!(s["c"], o["c"]);
}

#[test]
fn configs_lists_tags() {
    let v = json(&endwalk(&["configs", &data("triangle_edge")]));
    let classes = v["classes"].as_array().unwrap();
    assert_eq!(classes.len(), 12);
    assert!(classes.iter().any(|c| c["tags"].as_array().unwrap().iter().any(|t| t == "simple")));
    assert!(classes.iter().all(|c| !c["tags"].as_array().unwrap().iter().any(|t| t == "boring")));
}

#[test]
fn ballistic_reports_each_length() {
    let v = json(&endwalk(&["ballistic", "--from", "6", "--n", "8", &data("triangle_edge")]));
    let lens = v["lengths"].as_array().unwrap();
    assert_eq!(lens.len(), 3);
    assert!(lens.iter().all(|l| l["mean_over_n"].as_f64().unwrap() >= 0.3));
}

#[test]
fn explain_prints_complete_arrangement() {
    let o = endwalk(&["explain", &data("triangle_edge"), "0,1,2"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["weight"], 2);
    assert_eq!(v["complete"], true);
    assert_eq!(endwalk(&["explain", &data("triangle_edge"), "0,0"]).status.code(), Some(1));
    assert_eq!(endwalk(&["explain", &data("triangle_edge"), "a,b"]).status.code(), Some(64));
}

#[test]
fn output_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("endwalk-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("series.json");
    let o = endwalk(&["series", "--n", "3", "-o", path.to_str().unwrap(), &data("t3")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["c"], serde_json::json!([1, 3, 6, 12]));
    std::fs::remove_dir_all(dir).unwrap();
}
