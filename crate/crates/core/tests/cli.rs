use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_thinshell");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn thinshell")
}

fn csv_rows(dir: &Path) -> Vec<String> {
    let text = std::fs::read_to_string(dir.join("report.csv")).unwrap();
    text.lines().skip(1).map(str::to_owned).collect()
}

#[test]
fn malformed_config_exits_2_and_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "[experiment]\nname = thinshell\nsamples = many\n").unwrap();
    let out = run(&["thinshell", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("samples"));
}

#[test]
fn invalid_body_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("body.cfg");
    std::fs::write(&cfg, "[experiment]\nname = thinshell\n[body]\nkind = lp_ball\np = 0.5\n").unwrap();
    let out = run(&["thinshell", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn identities_pass_with_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["identities", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(dir.path());
    assert_eq!(rows.len(), 36);
    assert!(rows.iter().all(|r| r.starts_with("identities,")));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["passed"], serde_json::Value::Bool(true));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.cfg");
    std::fs::write(
        &cfg,
        "[experiment]\nname = thinshell\nn_grid = 4, 8\nsamples = 2000\nseed = 11\n[body]\nkind = cube\n[body]\nkind = lp_ball\np = 1\n",
    )
    .unwrap();
    let mut reports = Vec::new();
    for k in 0..2 {
        let out_dir = dir.path().join(format!("run{k}"));
        let out = run(&["thinshell", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
        assert!(out.status.code().is_some_and(|c| c <= 1), "{}", String::from_utf8_lossy(&out.stderr));
        reports.push(std::fs::read(out_dir.join("report.csv")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn seed_flag_changes_samples() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.cfg");
    std::fs::write(&cfg, "[experiment]\nname = thinshell\nn_grid = 4\nsamples = 500\n[body]\nkind = cube\n").unwrap();
    let mut reports = Vec::new();
    for seed in ["1", "2"] {
        let out_dir = dir.path().join(seed);
        run(&["thinshell", "--config", cfg.to_str().unwrap(), "--seed", seed, "--out", out_dir.to_str().unwrap()]);
        reports.push(std::fs::read(out_dir.join("report.csv")).unwrap());
    }
    assert_ne!(reports[0], reports[1]);
}

#[test]
fn version_reports_rng() {
    let out = run(&["version"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains(env!("CARGO_PKG_VERSION")));
    assert!(text.to_lowercase().contains("chacha"), "{text}");
}
