use std::fs;
use std::process::Command;

use eema_sim::export::from_json;
use eema_sim::Body;

fn sim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sim"))
}

const SMALL: &str = r#"
experiment = "energy"
protocols = ["eema", "heed"]
seeds = [3, 8]

[scenario]
preset = "scenario1"
n_nodes = 50
field_size_m = 200.0
bs_position = { x = 100.0, y = 100.0 }
initial_energy = 0.05
"#;

#[test]
fn energy_csv_carries_digest_seeds_and_one_row_per_round() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    fs::write(&cfg, SMALL).unwrap();
    let csv = dir.path().join("out/results.csv");
    let status = sim().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&csv).status().unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&csv).unwrap();
    let comments: Vec<&str> = text.lines().filter(|l| l.starts_with('#')).collect();
    assert!(comments.iter().any(|l| l.starts_with("# config_digest=") && l.len() == "# config_digest=".len() + 64));
    assert!(comments.contains(&"# seeds=3 8"));
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "protocol,seed_count,round,alive,energy_j,messages_ch,messages_sch,delivered,delay_tu");

    let json = dir.path().join("results.json");
    let status = sim().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&json).status().unwrap();
    assert!(status.success());
    let out = from_json(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(out.seeds, [3, 8]);
    let Body::Runs { summaries, runs } = &out.body else { panic!("wrong body") };
    assert_eq!(runs.len(), 4);
    let rounds: usize = summaries.iter().map(|s| s.mean_energy.len()).sum();
    assert_eq!(rows.len() - 1, rounds);
    assert!(rows[1..].iter().all(|r| r.split(',').nth(1) == Some("2")));
    // Same spec, same digest in both formats.
    assert!(comments.contains(&format!("# config_digest={}", out.config_digest).as_str()));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    fs::write(&cfg, SMALL).unwrap();
    let json = dir.path().join("r.json");
    let status = sim()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--protocol", "flat", "--seeds", "1", "--format", "json", "--out"])
        .arg(&json)
        .status()
        .unwrap();
    assert!(status.success());
    let out = from_json(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(out.seeds, [0]);
    let Body::Runs { summaries, .. } = &out.body else { panic!("wrong body") };
    assert_eq!(summaries.len(), 1);
    assert_eq!(summaries[0].protocol, "flat");
}

#[test]
fn unknown_protocol_is_a_usage_error() {
    let out = sim().args(["run", "--experiment", "lifetime", "--protocol", "eema,spin"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("spin"));
}

#[test]
fn unknown_config_key_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "experiment = \"lifetime\"\n\n[sim]\nround_kap = 4\n").unwrap();
    let out = sim().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.toml:4"), "{err}");
    assert!(err.contains("round_kap"), "{err}");
}

#[test]
fn oversized_super_cluster_range_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("rs.toml");
    fs::write(&cfg, "experiment = \"lifetime\"\n[scenario]\nr_s = 300.0\n").unwrap();
    let out = sim().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("r_s"));
}

#[test]
fn analyze_prints_expectations() {
    let out = sim().args(["analyze", "--scenario", "scenario1"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("lambda           0.0003"), "{text}");
    assert!(text.contains("n_s              4"), "{text}");
}

#[test]
fn analyze_csv_export() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("a.csv");
    let status = sim().args(["analyze", "--scenario", "scenario2", "--out"]).arg(&csv).status().unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.contains("# seeds="));
    assert!(text.contains("quantity,value\n"));
    assert!(text.contains("lambda,0.00025\n"));
}

#[test]
fn log_level_comes_from_the_environment() {
    let out = sim().env("EEMA_LOG", "info").args(["analyze", "--scenario", "scenario1"]).output().unwrap();
    assert!(String::from_utf8_lossy(&out.stderr).contains("analyze"));
    let quiet = sim().env_remove("EEMA_LOG").args(["analyze", "--scenario", "scenario1"]).output().unwrap();
    assert!(quiet.stderr.is_empty());
}
