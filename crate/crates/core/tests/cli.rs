mod common;

use common::*;
use valign::harness::load_runs;

fn read(p: &std::path::Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn synth_then_ceiling_is_perfect_at_zero_noise() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--interviews", "15", "--epsilon", "0", "--out", "s"]);
    ok(d, &["ceiling", "--panel", "s/panel.json", "--out", "c"]);
    let csv = read(&d.join("c/ceiling.csv"));
    let overall = csv.lines().find(|l| l.starts_with("overall")).unwrap();
    assert_eq!(overall, "overall,90,100.00,0.00,100.00,0.00,100.00,0.00");
}

#[test]
fn clone_models_score_perfectly_against_their_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("cfg.toml"),
        r#"
n_interviews = 10
seed = 2

[[groups]]
prefix = "expert"
kind = "expert"
n_judges = 3
epsilon = 0.0

[[groups]]
prefix = "clone"
kind = "model"
n_judges = 4
configs = ["baseline-W", "bc-W"]
epsilon = 0.0
"#,
    )
    .unwrap();
    ok(d, &["synth", "--config", "cfg.toml", "--out", "s"]);
    ok(d, &["evaluate", "--panel", "s/panel.json", "--out", "e"]);
    let per_model = read(&d.join("e/per_model.csv"));
    let rows: Vec<&str> = per_model.lines().skip(2).collect();
    assert_eq!(rows.len(), 4);
    for r in rows {
        let cells: Vec<&str> = r.split(',').collect();
        assert_eq!(&cells[2..8], &["100.00", "0.00", "100.00", "0.00", "100.00", "0.00"], "{r}");
        assert_eq!(cells[8], "1.000000");
    }
    ok(d, &["ensemble", "--panel", "s/panel.json", "--out", "n", "--method", "borda", "--configs", "best"]);
    let delta = read(&d.join("n/ensemble_delta.csv"));
    for l in delta.lines().skip(2) {
        assert!(l.ends_with(",0.00,0.00"), "{l}");
        assert!(l.contains("best:"), "{l}");
    }
}

#[test]
fn failures_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = valign(d, &["evaluate", "--panel", "missing.json", "--out", "x"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    ok(d, &["synth", "--interviews", "4", "--experts", "2", "--out", "s"]);
    // two experts cannot support a leave-one-out ceiling
    let out = valign(d, &["ceiling", "--panel", "s/panel.json", "--out", "c"]);
    assert!(!out.status.success());
    // no model judgments to evaluate
    let out = valign(d, &["evaluate", "--panel", "s/panel.json", "--out", "e"]);
    assert!(!out.status.success());
    let out = valign(d, &["ensemble", "--panel", "s/panel.json", "--out", "e", "--method", "copeland"]);
    assert!(!out.status.success());
}

#[test]
fn uncertainty_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("cfg.toml"),
        r#"
n_interviews = 12
seed = 9

[[groups]]
prefix = "expert"
kind = "expert"
n_judges = 4
epsilon = 0.3

[[groups]]
prefix = "m"
kind = "model"
n_judges = 2
configs = ["a", "b", "c"]
epsilon = 0.4
"#,
    )
    .unwrap();
    ok(d, &["synth", "--config", "cfg.toml", "--out", "s"]);
    let args = ["uncertainty", "--panel", "s/panel.json", "--bootstrap-b", "500", "--seed", "4", "--out", "u1"];
    ok(d, &args);
    let first = tree(&d.join("u1"));
    ok(d, &args);
    assert_eq!(first, tree(&d.join("u1")));
    let json = read(&d.join("u1/uncertainty.json"));
    assert!(json.contains("\"manifest_sha256\""));
}

#[test]
fn run_retries_degenerate_output_and_resumes() {
    let server = MockServer::start();
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--interviews", "2", "--out", "s"]);
    std::fs::write(d.join("ep.toml"), server.endpoints_toml(&["m-flaky", "m-steady"])).unwrap();
    let args = ["run", "--endpoints", "ep.toml", "--interviews", "s/interviews.json", "--runs", "runs.jsonl", "--strategies", "baseline-W,pep-S"];
    ok(d, &args);
    let loaded = load_runs(&d.join("runs.jsonl")).unwrap();
    assert_eq!(loaded.records.len(), 8);
    for r in &loaded.records {
        assert!(!r.is_failed(), "{:?}", r.failure);
        let seeds: Vec<u64> = r.calls.iter().map(|c| c.seed).collect();
        let mut uniq = seeds.clone();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), seeds.len());
        if r.endpoint_id == "m-flaky" {
            assert!(r.retries >= 1);
        } else {
            assert_eq!(r.retries, 0);
        }
    }
    let text = read(&d.join("runs.jsonl"));
    assert!(!text.to_lowercase().contains("authorization"));

    // nothing left to do: the store keeps its records and gains none
    let mut resume = args.to_vec();
    resume.push("--resume");
    ok(d, &resume);
    assert_eq!(load_runs(&d.join("runs.jsonl")).unwrap().records.len(), 8);
}

#[test]
fn api_key_must_come_from_the_environment() {
    let server = MockServer::start();
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--interviews", "1", "--out", "s"]);
    let mut ep = server.endpoints_toml(&["keyed"]);
    ep.push_str("api_key_env = \"VALIGN_TEST_KEY_UNSET\"\n");
    // the key line belongs to the last endpoint table
    std::fs::write(d.join("ep.toml"), ep).unwrap();
    let out = valign(d, &["run", "--endpoints", "ep.toml", "--interviews", "s/interviews.json", "--runs", "r.jsonl"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("VALIGN_TEST_KEY_UNSET"));

    let out = std::process::Command::new(bin())
        .current_dir(d)
        .env("VALIGN_TEST_KEY_UNSET", "sk-secret-value")
        .args(["run", "--endpoints", "ep.toml", "--interviews", "s/interviews.json", "--runs", "r.jsonl", "--strategies", "baseline-W"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(!read(&d.join("r.jsonl")).contains("sk-secret-value"));
}
