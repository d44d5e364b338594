#![allow(dead_code)]

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use sha2::{Digest, Sha256};
use valign::synth::cue_phrases;
use valign::{AnnotationRecord, JudgeKind, PanelMatrix, Ranking, ValueId, ValueTaxonomy};

/// Local chat-completions server. Each model ranks the values by how often
/// their cue phrases occur in the transcript, plus noise keyed by model,
/// seed and prompt. Aggregation prompts are answered with a Borda count of
/// the numbered lists they contain. Models whose name ends in `-flaky`
/// loop on even seeds.
pub struct MockServer {
    pub port: u16,
}

impl MockServer {
    pub fn start() -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let port = listener.local_addr().unwrap().port();
        std::thread::spawn(move || {
            for stream in listener.incoming().flatten() {
                std::thread::spawn(move || handle(stream));
            }
        });
        MockServer { port }
    }

    pub fn base_url(&self) -> String {
        format!("http://127.0.0.1:{}/v1", self.port)
    }

    /// Endpoint file text for the given model names.
    pub fn endpoints_toml(&self, models: &[&str]) -> String {
        let mut s = String::new();
        for m in models {
            s.push_str(&format!(
                "[[endpoints]]\nid = \"{m}\"\nbase_url = \"{}\"\nmodel = \"{m}\"\nparallelism = 4\nmax_retries = 3\n\n",
                self.base_url()
            ));
        }
        s
    }
}

fn handle(mut stream: TcpStream) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut len = 0usize;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).unwrap_or(0) == 0 {
            return;
        }
        let l = line.trim_end();
        if l.is_empty() {
            break;
        }
        if let Some((k, v)) = l.split_once(':') {
            if k.eq_ignore_ascii_case("content-length") {
                len = v.trim().parse().unwrap_or(0);
            }
        }
    }
    let mut body = vec![0; len];
    if reader.read_exact(&mut body).is_err() {
        return;
    }
    let req: serde_json::Value = serde_json::from_slice(&body).unwrap_or_default();
    let model = req["model"].as_str().unwrap_or("").to_string();
    let seed = req["seed"].as_u64().unwrap_or(0);
    let prompt = req["messages"]
        .as_array()
        .and_then(|m| m.iter().rev().find(|x| x["role"] == "user"))
        .and_then(|m| m["content"].as_str())
        .unwrap_or("")
        .to_string();
    let content = reply(&model, seed, &prompt);
    let resp = serde_json::json!({
        "id": "mock",
        "object": "chat.completion",
        "model": model,
        "choices": [{"index": 0, "message": {"role": "assistant", "content": content}, "finish_reason": "stop"}]
    })
    .to_string();
    let _ = write!(
        stream,
        "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{resp}",
        resp.len()
    );
    let _ = stream.flush();
}

fn reply(model: &str, seed: u64, prompt: &str) -> String {
    if model.ends_with("-flaky") && seed.is_multiple_of(2) {
        return "I value I value I value I value ".repeat(20);
    }
    let tax = ValueTaxonomy::bundled();
    let values = tax.basic_values().to_vec();
    let mut score: Vec<f64> = vec![0.0; values.len()];

    if let Some(start) = prompt.find("Transcript:\n\"\"\"") {
        let rest = &prompt[start + 16..];
        let transcript = &rest[..rest.find("\"\"\"").unwrap_or(rest.len())];
        for (i, v) in values.iter().enumerate() {
            for cue in cue_phrases(&tax, v) {
                score[i] += transcript.matches(&format!(" {cue}")).count() as f64;
            }
        }
    } else {
        let line = Regex::new(r"(?m)^\s*(\d+)\.\s+(.+?)\s*$").unwrap();
        for cap in line.captures_iter(prompt) {
            let pos: f64 = cap[1].parse().unwrap();
            let name = cap[2].to_lowercase();
            if let Some(i) = values.iter().position(|v| {
                v.display_name().to_lowercase() == name || v.as_str() == name
            }) {
                score[i] += (values.len() as f64 + 1.0 - pos).max(0.0);
            }
        }
    }

    let digest = Sha256::digest(format!("{model}\u{0}{seed}\u{0}{prompt}").as_bytes());
    let mut rng = ChaCha8Rng::from_seed(digest.into());
    let scale = score.iter().cloned().fold(1.0, f64::max) * 0.35;
    let mut order: Vec<(f64, usize)> = score
        .iter()
        .enumerate()
        .map(|(i, s)| (s + rng.gen::<f64>() * scale, i))
        .collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let names: Vec<String> = order.iter().map(|(_, i)| values[*i].display_name()).collect();
    let mut out = String::from("Here is my assessment.\n\n```json\n");
    out.push_str(&serde_json::json!({ "ranking": names }).to_string());
    out.push_str("\n```\n\n");
    for (n, name) in names.iter().enumerate() {
        out.push_str(&format!("{}. {name}\n", n + 1));
    }
    out
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_valign")
}

/// Runs the binary in `dir` with a pinned timestamp.
pub fn valign(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .current_dir(dir)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = valign(dir, args);
    assert!(
        out.status.success(),
        "valign {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub const MOCK_MODELS: [&str; 4] = ["mock-a", "mock-b", "mock-c", "mock-d"];

/// synth, run, evaluate, ensemble, uncertainty and global in `dir`, with
/// relative paths only. Returns whether every step exited 0.
pub fn pipeline(dir: &Path, server: &MockServer, interviews: usize) -> bool {
    std::fs::write(dir.join("endpoints.toml"), server.endpoints_toml(&MOCK_MODELS)).unwrap();
    let n = interviews.to_string();
    let steps: Vec<Vec<&str>> = vec![
        vec!["synth", "--interviews", &n, "--experts", "6", "--epsilon", "0.2", "--seed", "11", "--out", "synth"],
        vec!["run", "--endpoints", "endpoints.toml", "--interviews", "synth/interviews.json", "--runs", "runs.jsonl", "--seed", "5", "--out", "run"],
        vec!["evaluate", "--panel", "synth/panel.json", "--runs", "runs.jsonl", "--out", "evaluate"],
        vec!["ensemble", "--panel", "synth/panel.json", "--runs", "runs.jsonl", "--out", "ensemble"],
        vec!["uncertainty", "--panel", "synth/panel.json", "--runs", "runs.jsonl", "--bootstrap-b", "1000", "--seed", "3", "--out", "uncertainty"],
        vec!["global", "--panel", "synth/panel.json", "--runs", "runs.jsonl", "--out", "global"],
    ];
    steps.iter().all(|s| {
        let out = valign(dir, s);
        if !out.status.success() {
            eprintln!("{s:?}: {}", String::from_utf8_lossy(&out.stderr));
        }
        out.status.success()
    })
}

/// Every file under `root`, relative path to contents.
pub fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

pub fn ranking(s: &str) -> Ranking {
    Ranking::from_names(&s.chars().map(|c| c.to_string()).collect::<Vec<_>>()).unwrap()
}

pub fn expert(interview: &str, judge: &str, r: Ranking) -> AnnotationRecord {
    AnnotationRecord {
        interview_id: interview.into(),
        judge_id: judge.into(),
        judge_kind: JudgeKind::Expert,
        config_id: None,
        ranking: r,
    }
}

pub fn model(interview: &str, judge: &str, config: &str, r: Ranking) -> AnnotationRecord {
    AnnotationRecord {
        interview_id: interview.into(),
        judge_id: judge.into(),
        judge_kind: JudgeKind::Model,
        config_id: Some(config.into()),
        ranking: r,
    }
}

/// Uniformly random permutation of `values`.
pub fn shuffled(rng: &mut ChaCha8Rng, values: &[ValueId]) -> Ranking {
    use rand::seq::SliceRandom;
    let mut v = values.to_vec();
    v.shuffle(rng);
    Ranking::new(v).unwrap()
}

pub fn panel(records: Vec<AnnotationRecord>) -> PanelMatrix {
    PanelMatrix::from_records(records).unwrap()
}
