#![allow(dead_code)]

use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use serde_json::Value;

pub const SCHEMA_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../schemas");

pub struct Fixture {
    pub dir: tempfile::TempDir,
    pub manifest: PathBuf,
    pub config: PathBuf,
}

impl Fixture {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let manifest = neurox_cli::synth::write_fixture_dataset(dir.path()).unwrap();
        let config = dir.path().join("config.toml");
        Self { dir, manifest, config }
    }

    pub fn artifacts(&self) -> PathBuf {
        self.dir.path().join("artifacts")
    }

    /// Runs `neurox --config <fixture config> <args>` with no sidecar URL in
    /// the environment unless `env` sets one.
    pub fn run(&self, args: &[&str], env: &[(&str, &str)]) -> Output {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_neurox"));
        cmd.arg("--config").arg(&self.config).args(args);
        cmd.env_remove("NEUROX_SIDECAR_URL").env("RUST_LOG", "warn");
        for (k, v) in env {
            cmd.env(k, v);
        }
        cmd.output().unwrap()
    }

    pub fn run_ok(&self, args: &[&str]) -> Value {
        let out = self.run(args, &[]);
        assert!(out.status.success(), "neurox {args:?} failed:\n{}", String::from_utf8_lossy(&out.stderr));
        serde_json::from_slice(&out.stdout).unwrap()
    }

    pub fn manifest_arg(&self) -> String {
        self.manifest.display().to_string()
    }
}

/// Schema file for an artifact path relative to the artifact root.
pub fn schema_for(rel: &Path) -> Option<&'static str> {
    let parts: Vec<&str> = rel.iter().map(|p| p.to_str().unwrap()).collect();
    Some(match parts.as_slice() {
        ["features", _, "acoustic.json"] => "acoustic_features",
        ["features", _, "transcript.json"] => "transcript",
        ["features", _, "speech_embedding.json"] => "speech_embedding",
        ["features", _, "text_encoding.json"] => "text_encoding",
        ["model", "scaler.json"] => "scaler",
        ["model", "train_summary.json"] => "train_summary",
        ["model", "train_log.jsonl"] => "train_log_record",
        ["eval", "holdout.json"] => "eval_holdout",
        ["eval", "kfold.json"] => "eval_kfold",
        ["eval", "ablation.json"] => "eval_ablation",
        ["index", "chunks.json"] => "chunks",
        ["explanations", _] => "explanation",
        ["pipeline", "summary.json"] => "pipeline_summary",
        ["pipeline", m] if m.ends_with(".done") => "stage_marker",
        _ => return None,
    })
}

fn validator(name: &str) -> jsonschema::Validator {
    let path = Path::new(SCHEMA_DIR).join(format!("{name}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn schema_errors(name: &str, doc: &Value) -> Vec<String> {
    validator(name).iter_errors(doc).map(|e| format!("{e} at {}", e.instance_path)).collect()
}

/// Validates every JSON artifact under `root`; returns how many documents
/// were checked. Unknown files other than the binary checkpoint and index
/// fail the check.
pub fn validate_artifacts(root: &Path) -> usize {
    let mut checked = 0;
    let mut problems = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
                continue;
            }
            let rel = path.strip_prefix(root).unwrap();
            if path.extension().is_some_and(|e| e == "bin") {
                continue;
            }
            let Some(schema) = schema_for(rel) else {
                problems.push(format!("{}: no schema", rel.display()));
                continue;
            };
            let text = std::fs::read_to_string(&path).unwrap();
            let docs: Vec<Value> = if rel.extension().is_some_and(|e| e == "jsonl") {
                text.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
            } else {
                vec![serde_json::from_str(&text).unwrap()]
            };
            for doc in docs {
                for e in schema_errors(schema, &doc) {
                    problems.push(format!("{}: {e}", rel.display()));
                }
                checked += 1;
            }
        }
    }
    assert!(problems.is_empty(), "schema violations:\n{}", problems.join("\n"));
    checked
}

/// A listener that counts accepted connections; anything that dials it is
/// a network call.
pub struct Tripwire {
    pub url: String,
    pub hits: Arc<AtomicUsize>,
}

impl Tripwire {
    pub fn start() -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        let hits = Arc::new(AtomicUsize::new(0));
        let h = hits.clone();
        std::thread::spawn(move || {
            for stream in listener.incoming() {
                h.fetch_add(1, Ordering::SeqCst);
                drop(stream);
            }
        });
        Self { url, hits }
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }
}

/// Every file under `root` with its bytes, sorted by path.
pub fn snapshot(root: &Path, skip: &[&str]) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_path_buf();
                if !skip.iter().any(|s| rel == Path::new(s)) {
                    out.push((rel, std::fs::read(&path).unwrap()));
                }
            }
        }
    }
    out.sort();
    out
}
