use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use neurox_core::neuro::{ModelConfig, TrainingConfig};
use neurox_core::providers::HttpProviderConfig;
use neurox_core::rag::ExplainParams;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProviderMode {
    /// Deterministic offline stand-ins; never touches the network.
    Fixture,
    /// The model sidecar over HTTP.
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RagConfig {
    pub corpus_dir: PathBuf,
    pub k: usize,
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: usize,
}

impl Default for RagConfig {
    fn default() -> Self {
        let p = ExplainParams::default();
        Self {
            corpus_dir: PathBuf::from("corpus"),
            k: p.k,
            temperature: p.temperature,
            top_p: p.top_p,
            max_tokens: p.max_tokens,
        }
    }
}

impl RagConfig {
    pub fn explain_params(&self) -> ExplainParams {
        ExplainParams {
            k: self.k,
            temperature: self.temperature,
            top_p: self.top_p,
            max_tokens: self.max_tokens,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub k_folds: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { k_folds: 5 }
    }
}

/// Everything a run needs. Mirrors the TOML/JSON config file; relative
/// paths are taken relative to the file that declared them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub providers: ProviderMode,
    pub sidecar_url: String,
    pub sidecar_timeout_s: f64,
    pub max_in_flight: usize,
    /// Fixture store: `<dir>/<id>/transcript.txt` (+ optional embeddings).
    pub fixture_dir: Option<PathBuf>,
    pub artifacts_dir: PathBuf,
    /// Overrides `training.seed`.
    pub seed: u64,
    /// Extraction worker threads; 0 uses every core.
    pub workers: usize,
    pub model: ModelConfig,
    pub training: TrainingConfig,
    pub eval: EvalConfig,
    pub rag: RagConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let http = HttpProviderConfig::default();
        Self {
            providers: ProviderMode::Fixture,
            sidecar_url: http.base_url,
            sidecar_timeout_s: http.timeout_s,
            max_in_flight: http.max_in_flight,
            fixture_dir: None,
            artifacts_dir: PathBuf::from("artifacts"),
            seed: TrainingConfig::default().seed,
            workers: 0,
            model: ModelConfig::default(),
            training: TrainingConfig::default(),
            eval: EvalConfig::default(),
            rag: RagConfig::default(),
        }
    }
}

fn absolutize(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl RunConfig {
    /// Parses `.toml` or `.json` by extension.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: Self = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?,
            Some("toml") => toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?,
            _ => bail!("config {} must end in .toml or .json", path.display()),
        };
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        self.artifacts_dir = absolutize(base, &self.artifacts_dir);
        self.rag.corpus_dir = absolutize(base, &self.rag.corpus_dir);
        if let Some(d) = &self.fixture_dir {
            self.fixture_dir = Some(absolutize(base, d));
        }
    }

    /// Copies the run seed into the training config and checks invariants.
    pub fn finalize(&mut self) -> Result<()> {
        self.training.seed = self.seed;
        self.model.validate()?;
        self.training.validate()?;
        if self.eval.k_folds < 2 {
            bail!("eval.k_folds must be >= 2");
        }
        if self.rag.k == 0 {
            bail!("rag.k must be >= 1");
        }
        neurox_core::providers::GenerationParams {
            temperature: self.rag.temperature,
            top_p: self.rag.top_p,
            max_tokens: self.rag.max_tokens,
        }
        .validate()?;
        Ok(())
    }

    pub fn http_config(&self) -> HttpProviderConfig {
        HttpProviderConfig {
            base_url: self.sidecar_url.clone(),
            timeout_s: self.sidecar_timeout_s,
            max_in_flight: self.max_in_flight,
        }
    }
}
