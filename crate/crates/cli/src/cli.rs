use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use crate::commands::{
    cmd_eval, cmd_explain, cmd_extract, cmd_index, cmd_pipeline, cmd_train, convert_adresso, EvalMode, ExplainTarget,
    RunContext,
};
use crate::config::{ProviderMode, RunConfig};
use crate::manifest::DatasetManifest;

#[derive(Debug, Parser)]
#[command(name = "neurox", version, about = "Speech-based dementia screening with retrieval-grounded explanations")]
pub struct Cli {
    /// TOML or JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub providers: Option<ProviderMode>,
    #[arg(long, global = true)]
    pub artifacts_dir: Option<PathBuf>,
    /// Sidecar base URL (HTTP providers only).
    #[arg(long, global = true, env = "NEUROX_SIDECAR_URL")]
    pub sidecar_url: Option<String>,
    /// Recompute artifacts that already exist.
    #[arg(long, global = true)]
    pub force: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Acoustic features, transcript and embeddings for every recording.
    Extract {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Fit the scaler and train the classifier on the training split.
    Train {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Holdout, k-fold or modality-ablation evaluation.
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, value_enum, default_value = "holdout")]
        mode: EvalMode,
    },
    /// Build the literature index from the corpus directory.
    Index {
        /// Overrides `rag.corpus_dir`.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Predict, retrieve and generate an explanation.
    Explain {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, required_unless_present = "all", conflicts_with = "all")]
        id: Option<String>,
        #[arg(long)]
        all: bool,
    },
    /// extract → train → eval → index → explain, resuming completed stages.
    Pipeline {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Write a manifest for the ADReSSo diagnosis-folder layout.
    ConvertAdresso {
        /// Directory containing `train/audio/{ad,cn}` and `test-dist/audio`.
        #[arg(long)]
        root: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// CSV of test labels (`id,label`).
        #[arg(long)]
        test_labels: Option<PathBuf>,
    },
}

impl Cli {
    /// Defaults, then the config file, then the environment and flags.
    pub fn run_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => {
                let mut c = RunConfig::default();
                c.resolve_paths(&std::env::current_dir()?);
                c
            }
        };
        let cwd = std::env::current_dir()?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(p) = self.providers {
            cfg.providers = p;
        }
        if let Some(dir) = &self.artifacts_dir {
            cfg.artifacts_dir = cwd.join(dir);
        }
        if let Some(url) = &self.sidecar_url {
            cfg.sidecar_url = url.clone();
        }
        if let Command::Index { corpus: Some(dir) } = &self.command {
            cfg.rag.corpus_dir = cwd.join(dir);
        }
        cfg.finalize()?;
        Ok(cfg)
    }
}

/// Executes one CLI invocation; any error means a nonzero exit.
pub fn run(cli: &Cli) -> Result<()> {
    if let Command::ConvertAdresso { root, out, test_labels } = &cli.command {
        let r = convert_adresso(root, out, test_labels.as_deref())?;
        println!("{}", serde_json::to_string(&r)?);
        return Ok(());
    }
    let cfg = cli.run_config().context("configuration")?;
    let ctx = RunContext::new(cfg, cli.force);
    let load = |p: &PathBuf| DatasetManifest::load(p);
    let out = match &cli.command {
        Command::Extract { manifest } => serde_json::to_value(cmd_extract(&ctx, &load(manifest)?)?)?,
        Command::Train { manifest } => serde_json::to_value(cmd_train(&ctx, &load(manifest)?)?)?,
        Command::Eval { manifest, mode } => serde_json::to_value(cmd_eval(&ctx, &load(manifest)?, *mode)?)?,
        Command::Index { .. } => serde_json::to_value(cmd_index(&ctx)?)?,
        Command::Explain { manifest, id, all } => {
            let target = match (id, all) {
                (_, true) => ExplainTarget::All,
                (Some(id), false) => ExplainTarget::One(id.clone()),
                (None, false) => unreachable!("clap requires --id or --all"),
            };
            serde_json::to_value(cmd_explain(&ctx, &load(manifest)?, &target)?)?
        }
        Command::Pipeline { manifest } => serde_json::to_value(cmd_pipeline(&ctx, &load(manifest)?)?)?,
        Command::ConvertAdresso { .. } => unreachable!(),
    };
    println!("{}", serde_json::to_string(&out)?);
    Ok(())
}
