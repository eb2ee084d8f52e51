//! One module per CLI verb. Each command takes a [`RunContext`] and
//! returns a small report that the pipeline folds into its summary.

mod convert;
mod eval;
mod explain;
mod extract;
mod index;
mod pipeline;
mod train;

use anyhow::{bail, Result};
use neurox_core::providers::{FixtureProvider, HttpProvider, ModelProvider};

use crate::artifacts::{ArtifactStore, FeatureSet};
use crate::config::{ProviderMode, RunConfig};
use crate::manifest::{DatasetManifest, ManifestEntry, Split};

pub use convert::{convert_adresso, ConvertReport};
pub use eval::{cmd_eval, AblationOutput, EvalMode, EvalOutput, HoldoutOutput, KFoldOutput, PredictionRecord};
pub use explain::{cmd_explain, ExplainReport, ExplainTarget};
pub use extract::{cmd_extract, ExtractReport};
pub use index::{cmd_index, IndexReport};
pub use pipeline::{cmd_pipeline, PipelineSummary, StageRecord, StageStatus, STAGES};
pub use train::{cmd_train, TrainSummary};

/// Resolved configuration plus the artifact layout for one invocation.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub config: RunConfig,
    pub store: ArtifactStore,
    pub force: bool,
}

impl RunContext {
    pub fn new(config: RunConfig, force: bool) -> Self {
        let store = ArtifactStore::new(config.artifacts_dir.clone());
        Self { config, store, force }
    }

    /// Builds the configured provider. HTTP mode checks `/healthz` first so
    /// a missing sidecar fails before any work starts.
    pub fn providers(&self) -> Result<Providers> {
        match self.config.providers {
            ProviderMode::Fixture => Ok(Providers::Fixture(match &self.config.fixture_dir {
                Some(dir) => FixtureProvider::new(dir.clone()),
                None => FixtureProvider::without_store(),
            })),
            ProviderMode::Http => {
                let p = HttpProvider::new(&self.config.http_config());
                p.check_health()?;
                Ok(Providers::Http(Box::new(p)))
            }
        }
    }
}

pub enum Providers {
    Fixture(FixtureProvider),
    Http(Box<HttpProvider>),
}

impl Providers {
    pub fn model(&self) -> &dyn ModelProvider {
        match self {
            Providers::Fixture(p) => p,
            Providers::Http(p) => p.as_ref(),
        }
    }
}

/// Features for every entry of `split`, failing with the full list of ids
/// whose artifacts are missing.
pub(crate) fn load_split<'m>(
    manifest: &'m DatasetManifest,
    store: &ArtifactStore,
    split: Split,
) -> Result<Vec<(&'m ManifestEntry, FeatureSet)>> {
    let entries: Vec<&ManifestEntry> = manifest.split(split).collect();
    let missing = store.missing_features(entries.iter().map(|e| e.id.as_str()));
    if !missing.is_empty() {
        bail!(
            "missing extracted features for {} {split:?} id(s): {} (run `extract` first)",
            missing.len(),
            missing.join(", ")
        );
    }
    entries
        .into_iter()
        .map(|e| Ok((e, store.read_features(&e.id)?)))
        .collect()
}
