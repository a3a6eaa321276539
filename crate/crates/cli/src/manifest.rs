//! The run manifest: config snapshot, per-stage status and timing, and the
//! counts each stage reported.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use opinion_core::corpus::SkipReport;
use opinion_core::dpnt::SentimentCounts;
use opinion_core::issues::Issue;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{CliError, Result, Stage};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Complete,
    Failed,
    /// An upstream stage was rerun after this one completed.
    Stale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageEntry {
    pub status: StageStatus,
    pub wall_ms: u128,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overrides: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestCounts {
    /// Records accepted by the loader.
    pub ingested: usize,
    pub skipped: SkipReport,
    pub deduplicated: usize,
    /// Documents matching at least one candidate.
    pub matched: usize,
    pub unmatched: usize,
    pub matched_per_candidate: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionEntry {
    pub partition: String,
    pub candidate: String,
    pub polarity: opinion_core::Polarity,
    /// Documents in the partition before the vocabulary floor.
    pub documents: usize,
    /// Documents removed because no in-vocabulary token remained.
    pub dropped_docs: usize,
    pub vocab_size: usize,
    pub tokens: usize,
    pub seed: u64,
    /// Model dump file name inside `topics/`; `None` when the partition was
    /// too small to model.
    pub model: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ingest: Option<IngestCounts>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentiment: Option<Vec<SentimentCounts>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partitions: Option<Vec<PartitionEntry>>,
    /// Assigned topic count per issue, per partition.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topics_per_issue: Option<BTreeMap<String, BTreeMap<Issue, usize>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: PipelineConfig,
    pub seed: u64,
    pub complete: bool,
    pub stages: BTreeMap<Stage, StageEntry>,
    pub counts: Counts,
}

impl RunManifest {
    pub fn new(config: &PipelineConfig) -> Self {
        Self {
            config: config.clone(),
            seed: config.lda.seed,
            complete: false,
            stages: BTreeMap::new(),
            counts: Counts::default(),
        }
    }

    pub fn path(out_dir: &Path) -> PathBuf {
        out_dir.join(MANIFEST_FILE)
    }

    /// Loads the manifest in `config.out_dir`, or starts a new one.
    pub fn load_or_new(config: &PipelineConfig) -> Result<Self> {
        let path = Self::path(&config.out_dir);
        match std::fs::read_to_string(&path) {
            Ok(text) => {
                let mut m: Self = serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("unreadable manifest {}: {e}", path.display())))?;
                m.config = config.clone();
                m.seed = config.lda.seed;
                Ok(m)
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Self::new(config)),
            Err(e) => Err(CliError::io(path, e)),
        }
    }

    pub fn save(&self, out_dir: &Path) -> Result<()> {
        let path = Self::path(out_dir);
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::io(path, e))
    }

    /// Records a finished stage and marks every later stage stale.
    pub fn record(&mut self, stage: Stage, entry: StageEntry) {
        let ok = entry.status == StageStatus::Complete;
        self.stages.insert(stage, entry);
        for later in Stage::ALL.iter().filter(|s| **s > stage) {
            if let Some(e) = self.stages.get_mut(later) {
                if e.status == StageStatus::Complete {
                    e.status = StageStatus::Stale;
                }
            }
        }
        self.complete = ok
            && Stage::ALL
                .iter()
                .all(|s| self.stages.get(s).is_some_and(|e| e.status == StageStatus::Complete));
    }
}
