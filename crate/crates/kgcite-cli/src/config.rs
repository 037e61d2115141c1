//! Run configuration: one TOML document plus flag overrides (flags win). The
//! fully resolved config is hashed into every report so a run can be traced
//! back to its exact settings.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use kgcite::judges::transcript::request_key;
use kgcite::judges::JudgeConfig;
use kgcite::metrics::EvalOptions;
use kgcite::questiongen::CoherenceNorm;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuestionMode {
    General,
    #[default]
    Specific,
}

/// Where the per-question knowledge graphs come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KgSource {
    /// One-hop neighborhoods of the entry's gold people.
    #[default]
    Gold,
    /// Run the retrieval pipeline on the question.
    Retrieved,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct AblationConfig {
    pub removals: Vec<usize>,
    pub fractions: Vec<f64>,
}

impl Default for AblationConfig {
    fn default() -> Self {
        Self {
            removals: vec![1, 2, 3],
            fractions: vec![0.0, 0.2, 0.4, 0.6, 0.8],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct QuestionGenConfig {
    /// Ingestion corpus: JSONL of {paragraph, name_a, name_b, relation}.
    pub seeds: Option<PathBuf>,
    pub alpha: f64,
    pub rounds: u32,
    pub norm: CoherenceNorm,
    pub normalize_specificity: bool,
}

impl Default for QuestionGenConfig {
    fn default() -> Self {
        Self {
            seeds: None,
            alpha: 0.5,
            rounds: 5,
            norm: CoherenceNorm::Softmax,
            normalize_specificity: false,
        }
    }
}

/// The resolved settings of one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub store: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub out: PathBuf,
    pub question_mode: QuestionMode,
    pub kg_source: KgSource,
    /// Bounded worker pool for per-question work items.
    pub workers: usize,
    /// Pre-computed mentions file (external NER mode).
    pub mentions: Option<PathBuf>,
    /// Replay transcripts instead of calling any judge.
    pub replay: Option<PathBuf>,
    /// Run the text-quality grader during evaluate.
    pub grade_text: bool,
    pub generator: JudgeConfig,
    pub nli: JudgeConfig,
    pub grader: JudgeConfig,
    pub metrics: EvalOptions,
    pub ablation: AblationConfig,
    pub questiongen: QuestionGenConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            store: None,
            dataset: None,
            out: PathBuf::from("runs/run"),
            question_mode: QuestionMode::default(),
            kg_source: KgSource::default(),
            workers: 1,
            mentions: None,
            replay: None,
            grade_text: false,
            generator: JudgeConfig {
                model_name: "faithful-citer".to_string(),
                ..JudgeConfig::default()
            },
            nli: JudgeConfig {
                model_name: "lexical".to_string(),
                ..JudgeConfig::default()
            },
            grader: JudgeConfig {
                model_name: "fixed".to_string(),
                ..JudgeConfig::default()
            },
            metrics: EvalOptions::default(),
            ablation: AblationConfig::default(),
            questiongen: QuestionGenConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Hash of the resolved configuration, recorded in reports and the
    /// manifest. The output directory is not part of the hash: the same
    /// experiment written somewhere else is the same experiment.
    pub fn hash(&self) -> String {
        let mut semantic = self.clone();
        semantic.out = PathBuf::new();
        let canonical = toml::to_string(&semantic).expect("config serializes");
        request_key("config", &canonical)
    }

    pub fn store_path(&self) -> Result<&Path> {
        self.store
            .as_deref()
            .context("no store path: pass --store or set `store` in the config")
    }

    pub fn dataset_path(&self) -> Result<&Path> {
        self.dataset
            .as_deref()
            .context("no dataset path: pass --dataset or set `dataset` in the config")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_mock_and_hash_is_stable() {
        let config = RunConfig::default();
        assert!(config.generator.is_mock());
        assert_eq!(config.hash(), RunConfig::default().hash());

        let mut other = RunConfig::default();
        other.seed = 1;
        assert_ne!(config.hash(), other.hash());
    }

    #[test]
    fn toml_roundtrip() {
        let text = r#"
seed = 7
store = "fixtures/store.jsonl"
dataset = "fixtures/dataset.jsonl"
out = "runs/demo"
question_mode = "general"

[generator]
endpoint = "mock"
model_name = "gap-aware"
temperature = 0.5
seed = 0
timeout_secs = 30
max_inflight = 2

[ablation]
removals = [1, 2]
fractions = [0.0, 0.5]
"#;
        let config: RunConfig = toml::from_str(text).unwrap();
        assert_eq!(config.seed, 7);
        assert_eq!(config.question_mode, QuestionMode::General);
        assert_eq!(config.generator.model_name, "gap-aware");
        assert_eq!(config.ablation.removals, vec![1, 2]);
        assert_eq!(config.ablation.fractions, vec![0.0, 0.5]);
        // Unset sections fall back to defaults.
        assert_eq!(config.questiongen.rounds, 5);
    }
}
