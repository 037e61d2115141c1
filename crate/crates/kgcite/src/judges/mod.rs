//! Pluggable clients and deterministic mocks for the three LLM-adjacent
//! roles: answer generation, NLI entailment, and text-quality grading.
//!
//! Remote judges speak the OpenAI-compatible chat-completions protocol, so
//! any local model behind a compatible shim plugs in. The mocks are
//! referentially transparent and exist so the whole benchmark — including the
//! ablation harnesses — runs offline; the lexical entailment heuristic is
//! deliberately simple and is not a fidelity claim.

pub mod mock;
pub mod prompts;
pub mod remote;
pub mod transcript;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use mock::{
    LexicalEntailment, LexicalRelevance, MockFaithfulCiter, MockGapAwareCiter, MockGrader,
    ScriptedGenerator,
};
pub use remote::RemoteJudge;

/// Score at or above which a service probability counts as entailment.
pub const ENTAILMENT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error)]
pub enum JudgeError {
    #[error("transport failure after {attempts} attempts: {message}")]
    Transport { attempts: u32, message: String },
    #[error("endpoint returned an unusable response: {0}")]
    Endpoint(String),
    #[error("could not parse a score from reply: {raw:?}")]
    UnparseableReply { raw: String },
    #[error("no scripted answer for {key:?}")]
    MissingScript { key: String },
    #[error("no transcript entry for request {key}")]
    MissingTranscript { key: String },
    #[error("invalid judge configuration: {0}")]
    InvalidConfig(String),
}

/// Connection settings for one judge role.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JudgeConfig {
    /// Chat-completions URL, or `"mock"` for the built-in deterministic judge.
    pub endpoint: String,
    pub model_name: String,
    pub temperature: f64,
    pub seed: u64,
    pub timeout_secs: u64,
    pub max_inflight: usize,
}

impl Default for JudgeConfig {
    fn default() -> Self {
        Self {
            endpoint: "mock".to_string(),
            model_name: "mock".to_string(),
            temperature: 0.0,
            seed: 0,
            timeout_secs: 60,
            max_inflight: 1,
        }
    }
}

impl JudgeConfig {
    pub fn is_mock(&self) -> bool {
        self.endpoint == "mock"
    }

    pub fn validate(&self) -> Result<(), JudgeError> {
        if self.temperature < 0.0 {
            return Err(JudgeError::InvalidConfig(format!(
                "temperature {} must be >= 0",
                self.temperature
            )));
        }
        if self.max_inflight == 0 {
            return Err(JudgeError::InvalidConfig(
                "max_inflight must be >= 1".to_string(),
            ));
        }
        Ok(())
    }

    /// Identity string recorded in report metadata.
    pub fn identity(&self) -> String {
        if self.is_mock() {
            format!("mock:{}", self.model_name)
        } else {
            format!("{}@{}", self.model_name, self.endpoint)
        }
    }
}

/// The slots of the one-shot generation prompt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationRequest {
    pub instruction: String,
    pub demonstration: String,
    /// One flattened knowledge entry per retrieved subgraph.
    pub knowledge_block: Vec<String>,
    pub question: String,
}

impl GenerationRequest {
    /// Request with the stock instruction and demonstration.
    pub fn new(knowledge_block: Vec<String>, question: impl Into<String>) -> Self {
        Self {
            instruction: prompts::generation_instruction().to_string(),
            demonstration: prompts::generation_demonstration().to_string(),
            knowledge_block,
            question: question.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntailmentVerdict {
    pub entailed: bool,
    /// Service probability when one was reported; mocks leave it out.
    pub raw_score: Option<f64>,
}

impl EntailmentVerdict {
    pub fn binary(entailed: bool) -> Self {
        Self {
            entailed,
            raw_score: None,
        }
    }

    pub fn from_score(score: f64) -> Self {
        Self {
            entailed: score >= ENTAILMENT_THRESHOLD,
            raw_score: Some(score),
        }
    }
}

/// The four reference-free text-quality dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QualityMetric {
    Coherence,
    Consistency,
    Fluency,
    Relevance,
}

impl QualityMetric {
    pub const ALL: [QualityMetric; 4] = [
        QualityMetric::Coherence,
        QualityMetric::Consistency,
        QualityMetric::Fluency,
        QualityMetric::Relevance,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            QualityMetric::Coherence => "Coherence",
            QualityMetric::Consistency => "Consistency",
            QualityMetric::Fluency => "Fluency",
            QualityMetric::Relevance => "Relevance",
        }
    }
}

/// Integer 1-5 grades for one answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextQualityScores {
    pub coherence: u8,
    pub consistency: u8,
    pub fluency: u8,
    pub relevance: u8,
}

impl TextQualityScores {
    pub fn get(&self, metric: QualityMetric) -> u8 {
        match metric {
            QualityMetric::Coherence => self.coherence,
            QualityMetric::Consistency => self.consistency,
            QualityMetric::Fluency => self.fluency,
            QualityMetric::Relevance => self.relevance,
        }
    }
}

/// Answer generation role.
pub trait AnswerGenerator: Sync {
    fn generate(
        &self,
        question_id: &str,
        request: &GenerationRequest,
    ) -> Result<String, JudgeError>;
}

/// NLI entailment role: does the premise entail the hypothesis?
pub trait EntailmentJudge: Sync {
    fn entails(&self, premise: &str, hypothesis: &str) -> Result<EntailmentVerdict, JudgeError>;
}

/// Text-quality grading role.
pub trait TextGrader: Sync {
    fn grade(
        &self,
        question_id: &str,
        question: &str,
        answer: &str,
        metric: QualityMetric,
    ) -> Result<u8, JudgeError>;
}

/// Secondary judge for the off-topic credit rule of [NA] precision.
pub trait RelevanceJudge: Sync {
    fn is_off_topic(&self, question: &str, sentence: &str) -> Result<bool, JudgeError>;
}

impl<G: AnswerGenerator + ?Sized> AnswerGenerator for Box<G> {
    fn generate(
        &self,
        question_id: &str,
        request: &GenerationRequest,
    ) -> Result<String, JudgeError> {
        (**self).generate(question_id, request)
    }
}

impl<J: EntailmentJudge + ?Sized> EntailmentJudge for &J {
    fn entails(&self, premise: &str, hypothesis: &str) -> Result<EntailmentVerdict, JudgeError> {
        (**self).entails(premise, hypothesis)
    }
}

impl<J: EntailmentJudge + ?Sized> EntailmentJudge for Box<J> {
    fn entails(&self, premise: &str, hypothesis: &str) -> Result<EntailmentVerdict, JudgeError> {
        (**self).entails(premise, hypothesis)
    }
}

impl<G: TextGrader + ?Sized> TextGrader for Box<G> {
    fn grade(
        &self,
        question_id: &str,
        question: &str,
        answer: &str,
        metric: QualityMetric,
    ) -> Result<u8, JudgeError> {
        (**self).grade(question_id, question, answer, metric)
    }
}

/// Parse the first integer 1..=5 in a grader reply.
pub fn parse_grade(reply: &str) -> Result<u8, JudgeError> {
    for token in reply.split(|c: char| !c.is_ascii_digit()) {
        if token.is_empty() {
            continue;
        }
        if let Ok(n) = token.parse::<u8>() {
            if (1..=5).contains(&n) {
                return Ok(n);
            }
        }
    }
    Err(JudgeError::UnparseableReply {
        raw: reply.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grade_parsing() {
        assert_eq!(parse_grade("Score: 5 because it flows").unwrap(), 5);
        assert_eq!(parse_grade("3").unwrap(), 3);
        assert_eq!(parse_grade("I'd say 4/5").unwrap(), 4);
        assert!(matches!(
            parse_grade("excellent"),
            Err(JudgeError::UnparseableReply { .. })
        ));
        // Out-of-range digits alone do not satisfy the contract.
        assert!(parse_grade("score 7").is_err());
    }

    #[test]
    fn verdict_threshold() {
        assert!(EntailmentVerdict::from_score(0.5).entailed);
        assert!(EntailmentVerdict::from_score(0.93).entailed);
        assert!(!EntailmentVerdict::from_score(0.49).entailed);
    }

    #[test]
    fn config_validation() {
        let mut config = JudgeConfig::default();
        assert!(config.validate().is_ok());
        assert!(config.is_mock());
        config.temperature = -0.1;
        assert!(config.validate().is_err());
        config.temperature = 0.5;
        config.max_inflight = 0;
        assert!(config.validate().is_err());
    }
}
