//! OpenAI-compatible chat-completions client for the generation, entailment,
//! and grading roles. One wire protocol covers every baseline family; local
//! models are reachable through any compatible shim.

use std::time::Duration;

use serde_json::{json, Value};

use crate::judges::prompts::{
    assemble_annotate_prompt, assemble_extend_prompt, assemble_generation_prompt,
    assemble_grading_prompt, assemble_nli_prompt, assemble_question_prompt,
};
use crate::judges::{
    parse_grade, AnswerGenerator, EntailmentJudge, EntailmentVerdict, GenerationRequest,
    JudgeConfig, JudgeError, QualityMetric, TextGrader,
};
use crate::questiongen::{ParagraphGenerator, QuestionMaker, QuestionStyle};

/// Environment variables consulted for the bearer token, in order.
pub const API_KEY_VARS: [&str; 2] = ["KGCITE_API_KEY", "OPENAI_API_KEY"];

const MAX_ATTEMPTS: u32 = 3;

pub fn api_key_from_env() -> Option<String> {
    API_KEY_VARS
        .iter()
        .find_map(|var| std::env::var(var).ok())
        .filter(|k| !k.is_empty())
}

/// A shareable handle to one remote endpoint. Requests are idempotent
/// (temperature and seed pinned by config), so transport failures retry up to
/// three times with exponential backoff.
pub struct RemoteJudge {
    agent: ureq::Agent,
    config: JudgeConfig,
    api_key: Option<String>,
}

impl RemoteJudge {
    pub fn new(config: JudgeConfig) -> Result<Self, JudgeError> {
        config.validate()?;
        if config.is_mock() {
            return Err(JudgeError::InvalidConfig(
                "remote judge cannot point at the mock endpoint".to_string(),
            ));
        }
        let agent_config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .build();
        Ok(Self {
            agent: agent_config.into(),
            api_key: api_key_from_env(),
            config,
        })
    }

    pub fn config(&self) -> &JudgeConfig {
        &self.config
    }

    fn chat(&self, prompt: &str) -> Result<String, JudgeError> {
        let body = json!({
            "model": self.config.model_name,
            "temperature": self.config.temperature,
            "seed": self.config.seed,
            "messages": [{"role": "user", "content": prompt}],
        });
        let mut last_error = String::new();
        for attempt in 0..MAX_ATTEMPTS {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(200 * (1 << attempt)));
            }
            let mut request = self.agent.post(&self.config.endpoint);
            if let Some(key) = &self.api_key {
                request = request.header("Authorization", &format!("Bearer {key}"));
            }
            match request.send_json(&body) {
                Ok(mut response) => {
                    let value: Value = response.body_mut().read_json().map_err(|e| {
                        JudgeError::Endpoint(format!("response is not JSON: {e}"))
                    })?;
                    return extract_completion(&value);
                }
                Err(e) => last_error = e.to_string(),
            }
        }
        Err(JudgeError::Transport {
            attempts: MAX_ATTEMPTS,
            message: last_error,
        })
    }
}

/// Pull the first completion out of a chat response. A missing or empty
/// completion is an error, never silently empty.
fn extract_completion(value: &Value) -> Result<String, JudgeError> {
    let content = value
        .get("choices")
        .and_then(|c| c.get(0))
        .and_then(|c| c.get("message"))
        .and_then(|m| m.get("content"))
        .and_then(Value::as_str)
        .ok_or_else(|| {
            JudgeError::Endpoint(format!("no choices[0].message.content in {value}"))
        })?;
    if content.trim().is_empty() {
        return Err(JudgeError::Endpoint("empty completion".to_string()));
    }
    Ok(content.to_string())
}

/// Map an NLI service reply to a verdict: a bare probability, a binary label,
/// or an entail/not-entail word.
fn interpret_entailment(reply: &str) -> Result<EntailmentVerdict, JudgeError> {
    let trimmed = reply.trim();
    if let Ok(score) = trimmed.parse::<f64>() {
        if (0.0..=1.0).contains(&score) {
            return Ok(EntailmentVerdict::from_score(score));
        }
    }
    let lower = trimmed.to_lowercase();
    if lower.starts_with('1') {
        return Ok(EntailmentVerdict::binary(true));
    }
    if lower.starts_with('0') {
        return Ok(EntailmentVerdict::binary(false));
    }
    if lower.contains("not entail") || lower.contains("no entail") {
        return Ok(EntailmentVerdict::binary(false));
    }
    if lower.contains("entail") {
        return Ok(EntailmentVerdict::binary(true));
    }
    Err(JudgeError::UnparseableReply {
        raw: reply.to_string(),
    })
}

impl AnswerGenerator for RemoteJudge {
    fn generate(
        &self,
        _question_id: &str,
        request: &GenerationRequest,
    ) -> Result<String, JudgeError> {
        self.chat(&assemble_generation_prompt(request))
    }
}

impl EntailmentJudge for RemoteJudge {
    fn entails(&self, premise: &str, hypothesis: &str) -> Result<EntailmentVerdict, JudgeError> {
        let reply = self.chat(&assemble_nli_prompt(premise, hypothesis))?;
        interpret_entailment(&reply)
    }
}

impl TextGrader for RemoteJudge {
    fn grade(
        &self,
        _question_id: &str,
        question: &str,
        answer: &str,
        metric: QualityMetric,
    ) -> Result<u8, JudgeError> {
        let reply = self.chat(&assemble_grading_prompt(metric, question, answer))?;
        parse_grade(&reply)
    }
}

impl ParagraphGenerator for RemoteJudge {
    fn annotate(&self, paragraph: &str, knowledge: &[String]) -> Result<String, JudgeError> {
        self.chat(&assemble_annotate_prompt(paragraph, knowledge))
    }

    fn extend(&self, paragraph: &str, knowledge: &str) -> Result<String, JudgeError> {
        self.chat(&assemble_extend_prompt(paragraph, knowledge))
    }
}

impl QuestionMaker for RemoteJudge {
    fn make_question(&self, paragraph: &str, style: QuestionStyle) -> Result<String, JudgeError> {
        self.chat(&assemble_question_prompt(style, paragraph))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn completion_extraction() {
        let ok = json!({"choices": [{"message": {"content": "Hello."}}]});
        assert_eq!(extract_completion(&ok).unwrap(), "Hello.");

        let empty = json!({"choices": [{"message": {"content": "  "}}]});
        assert!(extract_completion(&empty).is_err());

        let missing = json!({"error": "overloaded"});
        assert!(extract_completion(&missing).is_err());
    }

    #[test]
    fn entailment_interpretation() {
        assert!(interpret_entailment("0.93").unwrap().entailed);
        assert!(!interpret_entailment("0.2").unwrap().entailed);
        assert!(interpret_entailment("1").unwrap().entailed);
        assert!(!interpret_entailment("0").unwrap().entailed);
        assert!(interpret_entailment("Entailment").unwrap().entailed);
        assert!(!interpret_entailment("does not entail").unwrap().entailed);
        assert!(interpret_entailment("maybe").is_err());
    }

    #[test]
    fn mock_endpoint_is_rejected() {
        assert!(matches!(
            RemoteJudge::new(JudgeConfig::default()),
            Err(JudgeError::InvalidConfig(_))
        ));
    }
}
