//! Build concrete judges from run configuration: deterministic mocks for the
//! `mock` endpoint, chat-completions clients otherwise, and transcript
//! replays when `--replay` is given.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use kgcite::dataset::{read_jsonl, AnswerRecord};
use kgcite::judges::mock::{
    LexicalEntailment, MockFaithfulCiter, MockGapAwareCiter, MockGrader, ScriptedGenerator,
};
use kgcite::judges::transcript::{ReplayEntailment, ReplayGenerator, ReplayGrader, Transcript};
use kgcite::judges::{AnswerGenerator, EntailmentJudge, RemoteJudge, TextGrader};
use kgcite::questiongen::DatasetEntry;

use crate::config::RunConfig;

/// Answer generator per config: mock kinds are selected by `model_name`
/// (`faithful-citer`, `gap-aware`, or `scripted:<answers.jsonl>`).
pub fn build_generator(
    config: &RunConfig,
    dataset: &[DatasetEntry],
) -> Result<Box<dyn AnswerGenerator>> {
    if let Some(path) = &config.replay {
        return Ok(Box::new(ReplayGenerator {
            transcript: load_transcript(path)?,
        }));
    }
    let judge = &config.generator;
    judge.validate()?;
    if !judge.is_mock() {
        return Ok(Box::new(RemoteJudge::new(judge.clone())?));
    }
    match judge.model_name.as_str() {
        "faithful-citer" => Ok(Box::new(MockFaithfulCiter)),
        "gap-aware" => {
            let known: BTreeMap<_, _> = dataset
                .iter()
                .filter_map(|e| {
                    e.id.clone()
                        .map(|id| (id, e.min_set.triples().clone()))
                })
                .collect();
            Ok(Box::new(MockGapAwareCiter::new(known)))
        }
        scripted if scripted.starts_with("scripted:") => {
            let path = scripted.trim_start_matches("scripted:");
            let records: Vec<AnswerRecord> = read_jsonl(Path::new(path))
                .with_context(|| format!("loading scripted answers from {path}"))?;
            let mut generator = ScriptedGenerator::default();
            for r in records {
                generator.insert(r.question_id, r.raw_text);
            }
            Ok(Box::new(generator))
        }
        other => bail!(
            "unknown mock generator {other:?}; use faithful-citer, gap-aware, or scripted:<path>"
        ),
    }
}

pub fn build_nli(config: &RunConfig) -> Result<Box<dyn EntailmentJudge>> {
    if let Some(path) = &config.replay {
        return Ok(Box::new(ReplayEntailment {
            transcript: load_transcript(path)?,
        }));
    }
    let judge = &config.nli;
    judge.validate()?;
    if judge.is_mock() {
        Ok(Box::new(LexicalEntailment))
    } else {
        Ok(Box::new(RemoteJudge::new(judge.clone())?))
    }
}

pub fn build_grader(config: &RunConfig) -> Result<Box<dyn TextGrader>> {
    if let Some(path) = &config.replay {
        return Ok(Box::new(ReplayGrader {
            transcript: load_transcript(path)?,
        }));
    }
    let judge = &config.grader;
    judge.validate()?;
    if judge.is_mock() {
        Ok(Box::new(MockGrader::default()))
    } else {
        Ok(Box::new(RemoteJudge::new(judge.clone())?))
    }
}

/// Identity string of the judges, for report metadata.
pub fn judge_identity(config: &RunConfig) -> String {
    format!(
        "generator={} nli={} grader={}",
        config.generator.identity(),
        config.nli.identity(),
        config.grader.identity()
    )
}

fn load_transcript(path: &Path) -> Result<Transcript> {
    Transcript::load(path).with_context(|| format!("loading transcript {}", path.display()))
}
