//! `kgcite generate`: one attributed answer per question, with judge
//! transcripts for replay. Re-running skips questions that already have an
//! answer, so interrupted runs resume.

use std::collections::BTreeMap;

use anyhow::Result;
use kgcite::dataset::{read_jsonl, write_jsonl, AnswerRecord};
use kgcite::judges::prompts::assemble_generation_prompt;
use kgcite::judges::transcript::TranscriptRecorder;
use serde::Serialize;

use crate::judges::build_generator;
use crate::manifest::ManifestBuilder;
use crate::runner::{parallel_map, RunContext};

#[derive(Debug, Serialize)]
pub struct ItemFailure {
    pub question_id: String,
    pub error: String,
}

pub fn run(ctx: &RunContext) -> Result<usize> {
    let generator = build_generator(&ctx.config, &ctx.dataset)?;
    let recorder = TranscriptRecorder::new();

    let answers_path = ctx.out_dir.join("answers.jsonl");
    let existing: BTreeMap<String, String> = if answers_path.exists() {
        read_jsonl::<AnswerRecord>(&answers_path)?
            .into_iter()
            .map(|r| (r.question_id, r.raw_text))
            .collect()
    } else {
        BTreeMap::new()
    };

    let outcomes = parallel_map(&ctx.dataset, ctx.effective_workers(), |_, entry| {
        let id = RunContext::entry_id(entry);
        if let Some(answer) = existing.get(&id) {
            return (id, Ok(answer.clone()));
        }
        let produced = ctx.question_graphs(entry).map_err(|e| e.to_string()).and_then(|graphs| {
            let request = ctx.generation_request(entry, &graphs);
            let answer = generator
                .generate(&id, &request)
                .map_err(|e| e.to_string())?;
            recorder.record("generation", &assemble_generation_prompt(&request), &answer);
            Ok(answer)
        });
        (id, produced)
    });

    let mut answers = Vec::new();
    let mut failures = Vec::new();
    for (question_id, outcome) in outcomes {
        match outcome {
            Ok(raw_text) => answers.push(AnswerRecord {
                question_id,
                raw_text,
            }),
            Err(error) => failures.push(ItemFailure { question_id, error }),
        }
    }

    let mut manifest = ManifestBuilder::start("generate", &ctx.config_hash);
    write_jsonl(&answers_path, &answers)?;
    manifest.artifact(answers_path.display().to_string());
    if !recorder.is_empty() {
        let transcripts_path = ctx.out_dir.join("transcripts.jsonl");
        recorder.write_jsonl(&transcripts_path)?;
        manifest.artifact(transcripts_path.display().to_string());
    }
    if !failures.is_empty() {
        let failures_path = ctx.out_dir.join("generation_failures.jsonl");
        write_jsonl(&failures_path, &failures)?;
        manifest.artifact(failures_path.display().to_string());
    }
    let n_failures = failures.len();
    manifest.finish(&ctx.out_dir, ctx.dataset.len(), n_failures)?;

    println!(
        "generate: {} answers ({} reused), {} failures",
        answers.len(),
        existing.len().min(answers.len()),
        n_failures
    );
    Ok(n_failures)
}
