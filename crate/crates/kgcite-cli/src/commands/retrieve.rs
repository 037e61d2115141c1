//! `kgcite retrieve`: run the question → subgraph pipeline over the dataset
//! and report retrieval accuracy against the gold people when available.

use anyhow::Result;
use kgcite::retrieval::retrieve;
use serde::Serialize;

use crate::manifest::ManifestBuilder;
use crate::runner::{parallel_map, RunContext};

#[derive(Debug, Serialize)]
struct ResultRecord {
    surface: String,
    mention_type: String,
    start: usize,
    end: usize,
    center_id: String,
    candidates_considered: usize,
    match_score: u32,
}

#[derive(Debug, Serialize)]
struct RetrievalRecord {
    question_id: String,
    results: Vec<ResultRecord>,
    dropped_mentions: usize,
    invalid_mentions: usize,
    tie_breaks: usize,
}

/// Corpus-level retrieval diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct RetrievalSummary {
    pub questions: usize,
    pub results: usize,
    pub dropped_mentions: usize,
    pub invalid_mentions: usize,
    pub tie_breaks: usize,
    pub gold_people: usize,
    pub recovered: usize,
    /// Fraction of gold people whose subgraph was retrieved, as a
    /// percentage; absent when the dataset carries no gold ids.
    pub accuracy_pct: Option<f64>,
}

pub fn run(ctx: &RunContext) -> Result<RetrievalSummary> {
    let outcomes = parallel_map(&ctx.dataset, ctx.config.workers, |_, entry| {
        let outcome = retrieve(&ctx.store, ctx.question(entry), &ctx.extractor_config(entry));
        (RunContext::entry_id(entry), entry.people.clone(), outcome)
    });

    let mut records = Vec::with_capacity(outcomes.len());
    let mut summary = RetrievalSummary {
        questions: ctx.dataset.len(),
        results: 0,
        dropped_mentions: 0,
        invalid_mentions: 0,
        tie_breaks: 0,
        gold_people: 0,
        recovered: 0,
        accuracy_pct: None,
    };
    for (question_id, people, outcome) in outcomes {
        summary.results += outcome.results.len();
        summary.dropped_mentions += outcome.dropped_mentions;
        summary.invalid_mentions += outcome.invalid_mentions;
        summary.tie_breaks += outcome.tie_breaks;
        summary.gold_people += people.len();
        for person in &people {
            if outcome.results.iter().any(|r| &r.chosen.center().id == person) {
                summary.recovered += 1;
            }
        }
        records.push(RetrievalRecord {
            question_id,
            results: outcome
                .results
                .iter()
                .map(|r| ResultRecord {
                    surface: r.mention.surface.clone(),
                    mention_type: r.mention.mention_type.clone(),
                    start: r.mention.start,
                    end: r.mention.end,
                    center_id: r.chosen.center().id.to_string(),
                    candidates_considered: r.candidates_considered,
                    match_score: r.match_score,
                })
                .collect(),
            dropped_mentions: outcome.dropped_mentions,
            invalid_mentions: outcome.invalid_mentions,
            tie_breaks: outcome.tie_breaks,
        });
    }
    if summary.gold_people > 0 {
        summary.accuracy_pct =
            Some(summary.recovered as f64 / summary.gold_people as f64 * 100.0);
    }

    let mut manifest = ManifestBuilder::start("retrieve", &ctx.config_hash);
    let results_path = ctx.out_dir.join("retrieval.jsonl");
    kgcite::dataset::write_jsonl(&results_path, &records)?;
    manifest.artifact(results_path.display().to_string());
    let summary_path = ctx.out_dir.join("retrieval_summary.json");
    std::fs::write(&summary_path, serde_json::to_string_pretty(&summary)?)?;
    manifest.artifact(summary_path.display().to_string());
    manifest.finish(&ctx.out_dir, ctx.dataset.len(), 0)?;

    match summary.accuracy_pct {
        Some(pct) => println!(
            "retrieve: {} questions, {} results, retrieval accuracy {:.1}%",
            summary.questions, summary.results, pct
        ),
        None => println!(
            "retrieve: {} questions, {} results, no gold ids for accuracy",
            summary.questions, summary.results
        ),
    }
    Ok(summary)
}
