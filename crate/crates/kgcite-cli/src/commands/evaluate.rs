//! `kgcite evaluate`: score stored answers against the dataset's minimum
//! knowledge sets and the per-question knowledge graphs, emitting JSON and
//! CSV reports.

use std::collections::BTreeMap;

use anyhow::{bail, Result};
use kgcite::citation::parse_answer;
use kgcite::dataset::{read_jsonl, write_jsonl, AnswerRecord};
use kgcite::judges::{QualityMetric, TextQualityScores};
use kgcite::metrics::{aggregate, evaluate_answer, AnswerBits, CorpusReport};
use kgcite::report::TextQualitySummary;

use crate::commands::generate::ItemFailure;
use crate::judges::{build_grader, build_nli};
use crate::manifest::ManifestBuilder;
use crate::runner::{parallel_map, RunContext};

#[derive(Debug)]
pub struct EvaluateOutcome {
    pub report: CorpusReport,
    pub failures: usize,
}

pub fn run(ctx: &RunContext) -> Result<EvaluateOutcome> {
    let answers_path = ctx.out_dir.join("answers.jsonl");
    if !answers_path.exists() {
        bail!(
            "no answers at {}; run `kgcite generate` first",
            answers_path.display()
        );
    }
    let records: Vec<AnswerRecord> = read_jsonl(&answers_path)?;
    let known: BTreeMap<String, &kgcite::questiongen::DatasetEntry> = ctx
        .dataset
        .iter()
        .map(|e| (RunContext::entry_id(e), e))
        .collect();
    let unknown: Vec<&str> = records
        .iter()
        .filter(|r| !known.contains_key(&r.question_id))
        .map(|r| r.question_id.as_str())
        .collect();
    if !unknown.is_empty() {
        bail!("answers reference unknown question ids: {}", unknown.join(", "));
    }
    let answers: BTreeMap<String, String> = records
        .into_iter()
        .map(|r| (r.question_id, r.raw_text))
        .collect();

    let nli = build_nli(&ctx.config)?;
    let grader = build_grader(&ctx.config)?;

    type ItemResult = Result<(AnswerBits, Option<TextQualityScores>), String>;
    let outcomes: Vec<(String, ItemResult)> =
        parallel_map(&ctx.dataset, ctx.effective_workers(), |_, entry| {
            let id = RunContext::entry_id(entry);
            let result: ItemResult = (|| {
                let raw = answers
                    .get(&id)
                    .ok_or_else(|| format!("no stored answer for {id}"))?;
                let answer = parse_answer(raw);
                let graphs = ctx.question_graphs(entry).map_err(|e| e.to_string())?;
                let bits = evaluate_answer(&answer, &entry.min_set, &graphs, &nli)
                    .map_err(|e| e.to_string())?;
                let quality = if ctx.config.grade_text {
                    let question = ctx.question(entry);
                    let mut scores = [0u8; 4];
                    for (slot, metric) in scores.iter_mut().zip(QualityMetric::ALL) {
                        *slot = grader
                            .grade(&id, question, raw, metric)
                            .map_err(|e| e.to_string())?;
                    }
                    Some(TextQualityScores {
                        coherence: scores[0],
                        consistency: scores[1],
                        fluency: scores[2],
                        relevance: scores[3],
                    })
                } else {
                    None
                };
                Ok((bits, quality))
            })();
            (id, result)
        });

    let mut bits = Vec::new();
    let mut quality = Vec::new();
    let mut failures = Vec::new();
    for (question_id, outcome) in outcomes {
        match outcome {
            Ok((b, q)) => {
                bits.push(b);
                quality.extend(q);
            }
            Err(error) => failures.push(ItemFailure { question_id, error }),
        }
    }
    if bits.is_empty() {
        bail!("no answers could be evaluated");
    }
    let report = aggregate(&bits, &ctx.config.metrics)?;
    let summary = TextQualitySummary::from_scores(&quality);

    let mut manifest = ManifestBuilder::start("evaluate", &ctx.config_hash);
    let condition = ctx.config.generator.identity();
    manifest.artifacts(ctx.write_reports(&ctx.out_dir, &condition, &report, summary)?);
    if !failures.is_empty() {
        let failures_path = ctx.out_dir.join("evaluation_failures.jsonl");
        write_jsonl(&failures_path, &failures)?;
        manifest.artifact(failures_path.display().to_string());
    }
    let n_failures = failures.len();
    manifest.finish(&ctx.out_dir, ctx.dataset.len(), n_failures)?;

    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.1}")).unwrap_or_else(|| "-".into());
    println!(
        "evaluate: {} answers | corr {} | micro P/R/F1 {}/{}/{} | macro P/R/F1 {}/{}/{} | align {}",
        bits.len(),
        fmt(report.correctness),
        fmt(report.micro_p),
        fmt(report.micro_r),
        fmt(report.micro_f1),
        fmt(report.macro_p),
        fmt(report.macro_r),
        fmt(report.macro_f1),
        fmt(report.alignment_pct),
    );
    Ok(EvaluateOutcome {
        report,
        failures: n_failures,
    })
}
