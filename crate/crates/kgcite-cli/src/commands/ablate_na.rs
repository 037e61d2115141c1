//! `kgcite ablate-na`: the knowledge-removal harness. For each round k the
//! harness removes k seeded-random triples from every entry's minimum set,
//! regenerates answers against the reduced graphs, and scores citation
//! metrics plus [NA] precision/recall against the removed set. Rounds are
//! nested: round k removes the same triples as round k-1 plus one more.

use std::collections::BTreeSet;

use anyhow::Result;
use kgcite::citation::parse_answer;
use kgcite::judges::mock::LexicalRelevance;
use kgcite::metrics::{
    aggregate, evaluate_answer_with_absent, AnswerBits, CorpusReport, OfftopicCredit,
};
use kgcite::report::NA_TREND_HEADER;
use kgcite::rng::{derive_seed, sample_prefix};
use kgcite::store::{KnowledgeTriple, SubGraph};

use crate::commands::generate::ItemFailure;
use crate::judges::{build_generator, build_nli};
use crate::manifest::ManifestBuilder;
use crate::runner::{parallel_map, RunContext};

#[derive(Debug)]
pub struct RoundOutcome {
    pub removed: usize,
    pub evaluated: usize,
    pub skipped: usize,
    pub report: CorpusReport,
}

#[derive(Debug)]
pub struct AblateNaOutcome {
    pub rounds: Vec<RoundOutcome>,
    pub failures: usize,
}

/// The nested victim set for one entry at removal count k.
pub fn victims_for(
    entry_id: &str,
    min_set: &kgcite::metrics::MinKnowledgeSet,
    k: usize,
    run_seed: u64,
) -> BTreeSet<KnowledgeTriple> {
    let ordered: Vec<&KnowledgeTriple> = min_set.iter().collect();
    sample_prefix(ordered.len(), k, derive_seed(run_seed, entry_id))
        .into_iter()
        .map(|i| ordered[i].clone())
        .collect()
}

/// Remove the victims present in each graph.
pub fn reduce_graphs(
    graphs: &[SubGraph],
    victims: &BTreeSet<KnowledgeTriple>,
) -> Result<Vec<SubGraph>> {
    graphs
        .iter()
        .map(|g| {
            let local: BTreeSet<KnowledgeTriple> =
                victims.iter().filter(|v| g.contains(v)).cloned().collect();
            Ok(g.remove_knowledge(&local)?.0)
        })
        .collect()
}

pub fn run(ctx: &RunContext) -> Result<AblateNaOutcome> {
    let generator = build_generator(&ctx.config, &ctx.dataset)?;
    let nli = build_nli(&ctx.config)?;
    let removals = ctx.config.ablation.removals.clone();
    let offtopic_judge = LexicalRelevance;

    let mut manifest = ManifestBuilder::start("ablate-na", &ctx.config_hash);
    let mut rounds = Vec::new();
    let mut failures: Vec<ItemFailure> = Vec::new();
    let mut trend = vec![NA_TREND_HEADER.to_string()];

    for &k in &removals {
        let outcomes = parallel_map(&ctx.dataset, ctx.effective_workers(), |_, entry| {
            let id = RunContext::entry_id(entry);
            if entry.min_set.len() <= k {
                return (id, None);
            }
            let result: Result<AnswerBits, String> = (|| {
                let victims = victims_for(&id, &entry.min_set, k, ctx.config.seed);
                let gold = ctx.gold_graphs(entry).map_err(|e| e.to_string())?;
                let reduced = reduce_graphs(&gold, &victims).map_err(|e| e.to_string())?;
                let request = ctx.generation_request(entry, &reduced);
                let raw = generator.generate(&id, &request).map_err(|e| e.to_string())?;
                let answer = parse_answer(&raw);
                let credit = OfftopicCredit {
                    question: ctx.question(entry),
                    judge: &offtopic_judge,
                };
                let offtopic = ctx.config.metrics.na_offtopic_credit.then_some(&credit);
                evaluate_answer_with_absent(
                    &answer,
                    &entry.min_set,
                    &reduced,
                    &victims,
                    &nli,
                    offtopic,
                )
                .map_err(|e| e.to_string())
            })();
            (id, Some(result))
        });

        let mut bits = Vec::new();
        let mut skipped = 0usize;
        for (question_id, outcome) in outcomes {
            match outcome {
                None => skipped += 1,
                Some(Ok(b)) => bits.push(b),
                Some(Err(error)) => failures.push(ItemFailure { question_id, error }),
            }
        }
        if bits.is_empty() {
            failures.push(ItemFailure {
                question_id: format!("round-{k}"),
                error: "every entry was skipped or failed".to_string(),
            });
            continue;
        }
        let report = aggregate(&bits, &ctx.config.metrics)?;
        let round_dir = ctx.out_dir.join("ablate_na").join(format!("round_{k}"));
        let condition = format!("removed-{k}");
        manifest.artifacts(ctx.write_reports(&round_dir, &condition, &report, None)?);
        let cell = |v: Option<f64>| {
            v.map(|x| format!("{:.1}", kgcite::metrics::round1(x)))
               .unwrap_or_default()
        };
        trend.push(format!(
            "{k},{},{skipped},{},{},{},{},{},{},{}",
            bits.len(),
            cell(report.correctness),
            cell(report.micro_p),
            cell(report.micro_r),
            cell(report.micro_f1),
            cell(report.na_p),
            cell(report.na_r),
            cell(report.na_f1),
        ));
        rounds.push(RoundOutcome {
            removed: k,
            evaluated: bits.len(),
            skipped,
            report,
        });
    }

    let harness_dir = ctx.out_dir.join("ablate_na");
    std::fs::create_dir_all(&harness_dir)?;
    let trend_path = harness_dir.join("trend.csv");
    std::fs::write(&trend_path, format!("{}\n", trend.join("\n")))?;
    manifest.artifact(trend_path.display().to_string());
    let n_failures = failures.len();
    if !failures.is_empty() {
        let failures_path = ctx.out_dir.join("ablation_failures.jsonl");
        kgcite::dataset::write_jsonl(&failures_path, &failures)?;
        manifest.artifact(failures_path.display().to_string());
    }
    manifest.finish(&ctx.out_dir, ctx.dataset.len() * removals.len(), n_failures)?;

    for round in &rounds {
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.1}")).unwrap_or_else(|| "-".into());
        println!(
            "ablate-na k={}: {} entries ({} skipped) | micro R {} | [NA] P/R {}/{}",
            round.removed,
            round.evaluated,
            round.skipped,
            fmt(round.report.micro_r),
            fmt(round.report.na_p),
            fmt(round.report.na_r),
        );
    }
    Ok(AblateNaOutcome {
        rounds,
        failures: n_failures,
    })
}
