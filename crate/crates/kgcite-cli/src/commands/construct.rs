//! `kgcite construct`: the dataset-construction pipeline. Ingestion records
//! are filtered (complete names), disambiguated against the store (the pair
//! connected by the stated relation), and evolved into dataset entries.
//! Relation statistics are bootstrapped from a first annotation pass over
//! every usable seed, then frozen for the whole run.

use anyhow::{bail, Context, Result};
use kgcite::citation::parse_answer;
use kgcite::dataset::{read_jsonl, write_jsonl, SeedRecord};
use kgcite::judges::mock::{LexicalAnnotator, LexicalPerplexity, TemplateQuestionMaker};
use kgcite::judges::prompts::knowledge_entry;
use kgcite::judges::RemoteJudge;
use kgcite::metrics::MinKnowledgeSet;
use kgcite::questiongen::{
    disambiguate_pair, evolve, filter_name_pair, EvolutionTrace, EvolveParams, KnowledgePool,
    ParagraphGenerator, QuestionMaker, RelationStats,
};
use kgcite::store::{KnowledgeStore, StoreFormat};
use serde::Serialize;

use crate::config::RunConfig;
use crate::manifest::ManifestBuilder;

#[derive(Debug, Serialize)]
struct TraceRecord {
    seed_index: usize,
    trace: EvolutionTrace,
}

#[derive(Debug, Serialize)]
struct ConstructFailure {
    seed_index: usize,
    reason: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    partial_trace: Option<EvolutionTrace>,
}

pub struct ConstructOutcome {
    pub entries: usize,
    pub skipped_incomplete: usize,
    pub skipped_unresolved: usize,
    pub failures: usize,
}

pub fn run(config: &RunConfig) -> Result<ConstructOutcome> {
    let store_path = config.store_path()?;
    let store = KnowledgeStore::load(store_path, StoreFormat::from_path(store_path))
        .with_context(|| format!("loading store {}", store_path.display()))?;
    let seeds_path = config
        .questiongen
        .seeds
        .as_deref()
        .context("construct needs `questiongen.seeds` (JSONL of paragraph/name_a/name_b/relation)")?;
    let seeds: Vec<SeedRecord> = read_jsonl(seeds_path)?;
    std::fs::create_dir_all(&config.out)?;

    let (generator, question_maker): (Box<dyn ParagraphGenerator>, Box<dyn QuestionMaker>) =
        if config.generator.is_mock() {
            (Box::new(LexicalAnnotator), Box::new(TemplateQuestionMaker))
        } else {
            (
                Box::new(RemoteJudge::new(config.generator.clone())?),
                Box::new(RemoteJudge::new(config.generator.clone())?),
            )
        };
    let perplexity = LexicalPerplexity;

    // Pair filtering and disambiguation.
    let mut skipped_incomplete = 0usize;
    let mut skipped_unresolved = 0usize;
    let mut usable: Vec<(usize, &SeedRecord, KnowledgePool)> = Vec::new();
    for (idx, seed) in seeds.iter().enumerate() {
        if !filter_name_pair(&seed.name_a, &seed.name_b) {
            skipped_incomplete += 1;
            continue;
        }
        let Some((a, b)) = disambiguate_pair(&seed.name_a, &seed.name_b, &seed.relation, &store)
        else {
            skipped_unresolved += 1;
            continue;
        };
        let pool = KnowledgePool::new(vec![store.neighborhood(&a)?, store.neighborhood(&b)?]);
        usable.push((idx, seed, pool));
    }
    if usable.is_empty() {
        bail!("no usable seeds after filtering and disambiguation");
    }

    // Bootstrap relation statistics from a round-1 annotation pass, frozen
    // for the run (minimum-set counting over the corpus being built).
    let mut seed_sets: Vec<MinKnowledgeSet> = Vec::with_capacity(usable.len());
    for (_, seed, pool) in &usable {
        let entries: Vec<String> = pool.subgraphs().iter().map(knowledge_entry).collect();
        let annotated = generator.annotate(&seed.paragraph, &entries)?;
        let set: MinKnowledgeSet = parse_answer(&annotated)
            .triple_citations()
            .filter(|t| pool.contains(t))
            .cloned()
            .collect();
        seed_sets.push(set);
    }
    let stats = RelationStats::from_min_sets(&seed_sets)?;

    let params = EvolveParams {
        rounds: config.questiongen.rounds,
        alpha: config.questiongen.alpha,
        norm: config.questiongen.norm,
        normalize_specificity: config.questiongen.normalize_specificity,
    };
    let mut entries = Vec::new();
    let mut traces = Vec::new();
    let mut failures = Vec::new();
    for (idx, seed, pool) in usable {
        match evolve(
            &seed.paragraph,
            pool,
            &stats,
            generator.as_ref(),
            question_maker.as_ref(),
            &perplexity,
            &params,
        ) {
            Ok(outcome) => {
                entries.push(outcome.entry);
                traces.push(TraceRecord {
                    seed_index: idx,
                    trace: outcome.trace,
                });
            }
            Err(failure) => failures.push(ConstructFailure {
                seed_index: idx,
                reason: failure.error.to_string(),
                partial_trace: Some(failure.partial),
            }),
        }
    }

    let mut manifest = ManifestBuilder::start("construct", &config.hash());
    let dataset_path = config.out.join("dataset.jsonl");
    write_jsonl(&dataset_path, &entries)?;
    manifest.artifact(dataset_path.display().to_string());
    let traces_path = config.out.join("traces.jsonl");
    write_jsonl(&traces_path, &traces)?;
    manifest.artifact(traces_path.display().to_string());
    let stats_path = config.out.join("relation_stats.json");
    std::fs::write(&stats_path, serde_json::to_string_pretty(&stats)?)?;
    manifest.artifact(stats_path.display().to_string());
    if !failures.is_empty() {
        let failures_path = config.out.join("construct_failures.jsonl");
        write_jsonl(&failures_path, &failures)?;
        manifest.artifact(failures_path.display().to_string());
    }
    let n_failures = failures.len();
    manifest.finish(&config.out, seeds.len(), n_failures)?;

    println!(
        "construct: {} entries from {} seeds ({} incomplete names, {} unresolved pairs, {} failures)",
        entries.len(),
        seeds.len(),
        skipped_incomplete,
        skipped_unresolved,
        n_failures
    );
    Ok(ConstructOutcome {
        entries: entries.len(),
        skipped_incomplete,
        skipped_unresolved,
        failures: n_failures,
    })
}
