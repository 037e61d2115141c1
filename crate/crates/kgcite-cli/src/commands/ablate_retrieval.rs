//! `kgcite ablate-retrieval`: the retrieval-corruption harness. For each
//! fraction f the harness replaces a seeded draw of f of the per-question
//! gold graphs with decoys (other questions' graphs with a different
//! center), regenerates answers, and scores citation metrics. Replaced
//! positions are nested across fractions, so metrics are monotone per seed.

use anyhow::Result;
use kgcite::citation::parse_answer;
use kgcite::metrics::{aggregate, evaluate_answer, AnswerBits, CorpusReport};
use kgcite::report::CORRUPTION_TREND_HEADER;
use kgcite::store::{corrupt_retrieval, SubGraph};

use crate::commands::generate::ItemFailure;
use crate::judges::{build_generator, build_nli};
use crate::manifest::ManifestBuilder;
use crate::runner::{parallel_map, RunContext};

#[derive(Debug)]
pub struct FractionOutcome {
    pub fraction: f64,
    pub evaluated: usize,
    pub report: CorpusReport,
}

#[derive(Debug)]
pub struct AblateRetrievalOutcome {
    pub fractions: Vec<FractionOutcome>,
    pub failures: usize,
}

pub fn run(ctx: &RunContext) -> Result<AblateRetrievalOutcome> {
    let generator = build_generator(&ctx.config, &ctx.dataset)?;
    let nli = build_nli(&ctx.config)?;

    // Flatten the corpus into one graph list; remember which entry each
    // position belongs to.
    let mut owners: Vec<usize> = Vec::new();
    let mut graphs: Vec<SubGraph> = Vec::new();
    for (idx, entry) in ctx.dataset.iter().enumerate() {
        for graph in ctx.gold_graphs(entry)? {
            owners.push(idx);
            graphs.push(graph);
        }
    }
    // Decoy pool: the other questions' gold graphs. Assignment guarantees a
    // different center than the graph it replaces.
    let decoys = graphs.clone();

    let mut manifest = ManifestBuilder::start("ablate-retrieval", &ctx.config_hash);
    let mut fractions = Vec::new();
    let mut failures: Vec<ItemFailure> = Vec::new();
    let mut trend = vec![CORRUPTION_TREND_HEADER.to_string()];

    for &fraction in &ctx.config.ablation.fractions {
        let corrupted = corrupt_retrieval(&graphs, fraction, &decoys, ctx.config.seed)?;
        let mut per_entry: Vec<Vec<SubGraph>> = vec![Vec::new(); ctx.dataset.len()];
        for (pos, graph) in corrupted.into_iter().enumerate() {
            per_entry[owners[pos]].push(graph);
        }

        let items: Vec<(usize, &kgcite::questiongen::DatasetEntry)> =
            ctx.dataset.iter().enumerate().collect();
        let outcomes = parallel_map(&items, ctx.effective_workers(), |_, (idx, entry)| {
            let id = RunContext::entry_id(entry);
            let result: Result<AnswerBits, String> = (|| {
                let provided = &per_entry[*idx];
                let request = ctx.generation_request(entry, provided);
                let raw = generator.generate(&id, &request).map_err(|e| e.to_string())?;
                let answer = parse_answer(&raw);
                evaluate_answer(&answer, &entry.min_set, provided, &nli).map_err(|e| e.to_string())
            })();
            (id, result)
        });

        let mut bits = Vec::new();
        for (question_id, outcome) in outcomes {
            match outcome {
                Ok(b) => bits.push(b),
                Err(error) => failures.push(ItemFailure { question_id, error }),
            }
        }
        if bits.is_empty() {
            failures.push(ItemFailure {
                question_id: format!("fraction-{fraction}"),
                error: "every entry failed".to_string(),
            });
            continue;
        }
        let report = aggregate(&bits, &ctx.config.metrics)?;
        let label = format!("{:02}", (fraction * 100.0).round() as u32);
        let dir = ctx.out_dir.join("ablate_retrieval").join(format!("f_{label}"));
        manifest.artifacts(ctx.write_reports(&dir, &format!("corrupt-{label}"), &report, None)?);
        let cell = |v: Option<f64>| {
            v.map(|x| format!("{:.1}", kgcite::metrics::round1(x)))
                .unwrap_or_default()
        };
        trend.push(format!(
            "{fraction},{},{},{},{},{}",
            bits.len(),
            cell(report.correctness),
            cell(report.micro_p),
            cell(report.micro_r),
            cell(report.micro_f1),
        ));
        fractions.push(FractionOutcome {
            fraction,
            evaluated: bits.len(),
            report,
        });
    }

    let harness_dir = ctx.out_dir.join("ablate_retrieval");
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
    manifest.finish(
        &ctx.out_dir,
        ctx.dataset.len() * ctx.config.ablation.fractions.len(),
        n_failures,
    )?;

    for f in &fractions {
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.1}")).unwrap_or_else(|| "-".into());
        println!(
            "ablate-retrieval f={:.1}: {} entries | micro P/R {}/{}",
            f.fraction,
            f.evaluated,
            fmt(f.report.micro_p),
            fmt(f.report.micro_r),
        );
    }
    Ok(AblateRetrievalOutcome {
        fractions,
        failures: n_failures,
    })
}
