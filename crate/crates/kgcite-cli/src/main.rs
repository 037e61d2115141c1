use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use kgcite_cli::commands;
use kgcite_cli::config::{KgSource, QuestionMode, RunConfig};
use kgcite_cli::runner::RunContext;

/// Knowledge-graph-grounded answer attribution: retrieval, generation with
/// inline triple citations, the citation metric suite, and the two ablation
/// harnesses.
#[derive(Debug, Parser)]
#[command(name = "kgcite", version)]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run seed (victim selection, corruption draws).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Knowledge store dump (JSONL or TSV).
    #[arg(long, global = true)]
    store: Option<PathBuf>,
    /// Dataset (JSONL of entries).
    #[arg(long, global = true)]
    dataset: Option<PathBuf>,
    /// Output directory; the manifest is written there last.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Chat-completions endpoint for every judge role.
    #[arg(long, global = true)]
    judge_endpoint: Option<String>,
    /// Force every judge to its deterministic mock.
    #[arg(long, global = true)]
    mock: bool,
    /// Corruption fractions for ablate-retrieval, e.g. 0,0.2,0.4.
    #[arg(long, global = true, value_delimiter = ',')]
    fractions: Option<Vec<f64>>,
    /// Removal counts for ablate-na, e.g. 1,2,3.
    #[arg(long, global = true, value_delimiter = ',')]
    removals: Option<Vec<usize>>,
    /// Specificity weight in knowledge selection (construct).
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Evolution rounds (construct).
    #[arg(long, global = true)]
    rounds: Option<u32>,
    /// Which question each entry is asked with.
    #[arg(long, global = true, value_enum)]
    question_mode: Option<QuestionModeArg>,
    /// Knowledge source for generation/evaluation.
    #[arg(long, global = true, value_enum)]
    kg: Option<KgSourceArg>,
    /// Pre-computed mentions JSONL (external NER mode).
    #[arg(long, global = true)]
    mentions: Option<PathBuf>,
    /// Replay a transcript log instead of calling judges.
    #[arg(long, global = true)]
    replay: Option<PathBuf>,
    /// Bounded worker pool size.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Grade text quality during evaluate.
    #[arg(long, global = true)]
    grade: bool,
    /// Generator selection: a mock kind (faithful-citer, gap-aware,
    /// scripted:<path>) or a remote model name.
    #[arg(long, global = true)]
    generator_model: Option<String>,
    /// Seeds file for construct (JSONL of paragraph/name_a/name_b/relation).
    #[arg(long, global = true)]
    seeds: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum QuestionModeArg {
    General,
    Specific,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KgSourceArg {
    Gold,
    Retrieved,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Retrieve per-question subgraphs and report retrieval accuracy.
    Retrieve,
    /// Generate one attributed answer per question.
    Generate,
    /// Score stored answers and emit JSON/CSV reports.
    Evaluate,
    /// Knowledge-removal harness with [NA] precision/recall.
    AblateNa,
    /// Retrieval-corruption harness across a fraction ladder.
    AblateRetrieval,
    /// Build a dataset from seed paragraphs via evolutionary generation.
    Construct,
}

fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(store) = &cli.store {
        config.store = Some(store.clone());
    }
    if let Some(dataset) = &cli.dataset {
        config.dataset = Some(dataset.clone());
    }
    if let Some(out) = &cli.out {
        config.out = out.clone();
    }
    if let Some(endpoint) = &cli.judge_endpoint {
        config.generator.endpoint = endpoint.clone();
        config.nli.endpoint = endpoint.clone();
        config.grader.endpoint = endpoint.clone();
    }
    if cli.mock {
        config.generator.endpoint = "mock".to_string();
        config.nli.endpoint = "mock".to_string();
        config.grader.endpoint = "mock".to_string();
    }
    if let Some(fractions) = &cli.fractions {
        config.ablation.fractions = fractions.clone();
    }
    if let Some(removals) = &cli.removals {
        config.ablation.removals = removals.clone();
    }
    if let Some(alpha) = cli.alpha {
        config.questiongen.alpha = alpha;
    }
    if let Some(rounds) = cli.rounds {
        config.questiongen.rounds = rounds;
    }
    if let Some(mode) = cli.question_mode {
        config.question_mode = match mode {
            QuestionModeArg::General => QuestionMode::General,
            QuestionModeArg::Specific => QuestionMode::Specific,
        };
    }
    if let Some(kg) = cli.kg {
        config.kg_source = match kg {
            KgSourceArg::Gold => KgSource::Gold,
            KgSourceArg::Retrieved => KgSource::Retrieved,
        };
    }
    if let Some(mentions) = &cli.mentions {
        config.mentions = Some(mentions.clone());
    }
    if let Some(replay) = &cli.replay {
        config.replay = Some(replay.clone());
    }
    if let Some(workers) = cli.workers {
        config.workers = workers.max(1);
    }
    if cli.grade {
        config.grade_text = true;
    }
    if let Some(model) = &cli.generator_model {
        config.generator.model_name = model.clone();
    }
    if let Some(seeds) = &cli.seeds {
        config.questiongen.seeds = Some(seeds.clone());
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<usize> {
    let config = resolve_config(&cli)?;
    match cli.command {
        Command::Construct => Ok(commands::construct::run(&config)?.failures),
        Command::Retrieve => {
            let ctx = RunContext::load(config)?;
            commands::retrieve::run(&ctx)?;
            Ok(0)
        }
        Command::Generate => {
            let ctx = RunContext::load(config)?;
            commands::generate::run(&ctx)
        }
        Command::Evaluate => {
            let ctx = RunContext::load(config)?;
            Ok(commands::evaluate::run(&ctx)?.failures)
        }
        Command::AblateNa => {
            let ctx = RunContext::load(config)?;
            Ok(commands::ablate_na::run(&ctx)?.failures)
        }
        Command::AblateRetrieval => {
            let ctx = RunContext::load(config)?;
            Ok(commands::ablate_retrieval::run(&ctx)?.failures)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(failures) => ExitCode::from(failures.min(100) as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
