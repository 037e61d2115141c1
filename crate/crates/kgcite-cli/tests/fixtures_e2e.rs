//! End-to-end runs over the shipped demo fixtures in `fixtures/`: the full
//! retrieve → generate → evaluate pipeline, the construct pipeline, resume
//! semantics, and the error contracts of evaluate.

use std::path::{Path, PathBuf};

use kgcite::dataset::{read_jsonl, write_jsonl, AnswerRecord};
use kgcite_cli::commands::{construct, evaluate, generate, retrieve};
use kgcite_cli::config::RunConfig;
use kgcite_cli::runner::RunContext;

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn fixture_config(out: &Path) -> RunConfig {
    let mut config = RunConfig::default();
    config.store = Some(fixtures_dir().join("store.jsonl"));
    config.dataset = Some(fixtures_dir().join("dataset.jsonl"));
    config.out = out.to_path_buf();
    config
}

#[test]
fn pipeline_over_shipped_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let ctx = RunContext::load(fixture_config(dir.path())).unwrap();

    // Retrieval: accuracy reported over the gold people.
    let summary = retrieve::run(&ctx).unwrap();
    assert_eq!(summary.questions, 3);
    let accuracy = summary.accuracy_pct.expect("gold ids present");
    assert!(accuracy > 0.0 && accuracy <= 100.0);

    // Generation with the faithful citer, then evaluation over gold graphs:
    // recall is 100 by construction.
    let failures = generate::run(&ctx).unwrap();
    assert_eq!(failures, 0);
    let outcome = evaluate::run(&ctx).unwrap();
    assert_eq!(outcome.failures, 0);
    assert_eq!(outcome.report.micro_r, Some(100.0));
    assert_eq!(outcome.report.correctness, Some(100.0));
    // The faithful citer entails what it cites under the lexical judge.
    assert_eq!(outcome.report.alignment_pct, Some(100.0));
    // F1 agrees with its own precision/recall.
    let f1 = kgcite::metrics::harmonic_f1(
        outcome.report.micro_p.unwrap(),
        outcome.report.micro_r.unwrap(),
    )
    .unwrap();
    assert!((outcome.report.micro_f1.unwrap() - f1).abs() < 1e-9);

    // The manifest marks completion and lists the reports.
    let manifest = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    assert!(manifest.contains("report.json"));
    assert!(manifest.contains("report.csv"));
}

#[test]
fn empty_dataset_gives_empty_output_and_no_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = fixture_config(dir.path());
    let empty = dir.path().join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();
    config.dataset = Some(empty);
    let ctx = RunContext::load(config).unwrap();
    let summary = retrieve::run(&ctx).unwrap();
    assert_eq!(summary.questions, 0);
    assert_eq!(summary.results, 0);
    assert_eq!(summary.accuracy_pct, None);
}

#[test]
fn csv_and_json_reports_agree() {
    let dir = tempfile::tempdir().unwrap();
    let ctx = RunContext::load(fixture_config(dir.path())).unwrap();
    generate::run(&ctx).unwrap();
    evaluate::run(&ctx).unwrap();

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let field = |name: &str| json["report"][name].as_f64();
    for (column, name) in [
        (1, "alignment_pct"),
        (2, "correctness"),
        (3, "micro_p"),
        (4, "micro_r"),
        (5, "micro_f1"),
        (6, "macro_p"),
        (7, "macro_r"),
        (8, "macro_f1"),
    ] {
        let json_value = field(name).unwrap_or_else(|| panic!("{name} present"));
        let csv_value: f64 = row[column].parse().unwrap();
        assert_eq!(csv_value, json_value, "{name} differs between CSV and JSON");
    }
}

#[test]
fn generate_resumes_without_changing_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let ctx = RunContext::load(fixture_config(dir.path())).unwrap();
    generate::run(&ctx).unwrap();
    let first = std::fs::read(dir.path().join("answers.jsonl")).unwrap();
    generate::run(&ctx).unwrap();
    let second = std::fs::read(dir.path().join("answers.jsonl")).unwrap();
    assert_eq!(first, second, "resume must not rewrite completed answers");
}

#[test]
fn evaluate_rejects_unknown_question_ids() {
    let dir = tempfile::tempdir().unwrap();
    let ctx = RunContext::load(fixture_config(dir.path())).unwrap();
    write_jsonl(
        &dir.path().join("answers.jsonl"),
        &[AnswerRecord {
            question_id: "q9999".into(),
            raw_text: "Spurious [NA].".into(),
        }],
    )
    .unwrap();
    let err = evaluate::run(&ctx).unwrap_err().to_string();
    assert!(err.contains("q9999"), "error must list the unknown id: {err}");
}

#[test]
fn external_mentions_drive_retrieval() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = fixture_config(dir.path());
    config.mentions = Some(fixtures_dir().join("mentions.jsonl"));
    let ctx = RunContext::load(config).unwrap();
    let summary = retrieve::run(&ctx).unwrap();
    // Only the Crane entry has pre-computed mentions; the other questions
    // fall back to the gazetteer.
    assert!(summary.results >= 3);
}

#[test]
fn construct_builds_entries_from_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = fixture_config(dir.path());
    config.questiongen.seeds = Some(fixtures_dir().join("seeds.jsonl"));
    let outcome = construct::run(&config).unwrap();
    // One seed has an incomplete single-token name and is filtered out.
    assert_eq!(outcome.skipped_incomplete, 1);
    assert_eq!(outcome.entries, 2);
    assert_eq!(outcome.failures, 0);

    // Emitted entries follow the exact wire schema.
    let raw = std::fs::read_to_string(dir.path().join("dataset.jsonl")).unwrap();
    for line in raw.lines() {
        let value: serde_json::Value = serde_json::from_str(line).unwrap();
        let object = value.as_object().unwrap();
        let mut keys: Vec<&str> = object.keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(
            keys,
            vec!["general_question", "minimum_knowledge_set", "people", "specific_question"]
        );
        // Field order on the wire matches the documented schema.
        let positions: Vec<usize> = [
            "\"general_question\"",
            "\"specific_question\"",
            "\"minimum_knowledge_set\"",
            "\"people\"",
        ]
        .iter()
        .map(|k| line.find(k).expect("key present"))
        .collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
        assert!(!object["minimum_knowledge_set"].as_array().unwrap().is_empty());
    }
    // Entries load back and validate.
    let reloaded = kgcite::dataset::read_dataset(&dir.path().join("dataset.jsonl")).unwrap();
    assert_eq!(reloaded.len(), 2);

    // Traces follow the per-round schema: five rounds each.
    #[derive(serde::Deserialize)]
    struct TraceRecord {
        seed_index: usize,
        trace: kgcite::questiongen::EvolutionTrace,
    }
    let traces: Vec<TraceRecord> = read_jsonl(&dir.path().join("traces.jsonl")).unwrap();
    assert_eq!(traces.len(), 2);
    for record in &traces {
        assert!(record.seed_index < 2);
        assert_eq!(record.trace.rounds.len(), 5);
        for (i, round) in record.trace.rounds.iter().enumerate() {
            assert_eq!(round.round as usize, i + 1);
        }
    }

    // Re-running with the same settings is byte-identical.
    let first = std::fs::read(dir.path().join("dataset.jsonl")).unwrap();
    construct::run(&config).unwrap();
    let second = std::fs::read(dir.path().join("dataset.jsonl")).unwrap();
    assert_eq!(first, second);
}
