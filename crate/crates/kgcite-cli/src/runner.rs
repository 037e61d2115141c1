//! Shared run machinery: loading the store and dataset, per-entry knowledge
//! graphs, the bounded worker pool, and report writing.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{Context, Result};
use kgcite::dataset::read_dataset;
use kgcite::judges::prompts::knowledge_entry;
use kgcite::judges::GenerationRequest;
use kgcite::metrics::CorpusReport;
use kgcite::questiongen::DatasetEntry;
use kgcite::report::{csv_row, ReportFile, RunMetadata, TextQualitySummary, CSV_HEADER};
use kgcite::retrieval::{retrieve, ExtractorConfig};
use kgcite::store::{KnowledgeStore, StoreFormat, SubGraph};

use crate::config::{KgSource, QuestionMode, RunConfig};
use crate::judges::judge_identity;

/// A loaded run: config, hash, store, dataset, output directory.
pub struct RunContext {
    pub config: RunConfig,
    pub config_hash: String,
    pub out_dir: PathBuf,
    pub store: KnowledgeStore,
    pub dataset: Vec<DatasetEntry>,
    external_mentions: Option<BTreeMap<String, Vec<kgcite::retrieval::EntityMention>>>,
}

impl RunContext {
    /// Load everything a dataset-driven subcommand needs; creates the output
    /// directory.
    pub fn load(config: RunConfig) -> Result<Self> {
        let store_path = config.store_path()?;
        let store = KnowledgeStore::load(store_path, StoreFormat::from_path(store_path))
            .with_context(|| format!("loading store {}", store_path.display()))?;
        let dataset_path = config.dataset_path()?;
        let dataset = read_dataset(dataset_path)
            .with_context(|| format!("loading dataset {}", dataset_path.display()))?;
        Self::with_parts(config, store, dataset)
    }

    /// Assemble a context from in-memory parts (used by the harness tests).
    pub fn with_parts(
        config: RunConfig,
        store: KnowledgeStore,
        dataset: Vec<DatasetEntry>,
    ) -> Result<Self> {
        let out_dir = config.out.clone();
        std::fs::create_dir_all(&out_dir)
            .with_context(|| format!("creating output dir {}", out_dir.display()))?;
        let external_mentions = match &config.mentions {
            Some(path) => {
                let records = kgcite::dataset::read_jsonl(path)
                    .with_context(|| format!("loading mentions {}", path.display()))?;
                Some(kgcite::dataset::mentions_by_question(records))
            }
            None => None,
        };
        Ok(Self {
            config_hash: config.hash(),
            out_dir,
            config,
            store,
            dataset,
            external_mentions,
        })
    }

    pub fn question<'a>(&self, entry: &'a DatasetEntry) -> &'a str {
        match self.config.question_mode {
            QuestionMode::General => &entry.general_question,
            QuestionMode::Specific => &entry.specific_question,
        }
    }

    pub fn entry_id(entry: &DatasetEntry) -> String {
        entry.id.clone().unwrap_or_default()
    }

    /// Gold knowledge graphs of an entry: one-hop neighborhoods of its
    /// people.
    pub fn gold_graphs(&self, entry: &DatasetEntry) -> Result<Vec<SubGraph>> {
        entry
            .people
            .iter()
            .map(|id| {
                self.store
                    .neighborhood(id)
                    .with_context(|| format!("gold person {id} of entry {:?}", entry.id))
            })
            .collect()
    }

    /// Per-question graphs under the configured source.
    pub fn question_graphs(&self, entry: &DatasetEntry) -> Result<Vec<SubGraph>> {
        match self.config.kg_source {
            KgSource::Gold => self.gold_graphs(entry),
            KgSource::Retrieved => {
                let outcome = retrieve(
                    &self.store,
                    self.question(entry),
                    &self.extractor_config(entry),
                );
                Ok(outcome.results.into_iter().map(|r| r.chosen).collect())
            }
        }
    }

    /// Extractor config for one entry: external mentions when a mentions
    /// file was supplied, gazetteer otherwise.
    pub fn extractor_config(&self, entry: &DatasetEntry) -> ExtractorConfig {
        if let Some(mentions) = &self.external_mentions {
            let id = Self::entry_id(entry);
            if let Some(found) = mentions.get(&id) {
                return ExtractorConfig::external(found.clone());
            }
        }
        ExtractorConfig::gazetteer()
    }

    /// Generation request over the given graphs.
    pub fn generation_request(&self, entry: &DatasetEntry, graphs: &[SubGraph]) -> GenerationRequest {
        let block: Vec<String> = graphs.iter().map(knowledge_entry).collect();
        GenerationRequest::new(block, self.question(entry))
    }

    /// Worker-pool size for judge-calling loops: the configured pool,
    /// capped by the in-flight limit of every remote judge in play.
    pub fn effective_workers(&self) -> usize {
        let mut limit = self.config.workers.max(1);
        for judge in [&self.config.generator, &self.config.nli, &self.config.grader] {
            if !judge.is_mock() {
                limit = limit.min(judge.max_inflight.max(1));
            }
        }
        limit
    }

    pub fn metadata(&self) -> RunMetadata {
        RunMetadata {
            seed: self.config.seed,
            config_hash: self.config_hash.clone(),
            judge: judge_identity(&self.config),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    /// Write report.json (rounded) and report.csv under `dir`, returning the
    /// relative artifact names.
    pub fn write_reports(
        &self,
        dir: &std::path::Path,
        condition: &str,
        report: &CorpusReport,
        text_quality: Option<TextQualitySummary>,
    ) -> Result<Vec<String>> {
        std::fs::create_dir_all(dir)?;
        let file = ReportFile {
            meta: self.metadata(),
            report: report.clone(),
            text_quality,
        }
        .rounded();
        let json_path = dir.join("report.json");
        std::fs::write(&json_path, serde_json::to_string_pretty(&file)?)?;
        let csv_path = dir.join("report.csv");
        std::fs::write(
            &csv_path,
            format!("{CSV_HEADER}\n{}\n", csv_row(condition, &file.report)),
        )?;
        Ok(vec![
            json_path.display().to_string(),
            csv_path.display().to_string(),
        ])
    }
}

/// Run `f` over the items with a bounded worker pool, folding results back
/// in item order so output never depends on scheduling.
pub fn parallel_map<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync,
{
    let workers = workers.max(1).min(items.len().max(1));
    if workers == 1 {
        return items.iter().enumerate().map(|(i, t)| f(i, t)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = items.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let result = f(i, &items[i]);
                *slots[i].lock().expect("result slot") = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.into_inner().expect("slot lock").expect("slot filled"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_map_preserves_order() {
        let items: Vec<usize> = (0..100).collect();
        let doubled = parallel_map(&items, 8, |_, x| x * 2);
        assert_eq!(doubled, items.iter().map(|x| x * 2).collect::<Vec<_>>());
        let sequential = parallel_map(&items, 1, |_, x| x * 2);
        assert_eq!(doubled, sequential);
    }
}
