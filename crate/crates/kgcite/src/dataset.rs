//! JSONL I/O for datasets, answers, pre-computed mentions, and construction
//! seeds.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::questiongen::DatasetEntry;
use crate::retrieval::EntityMention;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}: entry {id}: {message}")]
    Validation {
        path: String,
        id: String,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One generated answer, as persisted by the generate subcommand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerRecord {
    pub question_id: String,
    pub raw_text: String,
}

/// One pre-computed entity mention from an external NER tool.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionRecord {
    pub question_id: String,
    pub surface: String,
    pub mention_type: String,
    pub start: usize,
    pub end: usize,
}

impl MentionRecord {
    pub fn into_mention(self) -> EntityMention {
        EntityMention {
            surface: self.surface,
            mention_type: self.mention_type,
            start: self.start,
            end: self.end,
        }
    }
}

/// One ingestion record for dataset construction: a human-written paragraph
/// and the person pair it relates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub paragraph: String,
    pub name_a: String,
    pub name_b: String,
    pub relation: String,
}

/// Read a JSONL file of `T`, reporting the line number of the first bad
/// record.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, DataError> {
    let reader = BufReader::new(File::open(path)?);
    let mut items = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| DataError::Parse {
            path: path.display().to_string(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        items.push(item);
    }
    Ok(items)
}

/// Write items as one JSON object per line.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), DataError> {
    let mut writer = BufWriter::new(File::create(path)?);
    for item in items {
        let line = serde_json::to_string(item).map_err(|e| DataError::Parse {
            path: path.display().to_string(),
            line: 0,
            message: e.to_string(),
        })?;
        writeln!(writer, "{line}")?;
    }
    writer.flush()?;
    Ok(())
}

/// Derived question id for entries that carry none: 1-based line position.
pub fn derived_id(index: usize) -> String {
    format!("q{:04}", index + 1)
}

/// Load a dataset, assigning derived ids to entries without one and
/// validating the entry invariants.
pub fn read_dataset(path: &Path) -> Result<Vec<DatasetEntry>, DataError> {
    let mut entries: Vec<DatasetEntry> = read_jsonl(path)?;
    for (idx, entry) in entries.iter_mut().enumerate() {
        if entry.id.is_none() {
            entry.id = Some(derived_id(idx));
        }
        let id = entry.id.clone().unwrap_or_default();
        if entry.general_question.trim().is_empty() || entry.specific_question.trim().is_empty() {
            return Err(DataError::Validation {
                path: path.display().to_string(),
                id,
                message: "questions must be non-empty".to_string(),
            });
        }
        if entry.min_set.is_empty() {
            return Err(DataError::Validation {
                path: path.display().to_string(),
                id,
                message: "minimum knowledge set must be non-empty".to_string(),
            });
        }
        if entry.people.is_empty() {
            return Err(DataError::Validation {
                path: path.display().to_string(),
                id,
                message: "people must be non-empty".to_string(),
            });
        }
    }
    Ok(entries)
}

/// Group external mentions by question id.
pub fn mentions_by_question(records: Vec<MentionRecord>) -> BTreeMap<String, Vec<EntityMention>> {
    let mut map: BTreeMap<String, Vec<EntityMention>> = BTreeMap::new();
    for record in records {
        let id = record.question_id.clone();
        map.entry(id).or_default().push(record.into_mention());
    }
    map
}
