//! Local triple store with name/type indexes, one-hop neighborhood queries,
//! flattening for prompts, and the knowledge-removal / graph-corruption
//! transforms used by the ablation harnesses.
//!
//! The store is immutable once loaded; every transform returns new values, so
//! any number of workers may read it concurrently.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeTuple;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::rng::{sample_prefix, SplitMix64};

/// WikiData-style opaque entity identifier, e.g. `Q212657`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(String);

impl EntityId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into().trim().to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for EntityId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

/// A node of the graph: identifier, display name, and type label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub id: EntityId,
    pub name: String,
    pub entity_type: String,
}

/// (subject id, relation label, object value) — the atomic unit of both
/// citations and ground-truth knowledge. All three parts are whitespace-trimmed
/// on construction and equality is exact string equality, matching the
/// exact-match scoring regime; there is no fuzzy matching anywhere in the
/// store.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KnowledgeTriple {
    pub subject: EntityId,
    pub relation: String,
    pub object: String,
}

impl KnowledgeTriple {
    pub fn new(
        subject: impl Into<EntityId>,
        relation: impl Into<String>,
        object: impl Into<String>,
    ) -> Self {
        Self {
            subject: subject.into(),
            relation: relation.into().trim().to_string(),
            object: object.into().trim().to_string(),
        }
    }

    pub fn is_complete(&self) -> bool {
        !self.subject.is_empty() && !self.relation.is_empty() && !self.object.is_empty()
    }
}

impl fmt::Display for KnowledgeTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}: {}]", self.subject, self.relation, self.object)
    }
}

// Triples serialize as ["Q85907", "occupation", "biologist"], the dataset
// wire format.
impl Serialize for KnowledgeTriple {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut tup = serializer.serialize_tuple(3)?;
        tup.serialize_element(self.subject.as_str())?;
        tup.serialize_element(&self.relation)?;
        tup.serialize_element(&self.object)?;
        tup.end()
    }
}

impl<'de> Deserialize<'de> for KnowledgeTriple {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct TripleVisitor;

        impl<'de> Visitor<'de> for TripleVisitor {
            type Value = KnowledgeTriple;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a [subject, relation, object] triple")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Self::Value, A::Error> {
                let subject: String = seq
                    .next_element()?
                    .ok_or_else(|| serde::de::Error::invalid_length(0, &self))?;
                let relation: String = seq
                    .next_element()?
                    .ok_or_else(|| serde::de::Error::invalid_length(1, &self))?;
                let object: String = seq
                    .next_element()?
                    .ok_or_else(|| serde::de::Error::invalid_length(2, &self))?;
                if seq.next_element::<String>()?.is_some() {
                    return Err(serde::de::Error::invalid_length(4, &self));
                }
                Ok(KnowledgeTriple::new(subject.as_str(), relation, object))
            }
        }

        deserializer.deserialize_seq(TripleVisitor)
    }
}

/// One-hop, entity-centered subgraph: a center entity plus its outgoing
/// triples. Every triple's subject equals the center id and duplicates are
/// collapsed, both enforced at construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubGraph {
    center: Entity,
    triples: BTreeSet<KnowledgeTriple>,
}

impl SubGraph {
    pub fn new(
        center: Entity,
        triples: impl IntoIterator<Item = KnowledgeTriple>,
    ) -> Result<Self, StoreError> {
        let mut set = BTreeSet::new();
        for t in triples {
            if t.subject != center.id {
                return Err(StoreError::SubjectMismatch {
                    subject: t.subject,
                    center: center.id,
                });
            }
            set.insert(t);
        }
        Ok(Self {
            center,
            triples: set,
        })
    }

    pub fn center(&self) -> &Entity {
        &self.center
    }

    pub fn triples(&self) -> &BTreeSet<KnowledgeTriple> {
        &self.triples
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn contains(&self, triple: &KnowledgeTriple) -> bool {
        self.triples.contains(triple)
    }

    /// Remove `victims` from the graph, returning the reduced graph together
    /// with the removed set (the absent-knowledge ground truth for the
    /// knowledge-removal harness). Errors if any victim is not present.
    pub fn remove_knowledge(
        &self,
        victims: &BTreeSet<KnowledgeTriple>,
    ) -> Result<(SubGraph, BTreeSet<KnowledgeTriple>), StoreError> {
        for v in victims {
            if !self.triples.contains(v) {
                return Err(StoreError::MissingVictim(v.clone()));
            }
        }
        let remaining: BTreeSet<_> = self.triples.difference(victims).cloned().collect();
        Ok((
            SubGraph {
                center: self.center.clone(),
                triples: remaining,
            },
            victims.clone(),
        ))
    }
}

/// Dump record: one subject-centered triple per line, with enough context to
/// rebuild the entity table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StoreRecord {
    pub subject_id: String,
    pub subject_name: String,
    pub subject_type: String,
    pub relation: String,
    pub object: String,
}

impl StoreRecord {
    pub fn new(
        subject_id: &str,
        subject_name: &str,
        subject_type: &str,
        relation: &str,
        object: &str,
    ) -> Self {
        Self {
            subject_id: subject_id.to_string(),
            subject_name: subject_name.to_string(),
            subject_type: subject_type.to_string(),
            relation: relation.to_string(),
            object: object.to_string(),
        }
    }
}

/// Dump formats accepted by [`KnowledgeStore::load`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoreFormat {
    /// One JSON object per line with the [`StoreRecord`] keys.
    Jsonl,
    /// Five tab-separated columns in [`StoreRecord`] order, no header.
    Tsv,
}

impl StoreFormat {
    /// Pick a format from a file extension, defaulting to JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("tsv") | Some("tab") => StoreFormat::Tsv,
            _ => StoreFormat::Jsonl,
        }
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("conflicting {field} for {id}: {existing:?} vs {incoming:?}")]
    EntityConflict {
        id: EntityId,
        field: &'static str,
        existing: String,
        incoming: String,
    },
    #[error("unknown entity {0}")]
    UnknownEntity(EntityId),
    #[error("triple subject {subject} does not match center {center}")]
    SubjectMismatch { subject: EntityId, center: EntityId },
    #[error("knowledge to remove is not in the graph: {0}")]
    MissingVictim(KnowledgeTriple),
    #[error("corruption fraction {0} is outside [0, 1]")]
    FractionOutOfRange(f64),
    #[error("corruption with a positive fraction requires a non-empty decoy pool")]
    NoDecoys,
    #[error("no decoy with a center distinct from {0} is available")]
    DecoyCollision(EntityId),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// In-memory triple store: entity table, per-entity adjacency, and a
/// normalized-name index. `BTreeMap`s keep every iteration order
/// deterministic.
#[derive(Debug, Default, Clone)]
pub struct KnowledgeStore {
    entities: BTreeMap<EntityId, Entity>,
    adjacency: BTreeMap<EntityId, BTreeSet<KnowledgeTriple>>,
    name_index: BTreeMap<String, BTreeSet<EntityId>>,
    type_vocabulary: BTreeSet<String>,
}

/// Index normalization: case-fold and collapse internal whitespace. No
/// transliteration.
pub fn normalize_name(name: &str) -> String {
    name.split_whitespace()
        .map(|w| w.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ")
}

impl KnowledgeStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Load a dump file. Duplicate records are collapsed; malformed records
    /// and entities whose name or type changes between records are errors.
    pub fn load(path: &Path, format: StoreFormat) -> Result<Self, StoreError> {
        let file = File::open(path)?;
        Self::from_reader(BufReader::new(file), format)
    }

    pub fn from_reader(reader: impl BufRead, format: StoreFormat) -> Result<Self, StoreError> {
        let mut store = Self::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let record = match format {
                StoreFormat::Jsonl => {
                    serde_json::from_str::<StoreRecord>(&line).map_err(|e| StoreError::Parse {
                        line: lineno,
                        message: e.to_string(),
                    })?
                }
                StoreFormat::Tsv => {
                    let fields: Vec<&str> = line.split('\t').collect();
                    if fields.len() != 5 {
                        return Err(StoreError::Parse {
                            line: lineno,
                            message: format!("expected 5 tab-separated fields, got {}", fields.len()),
                        });
                    }
                    StoreRecord::new(fields[0], fields[1], fields[2], fields[3], fields[4])
                }
            };
            store.insert_record(record).map_err(|e| match e {
                StoreError::Parse { message, .. } => StoreError::Parse {
                    line: lineno,
                    message,
                },
                other => other,
            })?;
        }
        Ok(store)
    }

    /// Insert one dump record, registering the subject entity and its triple.
    pub fn insert_record(&mut self, record: StoreRecord) -> Result<(), StoreError> {
        let subject = Entity {
            id: EntityId::new(record.subject_id),
            name: record.subject_name.trim().to_string(),
            entity_type: record.subject_type.trim().to_string(),
        };
        let triple = KnowledgeTriple::new(
            subject.id.clone(),
            record.relation,
            record.object,
        );
        if subject.id.is_empty() || subject.name.is_empty() || subject.entity_type.is_empty() {
            return Err(StoreError::Parse {
                line: 0,
                message: "subject id, name, and type must be non-empty".to_string(),
            });
        }
        if !triple.is_complete() {
            return Err(StoreError::Parse {
                line: 0,
                message: "relation and object must be non-empty".to_string(),
            });
        }
        self.insert_entity(subject)?;
        self.insert_triple(triple)
    }

    /// Register an entity (without any triples). Conflicting names or types
    /// for an already-known id are errors.
    pub fn insert_entity(&mut self, entity: Entity) -> Result<(), StoreError> {
        if let Some(existing) = self.entities.get(&entity.id) {
            if existing.name != entity.name {
                return Err(StoreError::EntityConflict {
                    id: entity.id,
                    field: "name",
                    existing: existing.name.clone(),
                    incoming: entity.name,
                });
            }
            if existing.entity_type != entity.entity_type {
                return Err(StoreError::EntityConflict {
                    id: entity.id,
                    field: "entity type",
                    existing: existing.entity_type.clone(),
                    incoming: entity.entity_type,
                });
            }
            return Ok(());
        }
        self.name_index
            .entry(normalize_name(&entity.name))
            .or_default()
            .insert(entity.id.clone());
        self.type_vocabulary.insert(entity.entity_type.clone());
        self.adjacency.entry(entity.id.clone()).or_default();
        self.entities.insert(entity.id.clone(), entity);
        Ok(())
    }

    /// Attach a triple to its (already registered) subject.
    pub fn insert_triple(&mut self, triple: KnowledgeTriple) -> Result<(), StoreError> {
        if !self.entities.contains_key(&triple.subject) {
            return Err(StoreError::UnknownEntity(triple.subject));
        }
        self.adjacency
            .entry(triple.subject.clone())
            .or_default()
            .insert(triple);
        Ok(())
    }

    pub fn entity(&self, id: &EntityId) -> Option<&Entity> {
        self.entities.get(id)
    }

    pub fn contains(&self, id: &EntityId) -> bool {
        self.entities.contains_key(id)
    }

    pub fn entities(&self) -> impl Iterator<Item = &Entity> {
        self.entities.values()
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn triple_count(&self) -> usize {
        self.adjacency.values().map(BTreeSet::len).sum()
    }

    pub fn type_vocabulary(&self) -> &BTreeSet<String> {
        &self.type_vocabulary
    }

    /// Normalized-name index entries, for gazetteer-style scans.
    pub fn names(&self) -> impl Iterator<Item = (&str, &BTreeSet<EntityId>)> {
        self.name_index.iter().map(|(n, ids)| (n.as_str(), ids))
    }

    /// All ids whose normalized name equals the normalized query, optionally
    /// restricted to one entity type. Sorted lexicographically by id; empty on
    /// no match.
    pub fn find_nodes_by_name(&self, name: &str, type_filter: Option<&str>) -> Vec<EntityId> {
        let Some(ids) = self.name_index.get(&normalize_name(name)) else {
            return Vec::new();
        };
        ids.iter()
            .filter(|id| match type_filter {
                Some(t) => self
                    .entities
                    .get(id)
                    .is_some_and(|e| e.entity_type == t),
                None => true,
            })
            .cloned()
            .collect()
    }

    /// One-hop subgraph centered on `id`. Errors on an unknown entity.
    pub fn neighborhood(&self, id: &EntityId) -> Result<SubGraph, StoreError> {
        let center = self
            .entities
            .get(id)
            .ok_or_else(|| StoreError::UnknownEntity(id.clone()))?;
        let triples = self.adjacency.get(id).cloned().unwrap_or_default();
        Ok(SubGraph {
            center: center.clone(),
            triples,
        })
    }

    /// Display value for a triple object: the entity name when the object is
    /// a stored id, otherwise the object verbatim.
    pub fn resolve_object<'a>(&'a self, object: &'a str) -> &'a str {
        match self.entities.get(&EntityId::new(object)) {
            Some(e) => &e.name,
            None => object,
        }
    }

    /// Render each triple as `<center name> - <relation> - <object>`, with
    /// object ids replaced by names when resolvable. Order follows the triple
    /// set (relation, then object).
    pub fn flatten(&self, graph: &SubGraph) -> Vec<String> {
        graph
            .triples
            .iter()
            .map(|t| {
                format!(
                    "{} - {} - {}",
                    graph.center.name,
                    t.relation,
                    self.resolve_object(&t.object)
                )
            })
            .collect()
    }
}

/// Round-half-up of `fraction * n`, the number of graphs a corruption pass
/// replaces.
pub fn corruption_count(fraction: f64, n: usize) -> usize {
    (fraction * n as f64 + 0.5).floor() as usize
}

/// Replace a seeded uniform draw of `round(fraction * n)` positions with
/// decoy graphs. The positions drawn for a smaller fraction are a prefix of
/// those drawn for a larger one under the same seed, and each position maps to
/// a stable decoy, so corruption severity is monotone per seed. The decoy
/// assigned to a position always has a center different from the graph it
/// replaces.
pub fn corrupt_retrieval(
    graphs: &[SubGraph],
    fraction: f64,
    decoys: &[SubGraph],
    seed: u64,
) -> Result<Vec<SubGraph>, StoreError> {
    if !(0.0..=1.0).contains(&fraction) || fraction.is_nan() {
        return Err(StoreError::FractionOutOfRange(fraction));
    }
    let k = corruption_count(fraction, graphs.len());
    if k == 0 {
        return Ok(graphs.to_vec());
    }
    if decoys.is_empty() {
        return Err(StoreError::NoDecoys);
    }
    let mut out = graphs.to_vec();
    for pos in sample_prefix(graphs.len(), k, seed) {
        // Per-position stream so the same position gets the same decoy for
        // every fraction sharing this seed.
        let mut pick = SplitMix64::new(seed ^ 0x9e37_79b9_7f4a_7c15 ^ pos as u64);
        let start = pick.next_below(decoys.len() as u64) as usize;
        let decoy = (0..decoys.len())
            .map(|step| &decoys[(start + step) % decoys.len()])
            .find(|d| d.center.id != graphs[pos].center.id)
            .ok_or_else(|| StoreError::DecoyCollision(graphs[pos].center.id.clone()))?;
        out[pos] = decoy.clone();
    }
    Ok(out)
}
