//! Dataset construction: person-pair filters, name disambiguation against the
//! store, and evolutionary question generation driven by a weighted
//! specificity + coherence knowledge-selection score.
//!
//! Each entry starts from a human-written seed paragraph about two people.
//! Round 1 annotates the seed with pool knowledge; each later round selects
//! one more piece of knowledge — scoring every unused candidate by
//! `alpha * ln(2N / Count_r) + (1 - alpha) * softmax(1 / perplexity)` — and
//! asks a generator to extend the paragraph with one sentence carrying it.
//! All injected knowledge forms the entry's minimum knowledge set, and the
//! final paragraph becomes the answer the two questions (general and
//! specific) are asked about.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::citation::{parse_answer, strip_citations};
use crate::judges::prompts::{knowledge_entry, relation_classes_tsv};
use crate::judges::JudgeError;
use crate::metrics::MinKnowledgeSet;
use crate::store::{normalize_name, EntityId, KnowledgeStore, KnowledgeTriple, SubGraph};

#[derive(Debug, Error)]
pub enum QuestionGenError {
    #[error("relation {0:?} does not occur in the statistics")]
    UnknownRelation(String),
    #[error("invalid relation statistics: {0}")]
    InvalidStats(String),
    #[error("perplexity must be positive, got {0}")]
    NonPositivePerplexity(f64),
    #[error("no candidate knowledge to select from")]
    NoCandidates,
    #[error("alpha {0} is outside [0, 1]")]
    InvalidAlpha(f64),
    #[error("rounds must be >= 1")]
    InvalidRounds,
    #[error("the knowledge pool is empty")]
    EmptyPool,
    #[error("evolution produced an empty minimum knowledge set")]
    EmptyMinSet,
    #[error(transparent)]
    Judge(#[from] JudgeError),
}

/// The per-entry knowledge inventory: one subgraph per selected person plus
/// the set of triples already spent.
#[derive(Debug, Clone)]
pub struct KnowledgePool {
    subgraphs: Vec<SubGraph>,
    used: BTreeSet<KnowledgeTriple>,
}

impl KnowledgePool {
    pub fn new(subgraphs: Vec<SubGraph>) -> Self {
        Self {
            subgraphs,
            used: BTreeSet::new(),
        }
    }

    pub fn subgraphs(&self) -> &[SubGraph] {
        &self.subgraphs
    }

    pub fn people(&self) -> Vec<EntityId> {
        self.subgraphs.iter().map(|g| g.center().id.clone()).collect()
    }

    pub fn contains(&self, triple: &KnowledgeTriple) -> bool {
        self.subgraphs.iter().any(|g| g.contains(triple))
    }

    pub fn name_of(&self, id: &EntityId) -> Option<&str> {
        self.subgraphs
            .iter()
            .find(|g| &g.center().id == id)
            .map(|g| g.center().name.as_str())
    }

    pub fn used(&self) -> &BTreeSet<KnowledgeTriple> {
        &self.used
    }

    /// All triples not yet spent, in deterministic set order.
    pub fn unused(&self) -> Vec<KnowledgeTriple> {
        let mut all: BTreeSet<KnowledgeTriple> = BTreeSet::new();
        for g in &self.subgraphs {
            all.extend(g.triples().iter().cloned());
        }
        all.difference(&self.used).cloned().collect()
    }

    /// Mark a pool triple as spent. Returns false for triples outside the
    /// pool, which keeps `used ⊆ pool` by construction.
    pub fn mark_used(&mut self, triple: &KnowledgeTriple) -> bool {
        if self.contains(triple) {
            self.used.insert(triple.clone());
            true
        } else {
            false
        }
    }
}

/// Relation occurrence counts over a dataset of size N.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelationStats {
    counts: BTreeMap<String, u64>,
    total: u64,
}

impl RelationStats {
    pub fn new(counts: BTreeMap<String, u64>, total: u64) -> Result<Self, QuestionGenError> {
        if total == 0 {
            return Err(QuestionGenError::InvalidStats("dataset size is zero".into()));
        }
        if counts.values().any(|&c| c == 0) {
            return Err(QuestionGenError::InvalidStats(
                "relations present must have count >= 1".into(),
            ));
        }
        Ok(Self { counts, total })
    }

    /// Count relation occurrences over minimum knowledge sets; N is the
    /// number of sets.
    pub fn from_min_sets<'a>(
        sets: impl IntoIterator<Item = &'a MinKnowledgeSet>,
    ) -> Result<Self, QuestionGenError> {
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        let mut total = 0u64;
        for set in sets {
            total += 1;
            for t in set.iter() {
                *counts.entry(t.relation.clone()).or_default() += 1;
            }
        }
        Self::new(counts, total)
    }

    pub fn count(&self, relation: &str) -> Option<u64> {
        self.counts.get(relation).copied()
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

/// IDF-style penalty on frequent relations: `ln(2N / Count_r)`, natural log.
pub fn specificity(relation: &str, stats: &RelationStats) -> Result<f64, QuestionGenError> {
    let count = stats
        .count(relation)
        .ok_or_else(|| QuestionGenError::UnknownRelation(relation.to_string()))?;
    Ok(((2 * stats.total()) as f64 / count as f64).ln())
}

/// Perplexity oracle for the coherence term. Implemented by the shipped
/// lexical heuristic, scripted mocks, and plain closures.
pub trait Perplexity: Sync {
    fn perplexity(&self, text: &str) -> Result<f64, JudgeError>;
}

impl<F: Fn(&str) -> f64 + Sync> Perplexity for F {
    fn perplexity(&self, text: &str) -> Result<f64, JudgeError> {
        Ok(self(text))
    }
}

/// How inverse perplexities are normalized into coherence scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoherenceNorm {
    /// Softmax over the inverse perplexities, as the selection formula writes.
    #[default]
    Softmax,
    /// Plain sum normalization, the alternative reading of "normalized
    /// inverse perplexity".
    Sum,
}

/// Normalize inverse perplexities into scores that sum to 1.
pub fn coherence_from_perplexities(
    perplexities: &[f64],
    norm: CoherenceNorm,
) -> Result<Vec<f64>, QuestionGenError> {
    if perplexities.is_empty() {
        return Err(QuestionGenError::NoCandidates);
    }
    for &p in perplexities {
        if !(p > 0.0) {
            return Err(QuestionGenError::NonPositivePerplexity(p));
        }
    }
    let inverses: Vec<f64> = perplexities.iter().map(|p| 1.0 / p).collect();
    match norm {
        CoherenceNorm::Softmax => {
            let max = inverses.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = inverses.iter().map(|x| (x - max).exp()).collect();
            let sum: f64 = exps.iter().sum();
            Ok(exps.into_iter().map(|e| e / sum).collect())
        }
        CoherenceNorm::Sum => {
            let sum: f64 = inverses.iter().sum();
            Ok(inverses.into_iter().map(|x| x / sum).collect())
        }
    }
}

/// Coherence scores for candidate triples against the current paragraph:
/// each candidate is templated into a sentence, appended to the paragraph,
/// and scored by normalized inverse perplexity.
pub fn coherence_scores(
    candidates: &[KnowledgeTriple],
    paragraph: &str,
    pool: &KnowledgePool,
    classes: &RelationClasses,
    perplexity: &dyn Perplexity,
    norm: CoherenceNorm,
) -> Result<Vec<f64>, QuestionGenError> {
    let mut perps = Vec::with_capacity(candidates.len());
    for c in candidates {
        let sentence = candidate_sentence(c, pool, classes);
        let extended = format!("{paragraph} {sentence}.");
        perps.push(perplexity.perplexity(&extended)?);
    }
    coherence_from_perplexities(&perps, norm)
}

fn candidate_sentence(
    triple: &KnowledgeTriple,
    pool: &KnowledgePool,
    classes: &RelationClasses,
) -> String {
    let subject = pool
        .name_of(&triple.subject)
        .unwrap_or(triple.subject.as_str());
    templatize(subject, &triple.relation, &triple.object, classes)
}

/// Sentence template class of a relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationClass {
    NounPhrase,
    VerbPhrase,
    Membership,
}

/// Relation → template-class lookup, shipped as a TSV asset; relations not
/// listed default to the noun-phrase template.
#[derive(Debug, Clone, Default)]
pub struct RelationClasses {
    map: BTreeMap<String, RelationClass>,
}

impl RelationClasses {
    pub fn parse_tsv(text: &str) -> Self {
        let mut map = BTreeMap::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let Some((relation, class)) = line.split_once('\t') else {
                continue;
            };
            let class = match class.trim() {
                "verb" => RelationClass::VerbPhrase,
                "membership" => RelationClass::Membership,
                _ => RelationClass::NounPhrase,
            };
            map.insert(relation.trim().to_string(), class);
        }
        Self { map }
    }

    /// The lookup built from the shipped asset.
    pub fn shipped() -> &'static RelationClasses {
        static SHIPPED: OnceLock<RelationClasses> = OnceLock::new();
        SHIPPED.get_or_init(|| RelationClasses::parse_tsv(relation_classes_tsv()))
    }

    pub fn class_of(&self, relation: &str) -> RelationClass {
        self.map
            .get(relation)
            .copied()
            .unwrap_or(RelationClass::NounPhrase)
    }
}

/// Render a triple as a simple sentence, by relation class: noun-phrase
/// relations give "<subject>'s <relation> is <object>", verb-phrase
/// "<subject> <relation> <object>", membership "<subject> is a <relation> of
/// <object>" (any trailing " of" on the relation label folds into the
/// template).
pub fn templatize(
    subject_name: &str,
    relation: &str,
    object: &str,
    classes: &RelationClasses,
) -> String {
    match classes.class_of(relation) {
        RelationClass::NounPhrase => format!("{subject_name}'s {relation} is {object}"),
        RelationClass::VerbPhrase => format!("{subject_name} {relation} {object}"),
        RelationClass::Membership => {
            let base = relation.strip_suffix(" of").unwrap_or(relation);
            format!("{subject_name} is a {base} of {object}")
        }
    }
}

/// The evolving paragraph plus everything needed to pick the next knowledge.
#[derive(Debug, Clone)]
pub struct EvolutionState {
    /// Annotated paragraph (citation brackets included).
    pub paragraph: String,
    pub pool: KnowledgePool,
    /// 1-based round about to run.
    pub round: u32,
    /// Weight of specificity against coherence, in [0, 1].
    pub alpha: f64,
}

/// Knowledge-selection knobs. The selection formula adds an unbounded
/// specificity term to a [0, 1] coherence term; `normalize_specificity`
/// rescales specificity by its maximum `ln(2N)` so both terms share a scale.
/// Off by default: the formula is used as written.
#[derive(Debug, Clone, Copy, Default)]
pub struct SelectionOptions {
    pub norm: CoherenceNorm,
    pub normalize_specificity: bool,
}

/// Pick the unused pool triple maximizing
/// `alpha * specificity + (1 - alpha) * coherence`. Relations absent from the
/// statistics count as Count_r = 1 (maximally specific). Ties break on
/// (relation, object) lexicographically. At `alpha = 1` the perplexity oracle
/// is never consulted.
pub fn select_knowledge(
    state: &EvolutionState,
    stats: &RelationStats,
    classes: &RelationClasses,
    perplexity: &dyn Perplexity,
    norm: CoherenceNorm,
) -> Result<KnowledgeTriple, QuestionGenError> {
    select_knowledge_with(
        state,
        stats,
        classes,
        perplexity,
        SelectionOptions {
            norm,
            ..SelectionOptions::default()
        },
    )
}

pub fn select_knowledge_with(
    state: &EvolutionState,
    stats: &RelationStats,
    classes: &RelationClasses,
    perplexity: &dyn Perplexity,
    options: SelectionOptions,
) -> Result<KnowledgeTriple, QuestionGenError> {
    let norm = options.norm;
    if !(0.0..=1.0).contains(&state.alpha) {
        return Err(QuestionGenError::InvalidAlpha(state.alpha));
    }
    let candidates = state.pool.unused();
    if candidates.is_empty() {
        return Err(QuestionGenError::NoCandidates);
    }
    let scale = if options.normalize_specificity {
        ((2 * stats.total()) as f64).ln().max(f64::MIN_POSITIVE)
    } else {
        1.0
    };
    let spec_scores: Vec<f64> = candidates
        .iter()
        .map(|c| {
            let count = stats.count(&c.relation).unwrap_or(1);
            ((2 * stats.total()) as f64 / count as f64).ln() / scale
        })
        .collect();
    let coh_scores = if state.alpha == 1.0 {
        vec![0.0; candidates.len()]
    } else {
        let plain = strip_citations(&state.paragraph);
        coherence_scores(&candidates, &plain, &state.pool, classes, perplexity, norm)?
    };
    let mut best = 0usize;
    let mut best_score = f64::NEG_INFINITY;
    for (i, candidate) in candidates.iter().enumerate() {
        let score = state.alpha * spec_scores[i] + (1.0 - state.alpha) * coh_scores[i];
        let better = score > best_score
            || (score == best_score
                && (candidate.relation.as_str(), candidate.object.as_str())
                    < (
                        candidates[best].relation.as_str(),
                        candidates[best].object.as_str(),
                    ));
        if better {
            best = i;
            best_score = score;
        }
    }
    Ok(candidates[best].clone())
}

/// One generated benchmark entry: two questions over the same people and the
/// smallest set of knowledge required to answer them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub general_question: String,
    pub specific_question: String,
    #[serde(rename = "minimum_knowledge_set")]
    pub min_set: MinKnowledgeSet,
    pub people: Vec<EntityId>,
}

/// Paragraph-extension role of the evolution loop (round-1 annotation and
/// the one-sentence extensions of later rounds).
pub trait ParagraphGenerator: Sync {
    fn annotate(&self, paragraph: &str, knowledge: &[String]) -> Result<String, JudgeError>;
    fn extend(&self, paragraph: &str, knowledge: &str) -> Result<String, JudgeError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuestionStyle {
    General,
    Specific,
}

/// Question-asking role: one question whose answer is the given paragraph.
pub trait QuestionMaker: Sync {
    fn make_question(&self, paragraph: &str, style: QuestionStyle) -> Result<String, JudgeError>;
}

/// Per-round record of an evolution run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundTrace {
    pub round: u32,
    /// Round 1: every annotated triple. Later rounds: the injected triple.
    pub knowledge: Vec<KnowledgeTriple>,
    pub paragraph: String,
}

/// Full trace of one entry's evolution, persisted alongside the dataset.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvolutionTrace {
    pub rounds: Vec<RoundTrace>,
    pub general_question: Option<String>,
    pub specific_question: Option<String>,
}

#[derive(Debug)]
pub struct EvolveOutcome {
    pub entry: DatasetEntry,
    pub trace: EvolutionTrace,
}

/// Evolution failure carrying the partial trace accumulated before the
/// error, so interrupted entries stay inspectable.
#[derive(Debug, Error)]
#[error("evolution aborted after {} round(s): {error}", partial.rounds.len())]
pub struct EvolveFailure {
    pub error: QuestionGenError,
    pub partial: EvolutionTrace,
}

/// Knobs of the evolution loop.
#[derive(Debug, Clone)]
pub struct EvolveParams {
    pub rounds: u32,
    pub alpha: f64,
    pub norm: CoherenceNorm,
    /// Rescale specificity into [0, 1]; see [`SelectionOptions`].
    pub normalize_specificity: bool,
}

impl Default for EvolveParams {
    fn default() -> Self {
        Self {
            rounds: 5,
            alpha: 0.5,
            norm: CoherenceNorm::Softmax,
            normalize_specificity: false,
        }
    }
}

/// Single-knowledge brace entry for the extension prompt.
pub fn single_knowledge_entry(triple: &KnowledgeTriple, pool: &KnowledgePool) -> String {
    let name = pool
        .name_of(&triple.subject)
        .unwrap_or(triple.subject.as_str());
    format!(
        "{{qid: {}, name: {}, {}: {}}}",
        triple.subject, name, triple.relation, triple.object
    )
}

/// Run the evolution loop: annotate the seed, inject one selected knowledge
/// per later round, and ask the two final questions. A pool that runs out of
/// unused knowledge simply stops injecting early.
pub fn evolve(
    seed_paragraph: &str,
    pool: KnowledgePool,
    stats: &RelationStats,
    generator: &dyn ParagraphGenerator,
    question_maker: &dyn QuestionMaker,
    perplexity: &dyn Perplexity,
    params: &EvolveParams,
) -> Result<EvolveOutcome, EvolveFailure> {
    let mut trace = EvolutionTrace::default();
    match evolve_inner(
        seed_paragraph,
        pool,
        stats,
        generator,
        question_maker,
        perplexity,
        params,
        &mut trace,
    ) {
        Ok(entry) => Ok(EvolveOutcome { entry, trace }),
        Err(error) => Err(EvolveFailure {
            error,
            partial: trace,
        }),
    }
}

#[allow(clippy::too_many_arguments)]
fn evolve_inner(
    seed_paragraph: &str,
    mut pool: KnowledgePool,
    stats: &RelationStats,
    generator: &dyn ParagraphGenerator,
    question_maker: &dyn QuestionMaker,
    perplexity: &dyn Perplexity,
    params: &EvolveParams,
    trace: &mut EvolutionTrace,
) -> Result<DatasetEntry, QuestionGenError> {
    if params.rounds == 0 {
        return Err(QuestionGenError::InvalidRounds);
    }
    if !(0.0..=1.0).contains(&params.alpha) {
        return Err(QuestionGenError::InvalidAlpha(params.alpha));
    }
    if pool.subgraphs().is_empty() {
        return Err(QuestionGenError::EmptyPool);
    }
    let classes = RelationClasses::shipped();

    // Round 1: annotate the seed with pool knowledge.
    let entries: Vec<String> = pool.subgraphs().iter().map(knowledge_entry).collect();
    let annotated = generator.annotate(seed_paragraph, &entries)?;
    let mut min_set: BTreeSet<KnowledgeTriple> = parse_answer(&annotated)
        .triple_citations()
        .filter(|t| pool.contains(t))
        .cloned()
        .collect();
    for t in &min_set {
        pool.mark_used(t);
    }
    trace.rounds.push(RoundTrace {
        round: 1,
        knowledge: min_set.iter().cloned().collect(),
        paragraph: annotated.clone(),
    });

    // Rounds 2..: select one knowledge, extend by one sentence.
    let mut paragraph = annotated;
    for round in 2..=params.rounds {
        let state = EvolutionState {
            paragraph: paragraph.clone(),
            pool: pool.clone(),
            round,
            alpha: params.alpha,
        };
        let options = SelectionOptions {
            norm: params.norm,
            normalize_specificity: params.normalize_specificity,
        };
        let selected = match select_knowledge_with(&state, stats, classes, perplexity, options) {
            Ok(t) => t,
            Err(QuestionGenError::NoCandidates) => break,
            Err(e) => return Err(e),
        };
        let entry = single_knowledge_entry(&selected, &pool);
        paragraph = generator.extend(&paragraph, &entry)?;
        pool.mark_used(&selected);
        min_set.insert(selected.clone());
        trace.rounds.push(RoundTrace {
            round,
            knowledge: vec![selected],
            paragraph: paragraph.clone(),
        });
    }

    let plain = strip_citations(&paragraph);
    let general = question_maker.make_question(&plain, QuestionStyle::General)?;
    trace.general_question = Some(general.clone());
    let specific = question_maker.make_question(&plain, QuestionStyle::Specific)?;
    trace.specific_question = Some(specific.clone());

    if min_set.is_empty() {
        return Err(QuestionGenError::EmptyMinSet);
    }
    Ok(DatasetEntry {
        id: None,
        general_question: general,
        specific_question: specific,
        min_set: MinKnowledgeSet::new(min_set),
        people: pool.people(),
    })
}

/// True when a person name is complete: at least two whitespace-separated
/// parts (a given name and a family name).
pub fn name_is_complete(name: &str) -> bool {
    name.split_whitespace().count() >= 2
}

/// Pair filter for ingestion records: both names must be complete.
pub fn filter_name_pair(name_a: &str, name_b: &str) -> bool {
    name_is_complete(name_a) && name_is_complete(name_b)
}

/// Resolve two names to entity ids: among all candidate pairs, pick the one
/// connected by a triple whose relation label matches (case-insensitively)
/// the given relation, in either direction. Ties break on the smallest id
/// pair; `None` when no connected pair exists.
pub fn disambiguate_pair(
    name_a: &str,
    name_b: &str,
    relation: &str,
    store: &KnowledgeStore,
) -> Option<(EntityId, EntityId)> {
    let candidates_a = store.find_nodes_by_name(name_a, None);
    let candidates_b = store.find_nodes_by_name(name_b, None);
    let relation_lower = relation.to_lowercase();
    for a in &candidates_a {
        for b in &candidates_b {
            if a == b {
                continue;
            }
            if connected(store, a, b, &relation_lower) || connected(store, b, a, &relation_lower) {
                return Some((a.clone(), b.clone()));
            }
        }
    }
    None
}

fn connected(store: &KnowledgeStore, from: &EntityId, to: &EntityId, relation_lower: &str) -> bool {
    let Ok(graph) = store.neighborhood(from) else {
        return false;
    };
    let Some(target) = store.entity(to) else {
        return false;
    };
    let target_name = normalize_name(&target.name);
    graph.triples().iter().any(|t| {
        t.relation.to_lowercase() == relation_lower
            && (t.object == to.as_str() || normalize_name(&t.object) == target_name)
    })
}
