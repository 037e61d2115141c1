//! Question → subgraph pipeline: extract entity mentions, look up candidate
//! nodes with a type filter, and disambiguate namesakes by exact-match
//! overlap between candidate neighborhoods and the question text.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::store::{EntityId, KnowledgeStore, SubGraph};

/// A named-entity mention found in a question. Offsets are character
/// positions and `surface` equals the question slice they delimit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMention {
    pub surface: String,
    pub mention_type: String,
    pub start: usize,
    pub end: usize,
}

impl EntityMention {
    /// Check the span invariants against the question the mention came from.
    pub fn is_valid_for(&self, question: &str) -> bool {
        if self.start >= self.end {
            return false;
        }
        let slice: String = question
            .chars()
            .skip(self.start)
            .take(self.end - self.start)
            .collect();
        slice == self.surface
    }
}

/// Where mentions come from.
#[derive(Debug, Clone)]
pub enum ExtractorMode {
    /// Scan the question for store names: maximal non-overlapping matches,
    /// longest match first, left to right.
    Gazetteer,
    /// Pre-computed mentions for this question, produced offline by any NER
    /// tool.
    External(Vec<EntityMention>),
}

/// Extraction settings, including the mention-type → entity-type map used to
/// filter candidates (e.g. NER "person" → store "human").
#[derive(Debug, Clone)]
pub struct ExtractorConfig {
    pub mode: ExtractorMode,
    pub type_map: BTreeMap<String, String>,
}

impl ExtractorConfig {
    /// Gazetteer extraction with the person → human mapping.
    pub fn gazetteer() -> Self {
        let mut type_map = BTreeMap::new();
        type_map.insert("person".to_string(), "human".to_string());
        Self {
            mode: ExtractorMode::Gazetteer,
            type_map,
        }
    }

    pub fn external(mentions: Vec<EntityMention>) -> Self {
        Self {
            mode: ExtractorMode::External(mentions),
            ..Self::gazetteer()
        }
    }

    fn mention_type_for(&self, entity_type: &str) -> String {
        self.type_map
            .iter()
            .find(|(_, v)| v.as_str() == entity_type)
            .map(|(k, _)| k.clone())
            .unwrap_or_else(|| entity_type.to_string())
    }

    fn entity_type_filter(&self, mention_type: &str) -> Option<&str> {
        self.type_map.get(mention_type).map(String::as_str)
    }
}

/// One disambiguated retrieval: the mention, the winning subgraph, and how it
/// won.
#[derive(Debug, Clone)]
pub struct RetrievalResult {
    pub mention: EntityMention,
    pub chosen: SubGraph,
    pub candidates_considered: usize,
    pub match_score: u32,
}

/// Per-question retrieval output with diagnostics.
#[derive(Debug, Clone, Default)]
pub struct RetrievalOutcome {
    pub results: Vec<RetrievalResult>,
    /// Mentions that had no candidate after type filtering.
    pub dropped_mentions: usize,
    /// External mentions that failed the span invariants.
    pub invalid_mentions: usize,
    /// Winners decided by the smallest-id tie-break rather than by score.
    pub tie_breaks: usize,
}

/// Word token with character offsets.
#[derive(Debug, Clone)]
struct Token {
    lower: String,
    start: usize,
    end: usize,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\'' || c == '-'
}

fn push_token(tokens: &mut Vec<Token>, mut lower: String, start: usize, mut end: usize) {
    // Possessives are not part of a name: "Crane's" matches "Crane".
    if lower.ends_with("'s") {
        lower.truncate(lower.len() - 2);
        end -= 2;
    } else if lower.ends_with('\'') {
        lower.truncate(lower.len() - 1);
        end -= 1;
    }
    if !lower.is_empty() {
        tokens.push(Token { lower, start, end });
    }
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut start = 0usize;
    let mut count = 0usize;
    for (pos, c) in text.chars().enumerate() {
        count = pos + 1;
        if is_word_char(c) {
            if current.is_empty() {
                start = pos;
            }
            current.extend(c.to_lowercase());
        } else if !current.is_empty() {
            push_token(&mut tokens, std::mem::take(&mut current), start, pos);
        }
    }
    if !current.is_empty() {
        push_token(&mut tokens, current, start, count);
    }
    tokens
}

fn token_seq(text: &str) -> Vec<String> {
    tokenize(text).into_iter().map(|t| t.lower).collect()
}

/// Extract entity mentions from a question. Gazetteer mode scans for store
/// names with a maximal-munch rule; external mode validates and passes
/// through pre-computed mentions.
pub fn extract_entities(
    question: &str,
    config: &ExtractorConfig,
    store: &KnowledgeStore,
) -> Vec<EntityMention> {
    match &config.mode {
        ExtractorMode::External(mentions) => mentions
            .iter()
            .filter(|m| m.is_valid_for(question))
            .cloned()
            .collect(),
        ExtractorMode::Gazetteer => gazetteer_mentions(question, config, store),
    }
}

fn gazetteer_mentions(
    question: &str,
    config: &ExtractorConfig,
    store: &KnowledgeStore,
) -> Vec<EntityMention> {
    // Name token sequences → ids, plus the longest sequence to bound the munch.
    let mut names: BTreeMap<Vec<String>, Vec<EntityId>> = BTreeMap::new();
    let mut longest = 0usize;
    for (normalized, ids) in store.names() {
        let seq: Vec<String> = normalized.split(' ').map(str::to_string).collect();
        longest = longest.max(seq.len());
        names.insert(seq, ids.iter().cloned().collect());
    }
    let question_chars: Vec<char> = question.chars().collect();
    let tokens = tokenize(question);
    let mut mentions = Vec::new();
    let mut i = 0usize;
    while i < tokens.len() {
        let mut matched = None;
        let max_len = longest.min(tokens.len() - i);
        for len in (1..=max_len).rev() {
            let seq: Vec<String> = tokens[i..i + len].iter().map(|t| t.lower.clone()).collect();
            if let Some(ids) = names.get(&seq) {
                matched = Some((len, ids));
                break;
            }
        }
        let Some((len, ids)) = matched else {
            i += 1;
            continue;
        };
        let start = tokens[i].start;
        let end = tokens[i + len - 1].end;
        let surface: String = question_chars[start..end].iter().collect();
        mentions.push(EntityMention {
            surface,
            mention_type: config.mention_type_for(&dominant_type(store, ids, config)),
            start,
            end,
        });
        i += len;
    }
    mentions
}

/// Entity type a mixed-type name resolves to: prefer types declared in the
/// type map, then the most frequent, then the lexicographically smallest.
fn dominant_type(store: &KnowledgeStore, ids: &[EntityId], config: &ExtractorConfig) -> String {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for id in ids {
        if let Some(e) = store.entity(id) {
            *counts.entry(e.entity_type.as_str()).or_default() += 1;
        }
    }
    counts
        .iter()
        .max_by_key(|(ty, n)| {
            let declared = config.type_map.values().any(|v| v == *ty);
            (declared, **n, std::cmp::Reverse(ty.to_string()))
        })
        .map(|(ty, _)| ty.to_string())
        .unwrap_or_default()
}

/// Exact-match score of a candidate subgraph against a question: the number
/// of its triples whose object value appears verbatim in the question
/// (case-insensitive, on word boundaries).
pub fn match_score(candidate: &SubGraph, question: &str) -> u32 {
    let question_tokens = token_seq(question);
    candidate
        .triples()
        .iter()
        .filter(|t| {
            let object_tokens = token_seq(&t.object);
            !object_tokens.is_empty() && contains_subsequence(&question_tokens, &object_tokens)
        })
        .count() as u32
}

fn contains_subsequence(haystack: &[String], needle: &[String]) -> bool {
    if needle.len() > haystack.len() {
        return false;
    }
    haystack.windows(needle.len()).any(|w| w == needle)
}

/// Pick the candidate with the highest number of matched neighboring values;
/// ties go to the lexicographically smallest center id. `None` only for an
/// empty candidate list. The returned tuple is (winner, score, decided by
/// tie-break).
pub fn rerank<'a>(candidates: &'a [SubGraph], question: &str) -> Option<(&'a SubGraph, u32, bool)> {
    let scored: Vec<(u32, &SubGraph)> = candidates
        .iter()
        .map(|c| (match_score(c, question), c))
        .collect();
    let best = scored.iter().map(|(s, _)| *s).max()?;
    let mut winners: Vec<&SubGraph> = scored
        .iter()
        .filter(|(s, _)| *s == best)
        .map(|(_, c)| *c)
        .collect();
    winners.sort_by(|a, b| a.center().id.cmp(&b.center().id));
    Some((winners[0], best, winners.len() > 1))
}

/// Full per-question pipeline: extract mentions, look up candidates under the
/// type filter, re-rank, and report diagnostics. Mentions with zero
/// candidates are dropped, not errors.
pub fn retrieve(
    store: &KnowledgeStore,
    question: &str,
    config: &ExtractorConfig,
) -> RetrievalOutcome {
    let mut outcome = RetrievalOutcome::default();
    if let ExtractorMode::External(mentions) = &config.mode {
        outcome.invalid_mentions = mentions
            .iter()
            .filter(|m| !m.is_valid_for(question))
            .count();
    }
    for mention in extract_entities(question, config, store) {
        let filter = config.entity_type_filter(&mention.mention_type);
        let ids = store.find_nodes_by_name(&mention.surface, filter);
        if ids.is_empty() {
            outcome.dropped_mentions += 1;
            continue;
        }
        let candidates: Vec<SubGraph> = ids
            .iter()
            .filter_map(|id| store.neighborhood(id).ok())
            .collect();
        let Some((winner, score, tied)) = rerank(&candidates, question) else {
            outcome.dropped_mentions += 1;
            continue;
        };
        if tied {
            outcome.tie_breaks += 1;
        }
        outcome.results.push(RetrievalResult {
            mention,
            chosen: winner.clone(),
            candidates_considered: candidates.len(),
            match_score: score,
        });
    }
    outcome
}
