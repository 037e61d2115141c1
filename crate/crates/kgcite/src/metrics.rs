//! The reference-free scoring suite: citation correctness, citation
//! precision/recall/F1 against the minimum knowledge set (micro and macro),
//! entailment-based text-citation alignment, and [NA] precision/recall
//! against an absent-knowledge set.
//!
//! Scoring conventions, fixed here and mirrored by the brute-force oracle in
//! the acceptance suite:
//!
//! - A *scored citation* is a triple or malformed citation; `[NA]` markers
//!   are never citations and carry no weight.
//! - Correctness bit: 1 iff the citation is a complete triple present in the
//!   union of the retrieved subgraphs. Malformed citations score 0.
//! - Precision bit: 1 iff the citation is correct *and* its triple is in the
//!   minimum knowledge set. Computed over the same denominator as
//!   correctness, so micro precision can never exceed micro correctness.
//! - Recall bit, one per minimum-set triple: 1 iff some correct citation
//!   cites it.
//! - Alignment runs the entailment judge on every (sentence, triple citation)
//!   pair within a sentence, premise = sentence text, hypothesis =
//!   `relation: object`.
//! - [NA] precision, one bit per [NA]-marked sentence: the sentence entails
//!   at least one absent triple. [NA] recall, one bit per absent triple: some
//!   [NA]-marked sentence entails it.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::citation::{AttributedAnswer, Citation};
use crate::judges::{EntailmentJudge, JudgeError, RelevanceJudge};
use crate::store::{KnowledgeTriple, SubGraph};

/// The smallest set of knowledge required to answer a question; the gold
/// standard for citation precision and recall.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MinKnowledgeSet {
    triples: BTreeSet<KnowledgeTriple>,
}

impl MinKnowledgeSet {
    pub fn new(triples: impl IntoIterator<Item = KnowledgeTriple>) -> Self {
        Self {
            triples: triples.into_iter().collect(),
        }
    }

    pub fn triples(&self) -> &BTreeSet<KnowledgeTriple> {
        &self.triples
    }

    pub fn iter(&self) -> impl Iterator<Item = &KnowledgeTriple> {
        self.triples.iter()
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
}

impl FromIterator<KnowledgeTriple> for MinKnowledgeSet {
    fn from_iter<T: IntoIterator<Item = KnowledgeTriple>>(iter: T) -> Self {
        Self::new(iter)
    }
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("precision/recall need a non-empty minimum knowledge set")]
    EmptyMinSet,
    #[error("[NA] evaluation needs a non-empty absent knowledge set")]
    EmptyAbsentSet,
    #[error("aggregate needs at least one answer")]
    EmptyCorpus,
    #[error("{stage}: {source}")]
    Judge {
        /// Which pair the judge was asked about when it failed.
        stage: String,
        #[source]
        source: JudgeError,
    },
}

/// Hypothesis rendering for the NLI judge: the subject id is dropped.
pub fn hypothesis_text(triple: &KnowledgeTriple) -> String {
    format!("{}: {}", triple.relation, triple.object)
}

fn retrieved_union(retrieved: &[SubGraph]) -> BTreeSet<&KnowledgeTriple> {
    retrieved.iter().flat_map(|g| g.triples().iter()).collect()
}

/// Correctness bit per scored citation, in answer order.
pub fn citation_bits(answer: &AttributedAnswer, retrieved: &[SubGraph]) -> Vec<bool> {
    let union = retrieved_union(retrieved);
    answer
        .all_citations()
        .filter_map(|c| match c {
            Citation::Triple(t) => Some(t.is_complete() && union.contains(t)),
            Citation::Malformed(_) => Some(false),
            Citation::NotApplicable => None,
        })
        .collect()
}

/// Mean correctness over the scored citations; `None` when the answer has
/// none.
pub fn citation_correctness(answer: &AttributedAnswer, retrieved: &[SubGraph]) -> Option<f64> {
    let bits = citation_bits(answer, retrieved);
    mean_bits(&bits)
}

/// Per-citation precision bits and per-knowledge recall bits. Recall bits
/// follow the minimum set's iteration order.
pub fn citation_precision_recall(
    answer: &AttributedAnswer,
    min_set: &MinKnowledgeSet,
    retrieved: &[SubGraph],
) -> Result<(Vec<bool>, Vec<bool>), MetricsError> {
    if min_set.is_empty() {
        return Err(MetricsError::EmptyMinSet);
    }
    let union = retrieved_union(retrieved);
    let mut correct_cited: BTreeSet<&KnowledgeTriple> = BTreeSet::new();
    let precision: Vec<bool> = answer
        .all_citations()
        .filter_map(|c| match c {
            Citation::Triple(t) => {
                let correct = t.is_complete() && union.contains(t);
                if correct {
                    correct_cited.insert(t);
                }
                Some(correct && min_set.contains(t))
            }
            Citation::Malformed(_) => Some(false),
            Citation::NotApplicable => None,
        })
        .collect();
    let recall: Vec<bool> = min_set.iter().map(|k| correct_cited.contains(k)).collect();
    Ok((precision, recall))
}

/// Entailment outcomes for every (sentence, triple citation) pair:
/// (entailed count, pair count).
pub fn alignment(
    answer: &AttributedAnswer,
    judge: &dyn EntailmentJudge,
) -> Result<(usize, usize), MetricsError> {
    let mut entailed = 0usize;
    let mut total = 0usize;
    for (si, sentence) in answer.sentences.iter().enumerate() {
        for (ci, triple) in sentence.triples().enumerate() {
            let verdict = judge
                .entails(&sentence.text, &hypothesis_text(triple))
                .map_err(|source| MetricsError::Judge {
                    stage: format!("alignment: sentence {si}, citation {ci}"),
                    source,
                })?;
            total += 1;
            if verdict.entailed {
                entailed += 1;
            }
        }
    }
    Ok((entailed, total))
}

/// Secondary judge wiring for the off-topic credit rule: an [NA] sentence
/// that does not answer the question at all still earns its precision bit.
pub struct OfftopicCredit<'a> {
    pub question: &'a str,
    pub judge: &'a dyn RelevanceJudge,
}

/// [NA] precision bits (one per [NA]-marked sentence) and recall bits (one
/// per absent triple, in set order).
pub fn na_precision_recall(
    answer: &AttributedAnswer,
    absent_set: &BTreeSet<KnowledgeTriple>,
    judge: &dyn EntailmentJudge,
) -> Result<(Vec<bool>, Vec<bool>), MetricsError> {
    na_precision_recall_with(answer, absent_set, judge, None)
}

pub fn na_precision_recall_with(
    answer: &AttributedAnswer,
    absent_set: &BTreeSet<KnowledgeTriple>,
    judge: &dyn EntailmentJudge,
    offtopic: Option<&OfftopicCredit<'_>>,
) -> Result<(Vec<bool>, Vec<bool>), MetricsError> {
    if absent_set.is_empty() {
        return Err(MetricsError::EmptyAbsentSet);
    }
    let mut precision = Vec::new();
    let mut recall_hits: Vec<bool> = vec![false; absent_set.len()];
    for (si, sentence) in answer.sentences.iter().enumerate() {
        if !sentence.has_na() {
            continue;
        }
        let mut hit_any = false;
        for (ki, knowledge) in absent_set.iter().enumerate() {
            let verdict = judge
                .entails(&sentence.text, &hypothesis_text(knowledge))
                .map_err(|source| MetricsError::Judge {
                    stage: format!("[NA]: sentence {si}, absent knowledge {ki}"),
                    source,
                })?;
            if verdict.entailed {
                hit_any = true;
                recall_hits[ki] = true;
            }
        }
        if !hit_any {
            if let Some(credit) = offtopic {
                let off = credit
                    .judge
                    .is_off_topic(credit.question, &sentence.text)
                    .map_err(|source| MetricsError::Judge {
                        stage: format!("[NA] off-topic check: sentence {si}"),
                        source,
                    })?;
                hit_any = off;
            }
        }
        precision.push(hit_any);
    }
    Ok((precision, recall_hits))
}

/// Everything the aggregator needs about one scored answer.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnswerBits {
    pub correctness: Vec<bool>,
    pub precision: Vec<bool>,
    pub recall: Vec<bool>,
    /// (entailed, total) sentence-citation pairs.
    pub alignment: (usize, usize),
    pub na_precision: Vec<bool>,
    pub na_recall: Vec<bool>,
}

/// Score one answer end to end (no absent set: the plain evaluation path).
pub fn evaluate_answer(
    answer: &AttributedAnswer,
    min_set: &MinKnowledgeSet,
    retrieved: &[SubGraph],
    judge: &dyn EntailmentJudge,
) -> Result<AnswerBits, MetricsError> {
    let correctness = citation_bits(answer, retrieved);
    let (precision, recall) = citation_precision_recall(answer, min_set, retrieved)?;
    let alignment = alignment(answer, judge)?;
    Ok(AnswerBits {
        correctness,
        precision,
        recall,
        alignment,
        na_precision: Vec::new(),
        na_recall: Vec::new(),
    })
}

/// Score one answer under the knowledge-removal protocol, with the removed
/// triples as the absent-knowledge ground truth.
pub fn evaluate_answer_with_absent(
    answer: &AttributedAnswer,
    min_set: &MinKnowledgeSet,
    retrieved: &[SubGraph],
    absent_set: &BTreeSet<KnowledgeTriple>,
    judge: &dyn EntailmentJudge,
    offtopic: Option<&OfftopicCredit<'_>>,
) -> Result<AnswerBits, MetricsError> {
    let mut bits = evaluate_answer(answer, min_set, retrieved, judge)?;
    let (na_p, na_r) = na_precision_recall_with(answer, absent_set, judge, offtopic)?;
    bits.na_precision = na_p;
    bits.na_recall = na_r;
    Ok(bits)
}

/// Per-answer summary derived from the bit vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerReport {
    pub n_citations: usize,
    pub n_correct: usize,
    /// Absent iff the answer carries no scored citation.
    pub precision: Option<f64>,
    pub recall: f64,
    pub na_sentences: usize,
    pub alignment_pairs: (usize, usize),
    pub na_precision: Option<f64>,
    pub na_recall: Option<f64>,
}

impl AnswerReport {
    pub fn from_bits(bits: &AnswerBits) -> Self {
        Self {
            n_citations: bits.correctness.len(),
            n_correct: bits.correctness.iter().filter(|b| **b).count(),
            precision: mean_bits(&bits.precision),
            recall: mean_bits(&bits.recall).unwrap_or(0.0),
            na_sentences: bits.na_precision.len(),
            alignment_pairs: bits.alignment,
            na_precision: mean_bits(&bits.na_precision),
            na_recall: mean_bits(&bits.na_recall),
        }
    }
}

/// Corpus-level percentages (0-100). A field is absent when its denominator
/// is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub correctness: Option<f64>,
    pub micro_p: Option<f64>,
    pub micro_r: Option<f64>,
    pub micro_f1: Option<f64>,
    pub macro_p: Option<f64>,
    pub macro_r: Option<f64>,
    pub macro_f1: Option<f64>,
    pub alignment_pct: Option<f64>,
    pub na_p: Option<f64>,
    pub na_r: Option<f64>,
    pub na_f1: Option<f64>,
    pub per_answer: Vec<AnswerReport>,
}

/// Aggregation toggles.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct EvalOptions {
    /// Average correctness per answer instead of pooling corpus-wide.
    #[serde(default)]
    pub correctness_per_answer: bool,
    /// Grant the [NA] precision bit to off-topic sentences (needs a relevance
    /// judge).
    #[serde(default)]
    pub na_offtopic_credit: bool,
}

fn mean_bits(bits: &[bool]) -> Option<f64> {
    if bits.is_empty() {
        return None;
    }
    Some(bits.iter().filter(|b| **b).count() as f64 / bits.len() as f64)
}

fn pct(ratio: Option<f64>) -> Option<f64> {
    ratio.map(|r| r * 100.0)
}

/// Harmonic mean of two percentages (or ratios); `None` when `p + r == 0`.
pub fn harmonic_f1(p: f64, r: f64) -> Option<f64> {
    if p + r == 0.0 {
        return None;
    }
    Some(2.0 * p * r / (p + r))
}

fn f1_of(p: Option<f64>, r: Option<f64>) -> Option<f64> {
    match (p, r) {
        (Some(p), Some(r)) => harmonic_f1(p, r),
        _ => None,
    }
}

/// One decimal place, half-up — the rounding used in rendered reports.
pub fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

/// Pool per-answer bits into the corpus report. Micro metrics pool all bits
/// corpus-wide; macro metrics average the per-answer means, skipping answers
/// with nothing to average.
pub fn aggregate(answers: &[AnswerBits], options: &EvalOptions) -> Result<CorpusReport, MetricsError> {
    if answers.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let pooled = |select: fn(&AnswerBits) -> &[bool]| -> Option<f64> {
        let mut hits = 0usize;
        let mut total = 0usize;
        for a in answers {
            let bits = select(a);
            hits += bits.iter().filter(|b| **b).count();
            total += bits.len();
        }
        (total > 0).then(|| hits as f64 / total as f64)
    };
    let macro_mean = |select: fn(&AnswerBits) -> &[bool]| -> Option<f64> {
        let means: Vec<f64> = answers.iter().filter_map(|a| mean_bits(select(a))).collect();
        (!means.is_empty()).then(|| means.iter().sum::<f64>() / means.len() as f64)
    };

    let correctness = if options.correctness_per_answer {
        macro_mean(|a| &a.correctness)
    } else {
        pooled(|a| &a.correctness)
    };
    let micro_p = pooled(|a| &a.precision);
    let micro_r = pooled(|a| &a.recall);
    let macro_p = macro_mean(|a| &a.precision);
    let macro_r = macro_mean(|a| &a.recall);

    let (entailed, total_pairs) = answers
        .iter()
        .fold((0usize, 0usize), |(e, t), a| (e + a.alignment.0, t + a.alignment.1));
    let alignment_pct = (total_pairs > 0).then(|| entailed as f64 / total_pairs as f64);

    let na_p = pooled(|a| &a.na_precision);
    let na_r = pooled(|a| &a.na_recall);

    Ok(CorpusReport {
        correctness: pct(correctness),
        micro_p: pct(micro_p),
        micro_r: pct(micro_r),
        micro_f1: f1_of(pct(micro_p), pct(micro_r)),
        macro_p: pct(macro_p),
        macro_r: pct(macro_r),
        macro_f1: f1_of(pct(macro_p), pct(macro_r)),
        alignment_pct: pct(alignment_pct),
        na_p: pct(na_p),
        na_r: pct(na_r),
        na_f1: f1_of(pct(na_p), pct(na_r)),
        per_answer: answers.iter().map(AnswerReport::from_bits).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::citation::parse_answer;
    use crate::judges::mock::LexicalEntailment;
    use crate::judges::EntailmentVerdict;
    use crate::store::{Entity, EntityId};

    fn crane_graph() -> SubGraph {
        SubGraph::new(
            Entity {
                id: EntityId::new("Q206534"),
                name: "Stephen Crane".into(),
                entity_type: "human".into(),
            },
            [
                KnowledgeTriple::new("Q206534", "religion", "atheism"),
                KnowledgeTriple::new("Q206534", "occupation", "writer"),
                KnowledgeTriple::new("Q206534", "movement", "literary realism"),
                KnowledgeTriple::new("Q206534", "notable works", "The Red Badge of Courage"),
                KnowledgeTriple::new("Q206534", "place of birth", "Newark"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn correctness_examples() {
        let retrieved = [crane_graph()];
        let a = parse_answer("Crane's views on religion were atheistic [Q206534, religion: atheism].");
        assert_eq!(citation_correctness(&a, &retrieved), Some(1.0));

        let malformed_only = parse_answer("A claim [Q206534].");
        assert_eq!(citation_correctness(&malformed_only, &retrieved), Some(0.0));

        // 3 citations, 2 in the KG → 2/3.
        let two_of_three = parse_answer(
            "He was a writer [Q206534, occupation: writer]. \
             He was born in Newark [Q206534, place of birth: Newark]. \
             He loved baseball [Q206534, sport: baseball].",
        );
        let c = citation_correctness(&two_of_three, &retrieved).unwrap();
        assert!((c - 2.0 / 3.0).abs() < 1e-12);

        let no_citations = parse_answer("Nothing is cited here.");
        assert_eq!(citation_correctness(&no_citations, &retrieved), None);

        // [NA] carries no weight.
        let with_na = parse_answer("Claim [NA]. Fact [Q206534, religion: atheism].");
        assert_eq!(citation_correctness(&with_na, &retrieved), Some(1.0));
    }

    #[test]
    fn precision_needs_min_set_membership() {
        let retrieved = [crane_graph()];
        let min_set = MinKnowledgeSet::new([KnowledgeTriple::new("Q206534", "religion", "atheism")]);
        // Correct citation, but not in the minimum set.
        let a = parse_answer("He was a writer [Q206534, occupation: writer].");
        let (p, r) = citation_precision_recall(&a, &min_set, &retrieved).unwrap();
        assert_eq!(p, vec![false]);
        assert_eq!(r, vec![false]);
    }

    #[test]
    fn recall_counts_covered_knowledge() {
        let retrieved = [crane_graph()];
        let min_set = MinKnowledgeSet::new([
            KnowledgeTriple::new("Q206534", "religion", "atheism"),
            KnowledgeTriple::new("Q206534", "occupation", "writer"),
            KnowledgeTriple::new("Q206534", "movement", "literary realism"),
            KnowledgeTriple::new("Q206534", "notable works", "The Red Badge of Courage"),
            KnowledgeTriple::new("Q206534", "place of birth", "Newark"),
        ]);
        let a = parse_answer(
            "Crane was an atheist [Q206534, religion: atheism]. \
             He wrote [Q206534, occupation: writer]. \
             He led realism [Q206534, movement: literary realism].",
        );
        let (p, r) = citation_precision_recall(&a, &min_set, &retrieved).unwrap();
        assert_eq!(p.iter().filter(|b| **b).count(), 3);
        assert_eq!(r.iter().filter(|b| **b).count(), 3);
        assert_eq!(r.len(), 5);
    }

    #[test]
    fn duplicate_citations_keep_set_semantics() {
        let retrieved = [crane_graph()];
        let min_set = MinKnowledgeSet::new([KnowledgeTriple::new("Q206534", "religion", "atheism")]);
        let a = parse_answer(
            "He was atheist [Q206534, religion: atheism]. \
             Again: atheist [Q206534, religion: atheism].",
        );
        let (p, r) = citation_precision_recall(&a, &min_set, &retrieved).unwrap();
        assert_eq!(p, vec![true, true]);
        assert_eq!(r, vec![true]);
    }

    #[test]
    fn empty_min_set_is_an_error() {
        let a = parse_answer("Text [NA].");
        assert!(matches!(
            citation_precision_recall(&a, &MinKnowledgeSet::default(), &[]),
            Err(MetricsError::EmptyMinSet)
        ));
    }

    #[test]
    fn micro_precision_never_exceeds_correctness_with_malformed() {
        let retrieved = [crane_graph()];
        let min_set = MinKnowledgeSet::new([KnowledgeTriple::new("Q206534", "religion", "atheism")]);
        // One malformed citation and one correct in-set citation.
        let a = parse_answer("Bad bracket [Q206534]. Good one [Q206534, religion: atheism].");
        let bits = evaluate_answer(&a, &min_set, &retrieved, &LexicalEntailment).unwrap();
        let report = aggregate(std::slice::from_ref(&bits), &EvalOptions::default()).unwrap();
        assert_eq!(report.correctness, Some(50.0));
        assert_eq!(report.micro_p, Some(50.0));
        assert!(report.micro_p <= report.correctness);
    }

    struct ScriptedJudge {
        entail_first: usize,
    }

    impl EntailmentJudge for ScriptedJudge {
        fn entails(&self, premise: &str, _h: &str) -> Result<EntailmentVerdict, JudgeError> {
            // Premises carry a sentence index marker in these tests.
            let idx: usize = premise
                .split_whitespace()
                .find_map(|w| w.strip_prefix("s#")?.trim_end_matches('.').parse().ok())
                .unwrap_or(usize::MAX);
            Ok(EntailmentVerdict::binary(idx < self.entail_first))
        }
    }

    #[test]
    fn alignment_counts_pairs() {
        // 10 pairs across 10 sentences, judge entails the first 7.
        let text: String = (0..10)
            .map(|i| format!("Sentence s#{i} [Q1, rel{i}: value{i}]."))
            .collect::<Vec<_>>()
            .join(" ");
        let answer = parse_answer(&text);
        let judge = ScriptedJudge { entail_first: 7 };
        let (entailed, total) = alignment(&answer, &judge).unwrap();
        assert_eq!((entailed, total), (7, 10));

        let empty = parse_answer("No citations here. None at all [NA].");
        assert_eq!(alignment(&empty, &judge).unwrap(), (0, 0));
    }

    #[test]
    fn alignment_pairs_with_lexical_judge() {
        let answer = parse_answer(
            "Hertwig served as a professor at the University of Jena for the last 40 years of his career [Q68753, employer: University of Jena].",
        );
        let (entailed, total) = alignment(&answer, &LexicalEntailment).unwrap();
        assert_eq!((entailed, total), (1, 1));
    }

    #[test]
    fn na_precision_recall_basics() {
        let victim = KnowledgeTriple::new("Q1", "place of birth", "Lisbon");
        let absent: BTreeSet<_> = [victim].into_iter().collect();

        // No [NA] sentences: precision absent, recall all zero.
        let none = parse_answer("A plain sentence [Q1, occupation: sailor].");
        let (p, r) = na_precision_recall(&none, &absent, &LexicalEntailment).unwrap();
        assert!(p.is_empty());
        assert_eq!(r, vec![false]);

        // One [NA] sentence entailing the single removed triple: P = R = 1.
        let hit = parse_answer("The place of birth is said to be Lisbon [NA].");
        let (p, r) = na_precision_recall(&hit, &absent, &LexicalEntailment).unwrap();
        assert_eq!(p, vec![true]);
        assert_eq!(r, vec![true]);

        // Empty absent set is a precondition violation.
        assert!(matches!(
            na_precision_recall(&hit, &BTreeSet::new(), &LexicalEntailment),
            Err(MetricsError::EmptyAbsentSet)
        ));
    }

    #[test]
    fn na_offtopic_credit_is_gated() {
        use crate::judges::mock::LexicalRelevance;
        let absent: BTreeSet<_> =
            [KnowledgeTriple::new("Q1", "place of birth", "Lisbon")].into_iter().collect();
        let answer = parse_answer("Bananas ripen quickly in the tropics [NA].");

        let (p, _) = na_precision_recall(&answer, &absent, &LexicalEntailment).unwrap();
        assert_eq!(p, vec![false], "no credit without the flag");

        let credit = OfftopicCredit {
            question: "Where was the sculptor born?",
            judge: &LexicalRelevance,
        };
        let (p, _) =
            na_precision_recall_with(&answer, &absent, &LexicalEntailment, Some(&credit)).unwrap();
        assert_eq!(p, vec![true], "off-topic [NA] sentence earns the bit");
    }

    #[test]
    fn paper_f1_arithmetic() {
        for (p, r, expected) in [(36.0, 43.6, 39.4), (29.0, 50.8, 36.9), (30.1, 57.1, 39.4)] {
            let f1 = harmonic_f1(p, r).unwrap();
            assert!(
                (round1(f1) - expected).abs() < 0.05,
                "f1({p}, {r}) = {f1}, expected ≈ {expected}"
            );
        }
        assert_eq!(harmonic_f1(0.0, 0.0), None);
    }

    fn bits(correct: &[bool], precision: &[bool], recall: &[bool]) -> AnswerBits {
        AnswerBits {
            correctness: correct.to_vec(),
            precision: precision.to_vec(),
            recall: recall.to_vec(),
            alignment: (0, 0),
            na_precision: Vec::new(),
            na_recall: Vec::new(),
        }
    }

    #[test]
    fn single_answer_micro_equals_macro() {
        let one = bits(&[true, false, true], &[true, false, false], &[true, false]);
        let report = aggregate(&[one], &EvalOptions::default()).unwrap();
        assert_eq!(report.micro_p, report.macro_p);
        assert_eq!(report.micro_r, report.macro_r);
        assert_eq!(report.micro_f1, report.macro_f1);
    }

    #[test]
    fn zero_citation_answers_leave_precision_pools() {
        let cited = bits(&[true], &[true], &[true, false]);
        let uncited = bits(&[], &[], &[false, false]);
        let report = aggregate(&[cited, uncited], &EvalOptions::default()).unwrap();
        // Precision pools only over the cited answer.
        assert_eq!(report.micro_p, Some(100.0));
        assert_eq!(report.macro_p, Some(100.0));
        // Recall pools over both: 1 of 4 knowledge bits hit.
        assert_eq!(report.micro_r, Some(25.0));
    }

    #[test]
    fn f1_fields_are_harmonic_means() {
        let report = aggregate(
            &[bits(&[true, true, false], &[true, false, false], &[true, true, false])],
            &EvalOptions::default(),
        )
        .unwrap();
        let f1 = harmonic_f1(report.micro_p.unwrap(), report.micro_r.unwrap()).unwrap();
        assert_eq!(report.micro_f1, Some(f1));
    }

    #[test]
    fn correctness_pooling_toggle() {
        // Answer A: 1 citation, correct. Answer B: 3 citations, 1 correct.
        let a = bits(&[true], &[false], &[false]);
        let b = bits(&[true, false, false], &[false, false, false], &[false]);
        let pooled = aggregate(&[a.clone(), b.clone()], &EvalOptions::default()).unwrap();
        assert_eq!(pooled.correctness, Some(50.0)); // 2 of 4 citations
        let per_answer = aggregate(
            &[a, b],
            &EvalOptions {
                correctness_per_answer: true,
                ..EvalOptions::default()
            },
        )
        .unwrap();
        let expected = (1.0 + 1.0 / 3.0) / 2.0 * 100.0;
        assert!((per_answer.correctness.unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert!(matches!(
            aggregate(&[], &EvalOptions::default()),
            Err(MetricsError::EmptyCorpus)
        ));
    }

    #[test]
    fn recall_is_capped_by_removed_knowledge() {
        // Even an answer citing every minimum-set triple cannot recall the
        // removed ones: a correct citation must exist in the reduced graph.
        let graph = crane_graph();
        let min_set = MinKnowledgeSet::new(graph.triples().iter().cloned());
        let m = min_set.len();
        for removed in 1..m {
            let victims: BTreeSet<KnowledgeTriple> =
                min_set.iter().take(removed).cloned().collect();
            let (reduced, _) = graph.remove_knowledge(&victims).unwrap();
            let cite_all: String = min_set
                .iter()
                .map(|t| format!("A claim [{}, {}: {}].", t.subject, t.relation, t.object))
                .collect::<Vec<_>>()
                .join(" ");
            let answer = parse_answer(&cite_all);
            let (_, recall) =
                citation_precision_recall(&answer, &min_set, std::slice::from_ref(&reduced))
                    .unwrap();
            let hits = recall.iter().filter(|b| **b).count();
            assert_eq!(hits, m - removed, "recall capped at (m - k) / m");
        }
    }

    #[test]
    fn alignment_is_invariant_under_sentence_reordering() {
        let a = parse_answer(
            "Hertwig worked at the University of Jena [Q68753, employer: University of Jena]. \
             Merton died in Bangkok [Q1, country of citizenship: United States of America].",
        );
        let mut reordered = a.clone();
        reordered.sentences.reverse();
        let original = alignment(&a, &LexicalEntailment).unwrap();
        let shuffled = alignment(&reordered, &LexicalEntailment).unwrap();
        assert_eq!(original, shuffled);
        assert_eq!(original, (1, 2));
    }
}
