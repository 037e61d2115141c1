//! Deterministic stand-ins for the remote judges. Same inputs, same outputs,
//! on every platform — they exist so the full benchmark and both ablation
//! harnesses run offline, not as fidelity claims about real NLI or LLM
//! behavior.

use std::collections::{BTreeMap, BTreeSet};

use crate::judges::prompts::parse_knowledge_entry;
use crate::judges::{
    AnswerGenerator, EntailmentJudge, EntailmentVerdict, GenerationRequest, JudgeError,
    QualityMetric, RelevanceJudge, TextGrader,
};
use crate::questiongen::{
    templatize, ParagraphGenerator, Perplexity, QuestionMaker, QuestionStyle, RelationClasses,
};
use crate::store::KnowledgeTriple;

fn content_tokens(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            current.extend(c.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Entailment by lexical coverage: the premise entails `relation: value` iff
/// every token of the value appears in the premise, case-insensitively.
#[derive(Debug, Default, Clone)]
pub struct LexicalEntailment;

impl EntailmentJudge for LexicalEntailment {
    fn entails(&self, premise: &str, hypothesis: &str) -> Result<EntailmentVerdict, JudgeError> {
        let value = hypothesis
            .split_once(':')
            .map(|(_, v)| v)
            .unwrap_or(hypothesis);
        let premise_tokens: BTreeSet<String> = content_tokens(premise).into_iter().collect();
        let value_tokens = content_tokens(value);
        let entailed =
            !value_tokens.is_empty() && value_tokens.iter().all(|t| premise_tokens.contains(t));
        Ok(EntailmentVerdict::binary(entailed))
    }
}

const RELEVANCE_STOPWORDS: &[&str] = &[
    "the", "a", "an", "of", "and", "or", "in", "on", "at", "is", "was", "were", "are", "to",
    "for", "about", "what", "who", "how", "did", "does", "his", "her", "their", "this", "that",
    "with", "by", "it", "be",
];

/// Off-topic detector for the [NA] precision credit rule: a sentence is
/// off-topic when it shares no content token with the question.
#[derive(Debug, Default, Clone)]
pub struct LexicalRelevance;

impl RelevanceJudge for LexicalRelevance {
    fn is_off_topic(&self, question: &str, sentence: &str) -> Result<bool, JudgeError> {
        let strip = |text: &str| -> BTreeSet<String> {
            content_tokens(text)
                .into_iter()
                .filter(|t| !RELEVANCE_STOPWORDS.contains(&t.as_str()))
                .collect()
        };
        let question_tokens = strip(question);
        let sentence_tokens = strip(sentence);
        Ok(question_tokens.is_disjoint(&sentence_tokens))
    }
}

/// A generator that cites every provided triple verbatim, one sentence per
/// triple, and claims nothing else. The controllable oracle for the
/// harnesses: on gold graphs its citation recall is 1 by construction.
/// Triples whose relation is `name` or `qid` are skipped — the bracket
/// grammar reserves those keys for subject identity, so they cannot be
/// cited.
#[derive(Debug, Default, Clone)]
pub struct MockFaithfulCiter;

fn citable(relation: &str) -> bool {
    relation != "name" && relation != "qid"
}

fn cite_sentence(qid: &str, name: &str, relation: &str, value: &str) -> String {
    format!("The {relation} of {name} is {value} [{qid}, {relation}: {value}].")
}

impl AnswerGenerator for MockFaithfulCiter {
    fn generate(
        &self,
        _question_id: &str,
        request: &GenerationRequest,
    ) -> Result<String, JudgeError> {
        let mut sentences = Vec::new();
        for entry in &request.knowledge_block {
            let Some((qid, name, pairs)) = parse_knowledge_entry(entry) else {
                continue;
            };
            for (relation, value) in pairs {
                if citable(&relation) {
                    sentences.push(cite_sentence(&qid, &name, &relation, &value));
                }
            }
        }
        Ok(sentences.join(" "))
    }
}

/// A faithful citer that also knows the full minimum knowledge set per
/// question: any required triple missing from the provided block becomes a
/// claim sentence flagged with [NA]. Under the lexical entailment judge those
/// sentences entail exactly their missing triples.
#[derive(Debug, Default, Clone)]
pub struct MockGapAwareCiter {
    known: BTreeMap<String, BTreeSet<KnowledgeTriple>>,
}

impl MockGapAwareCiter {
    pub fn new(known: BTreeMap<String, BTreeSet<KnowledgeTriple>>) -> Self {
        Self { known }
    }

    pub fn insert(&mut self, question_id: impl Into<String>, min_set: BTreeSet<KnowledgeTriple>) {
        self.known.insert(question_id.into(), min_set);
    }
}

impl AnswerGenerator for MockGapAwareCiter {
    fn generate(
        &self,
        question_id: &str,
        request: &GenerationRequest,
    ) -> Result<String, JudgeError> {
        let mut provided: BTreeSet<KnowledgeTriple> = BTreeSet::new();
        let mut sentences = Vec::new();
        for entry in &request.knowledge_block {
            let Some((qid, name, pairs)) = parse_knowledge_entry(entry) else {
                continue;
            };
            for (relation, value) in pairs {
                if !citable(&relation) {
                    continue;
                }
                provided.insert(KnowledgeTriple::new(qid.as_str(), &relation, &value));
                sentences.push(cite_sentence(&qid, &name, &relation, &value));
            }
        }
        if let Some(min_set) = self.known.get(question_id) {
            for missing in min_set.iter().filter(|t| !provided.contains(t)) {
                sentences.push(format!(
                    "The {} is said to be {}, but no supporting record was provided [NA].",
                    missing.relation, missing.object
                ));
            }
        }
        Ok(sentences.join(" "))
    }
}

/// Generator with canned answers per question id, for replaying harness
/// scenarios.
#[derive(Debug, Default, Clone)]
pub struct ScriptedGenerator {
    answers: BTreeMap<String, String>,
}

impl ScriptedGenerator {
    pub fn new(answers: BTreeMap<String, String>) -> Self {
        Self { answers }
    }

    pub fn insert(&mut self, question_id: impl Into<String>, answer: impl Into<String>) {
        self.answers.insert(question_id.into(), answer.into());
    }
}

impl AnswerGenerator for ScriptedGenerator {
    fn generate(
        &self,
        question_id: &str,
        _request: &GenerationRequest,
    ) -> Result<String, JudgeError> {
        self.answers
            .get(question_id)
            .cloned()
            .ok_or_else(|| JudgeError::MissingScript {
                key: question_id.to_string(),
            })
    }
}

/// Grader returning a fixed score unless a (question id, metric) override is
/// scripted.
#[derive(Debug, Clone)]
pub struct MockGrader {
    default_score: u8,
    overrides: BTreeMap<(String, QualityMetric), u8>,
}

impl Default for MockGrader {
    fn default() -> Self {
        Self {
            default_score: 4,
            overrides: BTreeMap::new(),
        }
    }
}

impl MockGrader {
    pub fn new(default_score: u8) -> Self {
        Self {
            default_score,
            overrides: BTreeMap::new(),
        }
    }

    pub fn script(&mut self, question_id: impl Into<String>, metric: QualityMetric, score: u8) {
        self.overrides.insert((question_id.into(), metric), score);
    }
}

impl TextGrader for MockGrader {
    fn grade(
        &self,
        question_id: &str,
        _question: &str,
        _answer: &str,
        metric: QualityMetric,
    ) -> Result<u8, JudgeError> {
        Ok(*self
            .overrides
            .get(&(question_id.to_string(), metric))
            .unwrap_or(&self.default_score))
    }
}

/// Evolution-oracle mock: annotates by lexical object match and extends with
/// the templated sentence for the injected knowledge.
#[derive(Debug, Default, Clone)]
pub struct LexicalAnnotator;

fn value_in_text(text: &str, value: &str) -> bool {
    let text_tokens = content_tokens(text);
    let value_tokens = content_tokens(value);
    !value_tokens.is_empty()
        && text_tokens
            .windows(value_tokens.len().min(text_tokens.len().max(1)))
            .any(|w| w == value_tokens.as_slice())
}

impl ParagraphGenerator for LexicalAnnotator {
    fn annotate(&self, paragraph: &str, knowledge: &[String]) -> Result<String, JudgeError> {
        let mut out = paragraph.trim_end().to_string();
        for entry in knowledge {
            let Some((qid, name, pairs)) = parse_knowledge_entry(entry) else {
                continue;
            };
            for (relation, value) in pairs {
                if citable(&relation) && value_in_text(paragraph, &value) {
                    out.push_str(&format!(" [qid: {qid}, name: {name}, {relation}: {value}]"));
                }
            }
        }
        Ok(out)
    }

    fn extend(&self, paragraph: &str, knowledge: &str) -> Result<String, JudgeError> {
        let Some((qid, name, pairs)) = parse_knowledge_entry(knowledge) else {
            return Err(JudgeError::Endpoint(format!(
                "unreadable knowledge entry: {knowledge}"
            )));
        };
        let Some((relation, value)) = pairs.first() else {
            return Err(JudgeError::Endpoint("knowledge entry carries no pair".into()));
        };
        let classes = RelationClasses::shipped();
        let sentence = templatize(&name, relation, value, classes);
        Ok(format!(
            "{} {sentence} [qid: {qid}, {relation}: {value}].",
            paragraph.trim_end()
        ))
    }
}

/// Question-maker mock: names the people it can spot in the paragraph and
/// phrases one general and one specific question about them.
#[derive(Debug, Default, Clone)]
pub struct TemplateQuestionMaker;

/// First two runs of >= 2 consecutive capitalized words, a crude person-name
/// guess good enough for fixtures.
fn guess_names(paragraph: &str) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for word in paragraph.split_whitespace() {
        let clean = word.trim_matches(|c: char| !c.is_alphanumeric());
        let capitalized = clean.chars().next().is_some_and(|c| c.is_uppercase())
            && clean.chars().all(|c| c.is_alphanumeric());
        if capitalized {
            current.push(clean);
        } else {
            if current.len() >= 2 {
                let name = current.join(" ");
                if !names.contains(&name) {
                    names.push(name);
                }
            }
            current.clear();
        }
    }
    if current.len() >= 2 {
        let name = current.join(" ");
        if !names.contains(&name) {
            names.push(name);
        }
    }
    names.truncate(2);
    names
}

impl QuestionMaker for TemplateQuestionMaker {
    fn make_question(&self, paragraph: &str, style: QuestionStyle) -> Result<String, JudgeError> {
        let names = guess_names(paragraph);
        let subject = if names.is_empty() {
            "the people in this account".to_string()
        } else {
            names.join(" and ")
        };
        Ok(match style {
            QuestionStyle::General => {
                format!("Who are {subject}, and how are their life stories connected?")
            }
            QuestionStyle::Specific => format!(
                "What specific recorded facts about {subject} does this account rest on, and in what order did they come about?"
            ),
        })
    }
}

/// Deterministic perplexity heuristic: text that keeps re-using its own
/// vocabulary reads as more predictable, so perplexity grows with the
/// type/token ratio. Positive for any text.
#[derive(Debug, Default, Clone)]
pub struct LexicalPerplexity;

impl Perplexity for LexicalPerplexity {
    fn perplexity(&self, text: &str) -> Result<f64, JudgeError> {
        let tokens = content_tokens(text);
        if tokens.is_empty() {
            return Ok(10.0);
        }
        let distinct: BTreeSet<&String> = tokens.iter().collect();
        Ok(1.0 + 9.0 * distinct.len() as f64 / tokens.len() as f64)
    }
}

/// Perplexity from a scripted table: the first (key, value) whose key occurs
/// in the text wins, otherwise the default.
#[derive(Debug, Clone)]
pub struct ScriptedPerplexity {
    table: Vec<(String, f64)>,
    default: f64,
}

impl ScriptedPerplexity {
    pub fn new(table: Vec<(String, f64)>, default: f64) -> Self {
        Self { table, default }
    }
}

impl Perplexity for ScriptedPerplexity {
    fn perplexity(&self, text: &str) -> Result<f64, JudgeError> {
        Ok(self
            .table
            .iter()
            .find(|(key, _)| text.contains(key))
            .map(|(_, v)| *v)
            .unwrap_or(self.default))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::citation::parse_answer;
    use crate::judges::prompts::knowledge_entry;
    use crate::store::{Entity, EntityId, SubGraph};

    #[test]
    fn lexical_entailment_positive_example() {
        let judge = LexicalEntailment;
        let verdict = judge
            .entails(
                "Hertwig served as a professor at the University of Jena for the last 40 years of his career.",
                "employer: University of Jena",
            )
            .unwrap();
        assert!(verdict.entailed);
    }

    #[test]
    fn lexical_entailment_negative_example() {
        let judge = LexicalEntailment;
        let verdict = judge
            .entails(
                "Merton died on December 10, 1968, in Bangkok, Thailand.",
                "country of citizenship: United States of America",
            )
            .unwrap();
        assert!(!verdict.entailed);
    }

    #[test]
    fn lexical_entailment_empty_overlap() {
        let judge = LexicalEntailment;
        assert!(!judge.entails("alpha beta", "rel: gamma delta").unwrap().entailed);
    }

    #[test]
    fn faithful_citer_cites_exactly_the_provided_triples() {
        let graph = SubGraph::new(
            Entity {
                id: EntityId::new("Q1"),
                name: "Avery Stone".into(),
                entity_type: "human".into(),
            },
            (0..5).map(|i| KnowledgeTriple::new("Q1", format!("relation{i}"), format!("value{i}"))),
        )
        .unwrap();
        let request = GenerationRequest::new(vec![knowledge_entry(&graph)], "Who is Avery Stone?");
        let answer = MockFaithfulCiter.generate("q1", &request).unwrap();
        let parsed = parse_answer(&answer);
        let cited: BTreeSet<KnowledgeTriple> = parsed.triple_citations().cloned().collect();
        assert_eq!(&cited, graph.triples());
        assert_eq!(parsed.na_sentence_count(), 0);
    }

    #[test]
    fn gap_aware_citer_flags_missing_knowledge_with_na() {
        let graph = SubGraph::new(
            Entity {
                id: EntityId::new("Q1"),
                name: "Avery Stone".into(),
                entity_type: "human".into(),
            },
            [
                KnowledgeTriple::new("Q1", "occupation", "sculptor"),
                KnowledgeTriple::new("Q1", "award received", "Praemium Imperiale"),
            ],
        )
        .unwrap();
        let victim = KnowledgeTriple::new("Q1", "place of birth", "Lisbon");
        let mut min_set: BTreeSet<KnowledgeTriple> = graph.triples().clone();
        min_set.insert(victim.clone());
        let mut citer = MockGapAwareCiter::default();
        citer.insert("q1", min_set);

        let request = GenerationRequest::new(vec![knowledge_entry(&graph)], "Who is Avery Stone?");
        let answer = citer.generate("q1", &request).unwrap();
        let parsed = parse_answer(&answer);
        assert_eq!(parsed.na_sentence_count(), 1);
        let na_sentence = parsed
            .sentences
            .iter()
            .find(|s| s.has_na())
            .expect("one NA sentence");
        // The NA sentence lexically entails the removed triple.
        let verdict = LexicalEntailment
            .entails(&na_sentence.text, &format!("{}: {}", victim.relation, victim.object))
            .unwrap();
        assert!(verdict.entailed);
    }

    #[test]
    fn scripted_generator_contract() {
        let mut generator = ScriptedGenerator::default();
        generator.insert("q7", "A canned answer [NA].");
        let request = GenerationRequest::new(vec![], "?");
        assert_eq!(
            generator.generate("q7", &request).unwrap(),
            "A canned answer [NA]."
        );
        assert!(matches!(
            generator.generate("q8", &request),
            Err(JudgeError::MissingScript { .. })
        ));
    }

    #[test]
    fn mock_grader_scripts_and_defaults() {
        let mut grader = MockGrader::new(3);
        grader.script("q7", QualityMetric::Relevance, 4);
        assert_eq!(
            grader.grade("q7", "q", "a", QualityMetric::Relevance).unwrap(),
            4
        );
        assert_eq!(
            grader.grade("q7", "q", "a", QualityMetric::Fluency).unwrap(),
            3
        );
    }

    #[test]
    fn relevance_mock_flags_disjoint_sentences() {
        let judge = LexicalRelevance;
        assert!(judge
            .is_off_topic("Who was Stephen Crane?", "Bananas ripen quickly.")
            .unwrap());
        assert!(!judge
            .is_off_topic("Who was Stephen Crane?", "Crane wrote fiction.")
            .unwrap());
    }

    #[test]
    fn annotator_labels_only_matching_values() {
        let entries = vec![
            "{name: Diego Simeone, occupation: association football player, member of sports team: Atletico Madrid, qid: Q258115}".to_string(),
        ];
        let paragraph =
            "Diego Simeone was born in Madrid while playing for Atletico Madrid.";
        let annotated = LexicalAnnotator.annotate(paragraph, &entries).unwrap();
        let parsed = parse_answer(&annotated);
        let cited: Vec<KnowledgeTriple> = parsed.triple_citations().cloned().collect();
        assert_eq!(
            cited,
            vec![KnowledgeTriple::new(
                "Q258115",
                "member of sports team",
                "Atletico Madrid"
            )]
        );
    }

    #[test]
    fn question_maker_names_people() {
        let q = TemplateQuestionMaker
            .make_question(
                "Diego Simeone raised Giovanni Simeone in Madrid.",
                QuestionStyle::General,
            )
            .unwrap();
        assert!(q.contains("Diego Simeone"));
        assert!(q.contains("Giovanni Simeone"));
        assert!(q.ends_with('?'));
    }

    #[test]
    fn perplexities_are_positive_and_deterministic() {
        let p = LexicalPerplexity;
        let a = p.perplexity("the cat sat on the mat").unwrap();
        let b = p.perplexity("the cat sat on the mat").unwrap();
        assert_eq!(a, b);
        assert!(a > 0.0);

        let scripted = ScriptedPerplexity::new(vec![("Rome".into(), 2.0)], 5.0);
        assert_eq!(scripted.perplexity("born in Rome").unwrap(), 2.0);
        assert_eq!(scripted.perplexity("born in Pisa").unwrap(), 5.0);
    }
}
