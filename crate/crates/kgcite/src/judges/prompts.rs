//! Prompt assets and their assembly into wire-ready strings.
//!
//! The templates ship as versioned text files under `assets/` and assembly is
//! a pure function of (template, slots); the golden-file tests pin every
//! assembled form byte-exactly.

use crate::judges::{GenerationRequest, QualityMetric};
use crate::questiongen::QuestionStyle;
use crate::store::SubGraph;

macro_rules! asset {
    ($name:literal) => {
        include_str!(concat!("../../assets/prompts/", $name)).trim_end_matches('\n')
    };
}

pub fn generation_instruction() -> &'static str {
    asset!("generation_instruction.txt")
}

pub fn generation_demonstration() -> &'static str {
    asset!("generation_demonstration.txt")
}

pub fn grading_instruction(metric: QualityMetric) -> &'static str {
    match metric {
        QualityMetric::Coherence => asset!("geval_coherence.txt"),
        QualityMetric::Consistency => asset!("geval_consistency.txt"),
        QualityMetric::Fluency => asset!("geval_fluency.txt"),
        QualityMetric::Relevance => asset!("geval_relevance.txt"),
    }
}

pub fn annotate_instruction() -> &'static str {
    asset!("qg_annotate_instruction.txt")
}

pub fn annotate_demonstration() -> &'static str {
    asset!("qg_annotate_demonstration.txt")
}

pub fn extend_instruction() -> &'static str {
    asset!("qg_extend_instruction.txt")
}

pub fn extend_demonstration() -> &'static str {
    asset!("qg_extend_demonstration.txt")
}

pub fn question_instruction(style: QuestionStyle) -> &'static str {
    match style {
        QuestionStyle::General => asset!("qg_general_instruction.txt"),
        QuestionStyle::Specific => asset!("qg_specific_instruction.txt"),
    }
}

pub fn question_demonstration(style: QuestionStyle) -> &'static str {
    match style {
        QuestionStyle::General => asset!("qg_general_demonstration.txt"),
        QuestionStyle::Specific => asset!("qg_specific_demonstration.txt"),
    }
}

/// Relation-class lookup for the sentence templates, shipped as TSV.
pub fn relation_classes_tsv() -> &'static str {
    include_str!("../../assets/relation_classes.tsv")
}

/// Brace-format knowledge entry for one subgraph: display name first, one
/// `relation: value` pair per triple, the qid last. This is the form the
/// generation prompt presents and the form the mock citers read back.
pub fn knowledge_entry(graph: &SubGraph) -> String {
    let mut parts = vec![format!("name: {}", graph.center().name)];
    for t in graph.triples() {
        parts.push(format!("{}: {}", t.relation, t.object));
    }
    parts.push(format!("qid: {}", graph.center().id));
    format!("{{{}}}", parts.join(", "))
}

/// Inverse of [`knowledge_entry`]: (qid, name, relation/value pairs).
/// Returns `None` when the braces or the identity fields are missing. Values
/// containing `", "` are not representable in this form.
pub fn parse_knowledge_entry(entry: &str) -> Option<(String, String, Vec<(String, String)>)> {
    let inner = entry.trim().strip_prefix('{')?.strip_suffix('}')?;
    let mut qid = None;
    let mut name = None;
    let mut pairs = Vec::new();
    for part in inner.split(", ") {
        let (key, value) = part.split_once(": ")?;
        match key {
            "qid" => qid = Some(value.to_string()),
            "name" if name.is_none() => name = Some(value.to_string()),
            _ => pairs.push((key.to_string(), value.to_string())),
        }
    }
    Some((qid?, name?, pairs))
}

/// The one-shot generation prompt: instruction, demonstration, then the
/// actual knowledge block and question awaiting an answer.
pub fn assemble_generation_prompt(request: &GenerationRequest) -> String {
    let mut knowledge = request.knowledge_block.join("\n");
    if !knowledge.is_empty() {
        knowledge.push('\n');
    }
    format!(
        "Instruction: {}\n\n{}\n\nQuestion: Considering the information:\n{}{}\n\nAnswer:",
        request.instruction, request.demonstration, knowledge, request.question
    )
}

/// A text-quality grading prompt for one metric.
pub fn assemble_grading_prompt(metric: QualityMetric, question: &str, answer: &str) -> String {
    format!(
        "{}\n\nQuestion:\n{}\n\nAnswer:\n{}\n\nEvaluation Form (scores ONLY):\n- {}:",
        grading_instruction(metric),
        question,
        answer,
        metric.name()
    )
}

/// The NLI input format.
pub fn assemble_nli_prompt(premise: &str, hypothesis: &str) -> String {
    format!("premise: {premise} hypothesis: {hypothesis}")
}

/// Round-1 annotation prompt: label the seed sentence with pool knowledge.
pub fn assemble_annotate_prompt(paragraph: &str, knowledge_entries: &[String]) -> String {
    format!(
        "Instruction: {}\n\n{}\n\nsentence: {}\nknowledge: {}\n\nGenerated Answer:",
        annotate_instruction(),
        annotate_demonstration(),
        paragraph,
        knowledge_entries.join("\n")
    )
}

/// Rounds 2+ extension prompt: add one sentence carrying the given knowledge.
pub fn assemble_extend_prompt(paragraph: &str, knowledge_entry: &str) -> String {
    format!(
        "Instruction: {}\n\n{}\n\nanswer: {}\nknowledge: {}\n\nGenerated Answer:",
        extend_instruction(),
        extend_demonstration(),
        paragraph,
        knowledge_entry
    )
}

/// Final question prompt, general or specific flavor.
pub fn assemble_question_prompt(style: QuestionStyle, paragraph: &str) -> String {
    format!(
        "Instruction: {}\n\n{}\n\nParagraph: {}\n\nGenerated Question:",
        question_instruction(style),
        question_demonstration(style),
        paragraph
    )
}
