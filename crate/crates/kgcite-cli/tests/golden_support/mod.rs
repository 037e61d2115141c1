//! The fixture request shared by the golden-file test and its regenerator.

use kgcite::judges::prompts::{
    assemble_generation_prompt, assemble_grading_prompt, assemble_nli_prompt, knowledge_entry,
};
use kgcite::judges::{GenerationRequest, QualityMetric};
use kgcite::store::{Entity, EntityId, KnowledgeTriple, SubGraph};

pub const GOLDEN_DIR: &str = "tests/golden";

fn crane_graph() -> SubGraph {
    SubGraph::new(
        Entity {
            id: EntityId::new("Q206534"),
            name: "Stephen Crane".into(),
            entity_type: "human".into(),
        },
        [
            KnowledgeTriple::new("Q206534", "religion", "atheism"),
            KnowledgeTriple::new("Q206534", "notable works", "The Red Badge of Courage"),
            KnowledgeTriple::new("Q206534", "alma mater", "Syracuse University"),
        ],
    )
    .unwrap()
}

fn hertwig_graph() -> SubGraph {
    SubGraph::new(
        Entity {
            id: EntityId::new("Q68753"),
            name: "Oscar Hertwig".into(),
            entity_type: "human".into(),
        },
        [
            KnowledgeTriple::new("Q68753", "doctoral advisor", "Ernst Haeckel"),
            KnowledgeTriple::new("Q68753", "employer", "University of Jena"),
        ],
    )
    .unwrap()
}

pub fn fixture_request() -> GenerationRequest {
    GenerationRequest::new(
        vec![knowledge_entry(&crane_graph()), knowledge_entry(&hertwig_graph())],
        "What were some of Stephen Crane's notable works that reflected his views on religion?",
    )
}

/// Every (file name, assembled prompt) pair the golden check pins.
pub fn assembled_prompts() -> Vec<(&'static str, String)> {
    let question = "What were some of Stephen Crane's notable works?";
    let answer = "His notable works include The Red Badge of Courage [Q206534, notable works: The Red Badge of Courage].";
    vec![
        (
            "generation_prompt.txt",
            assemble_generation_prompt(&fixture_request()),
        ),
        (
            "grading_coherence.txt",
            assemble_grading_prompt(QualityMetric::Coherence, question, answer),
        ),
        (
            "grading_consistency.txt",
            assemble_grading_prompt(QualityMetric::Consistency, question, answer),
        ),
        (
            "grading_fluency.txt",
            assemble_grading_prompt(QualityMetric::Fluency, question, answer),
        ),
        (
            "grading_relevance.txt",
            assemble_grading_prompt(QualityMetric::Relevance, question, answer),
        ),
        (
            "nli_prompt.txt",
            assemble_nli_prompt(
                "Hertwig served as a professor at the University of Jena for the last 40 years of his career.",
                "employer: University of Jena",
            ),
        ),
    ]
}
