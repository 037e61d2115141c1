//! Knowledge-graph-grounded answer attribution.
//!
//! Everything needed to run a KG-citation benchmark end to end:
//!
//! - [`store`] — a local one-hop triple store with name indexes, plus the
//!   knowledge-removal and retrieval-corruption transforms.
//! - [`retrieval`] — question → subgraph pipeline: mention extraction and
//!   neighbor-overlap re-ranking for namesake disambiguation.
//! - [`citation`] — parser and renderer for inline bracket citations
//!   (`[Q212657, place of birth: Rome]`) and the `[NA]` knowledge-gap marker.
//! - [`metrics`] — citation correctness, precision/recall/F1 (micro and
//!   macro), entailment-based text-citation alignment, and `[NA]`
//!   precision/recall.
//! - [`judges`] — OpenAI-compatible clients and deterministic mocks for
//!   generation, entailment, and text grading, plus the prompt assets.
//! - [`questiongen`] — the evolutionary dataset-construction pipeline with
//!   its specificity/coherence knowledge-selection score.
//!
//! The companion `kgcite` binary wires these into subcommands and the two
//! ablation harnesses; the `book/` guide walks through the concepts chapter
//! by chapter.

pub mod citation;
pub mod dataset;
pub mod judges;
pub mod metrics;
pub mod questiongen;
pub mod report;
pub mod retrieval;
pub mod rng;
pub mod store;

pub use citation::{parse_answer, render_answer, segment_sentences, strip_citations, AttributedAnswer, Citation, Sentence};
pub use metrics::{aggregate, CorpusReport, EvalOptions, MinKnowledgeSet};
pub use store::{Entity, EntityId, KnowledgeStore, KnowledgeTriple, StoreFormat, SubGraph};
