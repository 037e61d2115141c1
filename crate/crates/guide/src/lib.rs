//! The narrative guide, compiled as rustdoc so `cargo test --doc -p
//! kgcite-guide` runs every code block in `book/src`. mdbook itself cannot
//! execute snippets against workspace crates, so the chapters double as doc
//! comments here — one module per chapter, which also makes a failing
//! snippet name its chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/knowledge-store.md")]
pub mod knowledge_store {}

#[doc = include_str!("../../../book/src/citation-markup.md")]
pub mod citation_markup {}

#[doc = include_str!("../../../book/src/retrieval.md")]
pub mod retrieval {}

#[doc = include_str!("../../../book/src/metrics.md")]
pub mod metrics {}

#[doc = include_str!("../../../book/src/judges.md")]
pub mod judges {}

#[doc = include_str!("../../../book/src/question-generation.md")]
pub mod question_generation {}

#[doc = include_str!("../../../book/src/ablations.md")]
pub mod ablations {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
