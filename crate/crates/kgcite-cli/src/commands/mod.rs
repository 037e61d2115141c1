//! The six subcommands. Each returns its per-item failure count; the binary
//! exits non-zero iff that count is non-zero (or loading failed outright).

pub mod ablate_na;
pub mod ablate_retrieval;
pub mod construct;
pub mod evaluate;
pub mod generate;
pub mod retrieve;
