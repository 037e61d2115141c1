//! Library side of the `kgcite` binary: run configuration, judge wiring, the
//! six subcommands, and deterministic fixture-corpus builders. Everything the
//! binary does is callable from here, which is how the acceptance suite
//! drives the harnesses in-process.

pub mod commands;
pub mod config;
pub mod judges;
pub mod manifest;
pub mod runner;
pub mod synth;

pub use config::RunConfig;
pub use runner::RunContext;
