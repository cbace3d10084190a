//! File formats and the command line for tactic mining.
//!
//! The algorithms live in [`tdgmine_core`]; this crate reads and writes
//! `.trace` corpora, renders tactics and graphs, and drives everything from
//! the `tdgmine` binary.

pub mod cli;
pub mod dot;
pub mod format;
pub mod ltac;
pub mod split;

pub use format::{emit_corpus, parse_corpus, ParseError};
pub use tdgmine_core as core;
