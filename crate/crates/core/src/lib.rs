//! Tactic dependence graphs and tactic library learning.
//!
//! Proofs are sequences of tactic invocations with explicit proof-element
//! flow. This crate builds the dependence graph of a proof, finds collapsible
//! embeddings of tactic bodies inside it, rewrites proofs with custom tactics
//! and searches a corpus for the tactic that compresses it the most.
//!
//! The crate is `no_std` and only needs `alloc`. Text formats, file IO and the
//! command line live in the `tdgmine` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bitset;
pub mod canon;
pub mod discovery;
pub mod embedding;
pub mod metrics;
pub mod model;
pub mod peano;
pub mod refactor;
pub mod tdg;

pub use discovery::{learn_library, learn_tactic, Config, Library};
pub use embedding::{Witness, WitnessSet};
pub use model::{
    check_script, Corpus, ElementId, Invocation, Kind, ProofScript, Signature, TacticDef,
    ValidationReport,
};
pub use refactor::{refactor, refactor_corpus, RefactorOutcome};
pub use tdg::{build_proof_tdg, build_tactic_tdg, induced_proof, NodeId, TacticTdg, Tdg};
