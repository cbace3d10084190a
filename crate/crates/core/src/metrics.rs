//! Corpus statistics, compression power and train/test evaluation.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::discovery::{learn_library_with, Compression, Config, DiscoveryError};
use crate::model::{Corpus, TacticDef};
use crate::peano::{peano_learn_library, peano_refactor_corpus, PeanoConfig};
use crate::refactor::refactor_corpus_with_outcomes;

/// A non-negative fraction kept exact; printed rounded half up to two decimals.
#[derive(Clone, Copy, Debug)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    /// `None` when the denominator is zero.
    pub fn new(num: u64, den: u64) -> Option<Ratio> {
        (den != 0).then_some(Ratio { num, den })
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Value times 100, rounded half up.
    pub fn hundredths(self) -> u64 {
        (self.num * 200 + self.den) / (2 * self.den)
    }
}

impl PartialEq for Ratio {
    fn eq(&self, other: &Ratio) -> bool {
        self.num as u128 * other.den as u128 == other.num as u128 * self.den as u128
    }
}

impl Eq for Ratio {}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = self.hundredths();
        write!(f, "{}.{:02}", h / 100, h % 100)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CorpusStats {
    pub proofs: usize,
    pub invocations: usize,
}

impl CorpusStats {
    pub fn of(corpus: &Corpus) -> CorpusStats {
        CorpusStats {
            proofs: corpus.proofs.len(),
            invocations: corpus.size(),
        }
    }

    /// Invocations per proof; `None` for an empty corpus.
    pub fn mean(&self) -> Option<Ratio> {
        Ratio::new(self.invocations as u64, self.proofs as u64)
    }
}

/// Size before refactoring over size after.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompressionPower {
    Finite(Ratio),
    /// Something was compressed to nothing.
    Infinite,
}

impl CompressionPower {
    pub fn from_sizes(before: usize, after: usize) -> CompressionPower {
        match (before, after) {
            (0, 0) => CompressionPower::Finite(Ratio { num: 1, den: 1 }),
            (_, 0) => CompressionPower::Infinite,
            (b, a) => CompressionPower::Finite(Ratio {
                num: b as u64,
                den: a as u64,
            }),
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            CompressionPower::Finite(r) => r.to_f64(),
            CompressionPower::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for CompressionPower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompressionPower::Finite(r) => r.fmt(f),
            CompressionPower::Infinite => f.write_str("inf"),
        }
    }
}

/// Compression power of a refactoring. Tactic definitions cost nothing here;
/// see [`LibraryReport::definition_overhead`].
pub fn compression_power(before: &Corpus, after: &Corpus) -> CompressionPower {
    CompressionPower::from_sizes(before.size(), after.size())
}

/// Calls of any tactic in `names` across the proofs of `corpus`.
pub fn usage_count(corpus: &Corpus, names: &BTreeSet<&str>) -> usize {
    corpus
        .proofs
        .iter()
        .flat_map(|p| &p.body)
        .filter(|i| names.contains(i.tactic.as_str()))
        .count()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LibraryReport {
    pub tactics: usize,
    /// `None` when no tactic was learned.
    pub mean_size: Option<Ratio>,
    pub max_size: usize,
    /// Calls of learned tactics left in the refactored proofs.
    pub usage: usize,
    pub size_before: usize,
    pub size_after: usize,
    pub compression_power: CompressionPower,
    /// Total body size of the learned definitions.
    pub definition_overhead: usize,
}

impl LibraryReport {
    pub fn new(lib: &[TacticDef], before: &Corpus, after: &Corpus) -> LibraryReport {
        let names: BTreeSet<&str> = lib.iter().map(|t| t.name.as_str()).collect();
        let total: usize = lib.iter().map(TacticDef::size).sum();
        LibraryReport {
            tactics: lib.len(),
            mean_size: Ratio::new(total as u64, lib.len() as u64),
            max_size: lib.iter().map(TacticDef::size).max().unwrap_or(0),
            usage: usage_count(after, &names),
            size_before: before.size(),
            size_after: after.size(),
            compression_power: compression_power(before, after),
            definition_overhead: total,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Baseline {
    #[default]
    Tdg,
    Peano,
}

#[derive(Clone, Debug, Default)]
pub struct EvalConfig {
    pub discovery: Config,
    pub peano: PeanoConfig,
    pub baseline: Baseline,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation {
    /// Tactics learned from the training split, in order.
    pub tactics: Vec<TacticDef>,
    /// The test split after refactoring.
    pub refactored: Corpus,
    /// Calls inserted into the test split, per tactic.
    pub applications: Vec<usize>,
    pub report: LibraryReport,
}

impl Evaluation {
    pub fn tactic_names(&self) -> Vec<String> {
        self.tactics.iter().map(|t| t.name.clone()).collect()
    }
}

/// Learns a library on `train` and measures how well it compresses `test`.
pub fn evaluate(
    train: &Corpus,
    test: &Corpus,
    cfg: &EvalConfig,
) -> Result<Evaluation, DiscoveryError> {
    evaluate_with(train, test, cfg, &mut || false)
}

/// [`evaluate`] whose tactic search ends early once `should_stop` says so.
pub fn evaluate_with(
    train: &Corpus,
    test: &Corpus,
    cfg: &EvalConfig,
    should_stop: &mut dyn FnMut() -> bool,
) -> Result<Evaluation, DiscoveryError> {
    let (tactics, refactored, applications) = match cfg.baseline {
        Baseline::Tdg => {
            let lib = learn_library_with(train, &cfg.discovery, &Compression, should_stop)?;
            let mut current = test.clone();
            let mut applications = Vec::with_capacity(lib.tactics.len());
            for t in &lib.tactics {
                let (next, outcomes) = refactor_corpus_with_outcomes(t, &current)?;
                applications.push(outcomes.iter().map(|o| o.applications).sum());
                current = next;
            }
            (lib.tactics, current, applications)
        }
        Baseline::Peano => {
            let lib = peano_learn_library(train, &cfg.peano);
            let (refactored, applications) = peano_refactor_corpus(test, &lib, &cfg.peano);
            (lib.tactics, refactored, applications)
        }
    };
    let report = LibraryReport::new(&tactics, test, &refactored);
    Ok(Evaluation {
        tactics,
        refactored,
        applications,
        report,
    })
}
