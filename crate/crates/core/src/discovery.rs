//! Tactic discovery: a graph grammar mined from the corpus drives a
//! top-down search over tactic candidates, pruned by an upper bound on the
//! compression any extension of a candidate can achieve.

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use thiserror::Error;

use crate::bitset::BitSet;
use crate::canon::{canonical_form, canonical_labeling, CanonForm};
use crate::embedding::{ProofIndex, Witness, WitnessSet};
use crate::model::{Corpus, ElementId, Invocation, Kind, Label, TacticDef};
use crate::refactor::{refactor_corpus_with_outcomes, select_disjoint, RefactorError};
use crate::tdg::{build_proof_tdg, BranchInfo, Edge, NameAllocator, NodeId, Tdg, TdgError};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DiscoveryError {
    #[error(transparent)]
    Graph(#[from] TdgError),
    #[error(transparent)]
    Refactor(#[from] RefactorError),
}

/// `src` feeds `dst` through exactly the slot pairs `theta`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Production {
    pub src: Label,
    pub dst: Label,
    /// Sorted `(out_slot, in_slot)` pairs.
    pub theta: Vec<(u32, u32)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Grammar {
    pub productions: BTreeSet<Production>,
}

impl Grammar {
    pub fn from_src<'a>(&'a self, src: &'a Label) -> impl Iterator<Item = &'a Production> + 'a {
        self.productions.iter().filter(move |p| &p.src == src)
    }

    pub fn sources(&self) -> BTreeSet<&Label> {
        self.productions.iter().map(|p| &p.src).collect()
    }

    pub fn len(&self) -> usize {
        self.productions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.productions.is_empty()
    }
}

/// One production per adjacent node pair, carrying the full set of slot
/// pairs between them. Edges out of the synthetic root are ignored.
pub fn learn_grammar(tdgs: &[Tdg]) -> Grammar {
    let mut productions = BTreeSet::new();
    for g in tdgs {
        for s in g.body_ids() {
            let mut by_dst: BTreeMap<NodeId, Vec<(u32, u32)>> = BTreeMap::new();
            for e in g.out_edges(s) {
                by_dst
                    .entry(e.dst)
                    .or_default()
                    .push((e.out_slot, e.in_slot));
            }
            for (d, mut theta) in by_dst {
                theta.sort_unstable();
                productions.insert(Production {
                    src: g.label(s).clone(),
                    dst: g.label(d).clone(),
                    theta,
                });
            }
        }
    }
    Grammar { productions }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WorklistOrder {
    /// Highest upper bound first.
    #[default]
    BestFirst,
    Fifo,
    Lifo,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config {
    /// Least number of disjoint occurrences a tactic needs.
    pub min_frequency: usize,
    /// Least number of proof steps a tactic must save.
    pub min_effectiveness: usize,
    pub max_tactic_size: Option<usize>,
    pub max_tactics: Option<usize>,
    /// Stop the search after this many candidates have been explored.
    pub max_candidates: Option<usize>,
    /// Keep at most this many witnesses per candidate and proof.
    pub max_witnesses: Option<usize>,
    pub order: WorklistOrder,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            min_frequency: 2,
            min_effectiveness: 1,
            max_tactic_size: None,
            max_tactics: None,
            max_candidates: None,
            max_witnesses: None,
            order: WorklistOrder::BestFirst,
        }
    }
}

/// Aggregate numbers about a candidate that scoring functions may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CandidateStats {
    pub size: usize,
    /// Disjoint collapsible occurrences, summed over proofs.
    pub frequency: usize,
    /// Distinct images of the seed node, summed over proofs.
    pub support: usize,
    /// Number of proof nodes below distinct seed images, summed over proofs.
    pub descendant_bound: usize,
}

/// A search objective: a score and a bound on the score of any extension.
pub trait Objective {
    fn score(&self, c: &CandidateStats) -> usize;
    fn upper_bound(&self, c: &CandidateStats) -> usize;
}

/// Number of proof steps saved by refactoring with the candidate.
#[derive(Clone, Copy, Debug, Default)]
pub struct Compression;

impl Objective for Compression {
    fn score(&self, c: &CandidateStats) -> usize {
        c.size.saturating_sub(1) * c.frequency
    }

    fn upper_bound(&self, c: &CandidateStats) -> usize {
        c.descendant_bound
    }
}

/// A tactic body in progress with every embedding of it into each proof.
#[derive(Clone, Debug)]
pub struct Candidate {
    /// Pattern graph; node 0 is the seed and every node descends from it.
    pub graph: Tdg,
    pub canon: CanonForm,
    /// Witnesses per proof, in corpus order.
    pub witnesses: Vec<WitnessSet>,
    pub stats: CandidateStats,
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub best: Option<Candidate>,
    pub score: usize,
    pub explored: usize,
    pub pruned: usize,
    /// The search stopped early because a budget ran out.
    pub truncated: bool,
}

/// Prepared corpus: TDGs and their indexes.
pub struct Miner<'a> {
    indexes: Vec<ProofIndex<'a>>,
    grammar: Grammar,
    cfg: &'a Config,
}

/// Builds the TDG of every proof.
pub fn corpus_tdgs(corpus: &Corpus) -> Result<Vec<Tdg>, TdgError> {
    corpus
        .proofs
        .iter()
        .map(|p| build_proof_tdg(p).map(|(g, _)| g))
        .collect()
}

impl<'a> Miner<'a> {
    pub fn new(tdgs: &'a [Tdg], cfg: &'a Config) -> Self {
        Miner {
            indexes: tdgs.iter().map(ProofIndex::new).collect(),
            grammar: learn_grammar(tdgs),
            cfg,
        }
    }

    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    fn candidate(&self, graph: Tdg, witnesses: Vec<WitnessSet>, canon: CanonForm) -> Candidate {
        let stats = self.stats(&graph, &witnesses);
        Candidate {
            graph,
            canon,
            witnesses,
            stats,
        }
    }

    fn stats(&self, graph: &Tdg, witnesses: &[WitnessSet]) -> CandidateStats {
        let mut frequency = 0;
        let mut support = 0;
        let mut descendant_bound = 0;
        for (idx, ws) in self.indexes.iter().zip(witnesses) {
            let seeds = seed_images(ws, idx.gp.node_count());
            support += seeds.count();
            descendant_bound += seeds
                .iter()
                .map(|s| idx.descendants(NodeId(s as u32)).count())
                .sum::<usize>();
            frequency += disjoint_frequency(idx, graph, ws);
        }
        CandidateStats {
            size: graph.node_count(),
            frequency,
            support,
            descendant_bound,
        }
    }

    /// Single-node candidates for every grammar source label occurring at
    /// least `min_frequency` times.
    pub fn init_worklist(&self) -> Vec<Candidate> {
        let mut out = Vec::new();
        for label in self.grammar.sources() {
            let mut graph = Tdg::new();
            graph.add_node(label.clone(), None);
            let witnesses: Vec<WitnessSet> = self
                .indexes
                .iter()
                .map(|idx| idx.seed_witnesses(label))
                .collect();
            let support: usize = witnesses.iter().map(Vec::len).sum();
            if support < self.cfg.min_frequency {
                continue;
            }
            let canon = canonical_form(&graph);
            out.push(self.candidate(graph, witnesses, canon));
        }
        out
    }

    /// Adds the edges `theta` from pattern node `v` to `target` (a fresh
    /// node labeled `p.dst` when `None`). Returns the grown graph, or `None`
    /// when the edges cannot be added.
    pub fn grow(c: &Tdg, v: NodeId, target: Option<NodeId>, p: &Production) -> Option<Tdg> {
        let mut g = c.clone();
        let t = match target {
            Some(t) => {
                if t == v || c.label(t) != &p.dst || c.has_edge(v, t) || c.has_edge(t, v) {
                    return None;
                }
                if c.descendants(t).contains(&v) {
                    return None;
                }
                t
            }
            None => g.add_node(p.dst.clone(), None),
        };
        for &(out_slot, in_slot) in &p.theta {
            g.add_edge(Edge {
                src: v,
                dst: t,
                out_slot,
                in_slot,
            })
            .ok()?;
        }
        Some(g)
    }

    /// Extends every stored witness to `graph`; `None` unless the seed
    /// still occurs at least `min_frequency` times.
    pub fn apply(&self, c: &Candidate, graph: Tdg, canon: CanonForm) -> Option<Candidate> {
        let mut witnesses = Vec::with_capacity(c.witnesses.len());
        let mut support = 0;
        for (idx, ws) in self.indexes.iter().zip(&c.witnesses) {
            let mut ext: WitnessSet = Vec::new();
            for f in ws {
                ext.extend(idx.extend_witnesses(f, &graph));
                if self.cfg.max_witnesses.is_some_and(|cap| ext.len() >= cap) {
                    ext.truncate(self.cfg.max_witnesses.unwrap_or(usize::MAX));
                    break;
                }
            }
            ext.sort();
            ext.dedup();
            support += seed_images(&ext, idx.gp.node_count()).count();
            witnesses.push(ext);
        }
        if support < self.cfg.min_frequency {
            return None;
        }
        Some(self.candidate(graph, witnesses, canon))
    }

    /// Every candidate obtained by applying one production at one node,
    /// deduplicated by canonical form and skipping forms in `visited`.
    pub fn expand(&self, c: &Candidate, visited: &mut BTreeSet<CanonForm>) -> Vec<Candidate> {
        let mut out = Vec::new();
        let size = c.graph.node_count();
        for v in c.graph.node_ids() {
            for p in self.grammar.from_src(c.graph.label(v)) {
                let mut targets: Vec<Option<NodeId>> = c
                    .graph
                    .node_ids()
                    .filter(|&t| c.graph.label(t) == &p.dst)
                    .map(Some)
                    .collect();
                if self.cfg.max_tactic_size.is_none_or(|m| size < m) {
                    targets.push(None);
                }
                for t in targets {
                    let Some(g) = Self::grow(&c.graph, v, t, p) else {
                        continue;
                    };
                    let canon = canonical_form(&g);
                    if !visited.insert(canon.clone()) {
                        continue;
                    }
                    if let Some(next) = self.apply(c, g, canon) {
                        out.push(next);
                    }
                }
            }
        }
        out
    }

    pub fn search(
        &self,
        objective: &dyn Objective,
        should_stop: &mut dyn FnMut() -> bool,
    ) -> SearchResult {
        let cfg = self.cfg;
        let mut visited: BTreeSet<CanonForm> = BTreeSet::new();
        let mut list = Worklist::new(cfg.order);
        for c in self.init_worklist() {
            visited.insert(c.canon.clone());
            let ub = objective.upper_bound(&c.stats);
            list.push(ub, c);
        }
        let mut result = SearchResult {
            best: None,
            score: 0,
            explored: 0,
            pruned: 0,
            truncated: false,
        };
        while let Some((ub, c)) = list.pop() {
            let threshold = if result.best.is_some() {
                result.score
            } else {
                cfg.min_effectiveness
            };
            if ub < threshold {
                result.pruned += 1;
                continue;
            }
            if should_stop() || cfg.max_candidates.is_some_and(|m| result.explored >= m) {
                result.truncated = true;
                break;
            }
            result.explored += 1;
            let score = objective.score(&c.stats);
            let qualifies = c.stats.size >= 2
                && c.stats.frequency >= cfg.min_frequency
                && score >= cfg.min_effectiveness;
            if qualifies {
                let better = match &result.best {
                    None => true,
                    Some(b) => score > result.score || (score == result.score && c.canon < b.canon),
                };
                if better {
                    result.score = score;
                    result.best = Some(c.clone());
                }
            }
            for next in self.expand(&c, &mut visited) {
                let ub = objective.upper_bound(&next.stats);
                list.push(ub, next);
            }
        }
        result
    }
}

fn seed_images(ws: &[Witness], universe: usize) -> BitSet {
    let mut b = BitSet::new(universe);
    for w in ws {
        if let Some(s) = w.0.first() {
            b.insert(s.index());
        }
    }
    b
}

/// Size of a largest set of collapsible witnesses that can be contracted
/// together.
pub fn disjoint_frequency(idx: &ProofIndex<'_>, pattern: &Tdg, ws: &[Witness]) -> usize {
    let collapsible: Vec<Witness> = ws
        .iter()
        .filter(|w| idx.is_collapsible(w, pattern))
        .cloned()
        .collect();
    if collapsible.len() <= 1 {
        return collapsible.len();
    }
    select_disjoint(&collapsible, idx.gp).len()
}

/// The subgraph of `gp` induced on the source of `image` and all its
/// descendants.
pub fn max_extend(image: &[NodeId], gp: &Tdg) -> Tdg {
    let Some(&source) = image
        .iter()
        .find(|&&n| gp.in_edges(n).all(|e| !image.contains(&e.src)))
    else {
        return Tdg::new();
    };
    let mut keep = vec![source];
    keep.extend(gp.descendants(source));
    keep.sort();
    gp.induced_subgraph(&keep)
}

struct Entry {
    ub: usize,
    canon: CanonForm,
    c: Candidate,
}

impl PartialEq for Entry {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Entry {
    fn cmp(&self, o: &Self) -> Ordering {
        (self.ub, Reverse(&self.canon)).cmp(&(o.ub, Reverse(&o.canon)))
    }
}

enum Worklist {
    Heap(BinaryHeap<Entry>),
    Queue(VecDeque<(usize, Candidate)>, bool),
}

impl Worklist {
    fn new(order: WorklistOrder) -> Self {
        match order {
            WorklistOrder::BestFirst => Worklist::Heap(BinaryHeap::new()),
            WorklistOrder::Fifo => Worklist::Queue(VecDeque::new(), false),
            WorklistOrder::Lifo => Worklist::Queue(VecDeque::new(), true),
        }
    }

    fn push(&mut self, ub: usize, c: Candidate) {
        match self {
            Worklist::Heap(h) => h.push(Entry {
                ub,
                canon: c.canon.clone(),
                c,
            }),
            Worklist::Queue(q, _) => q.push_back((ub, c)),
        }
    }

    fn pop(&mut self) -> Option<(usize, Candidate)> {
        match self {
            Worklist::Heap(h) => h.pop().map(|e| (e.ub, e.c)),
            Worklist::Queue(q, lifo) => {
                if *lifo {
                    q.pop_back()
                } else {
                    q.pop_front()
                }
            }
        }
    }
}

/// Turns a pattern into a tactic definition. Isomorphic patterns give
/// equal definitions. Body steps follow a topological order that keeps each
/// branch together; every input slot not fed inside the body becomes its own
/// formal input, and every hypothesis output plus every goal left open
/// becomes a formal output.
pub fn materialize(name: &str, pattern: &Tdg) -> TacticDef {
    let (_, canon_order) = canonical_labeling(pattern);
    let pattern = &pattern.induced_subgraph(&canon_order);
    let branches = BranchInfo::of(pattern).expect("patterns are acyclic");
    let order = pattern
        .topo_order_by(|v| (branches.path(v).to_vec(), v))
        .expect("patterns are acyclic");
    let mut names = NameAllocator::new();
    let mut inputs = Vec::new();
    let mut formal_of: BTreeMap<(NodeId, u32), ElementId> = BTreeMap::new();
    for &v in &order {
        for (j, &k) in pattern.label(v).inputs.iter().enumerate() {
            if pattern.producer(v, j as u32).is_none() {
                let id = names.fresh(k);
                formal_of.insert((v, j as u32), id.clone());
                inputs.push(id);
            }
        }
    }
    let mut out_names: BTreeMap<NodeId, Vec<ElementId>> = BTreeMap::new();
    let mut body = Vec::new();
    let mut outputs = Vec::new();
    for &v in &order {
        let sig = pattern.label(v);
        let outs: Vec<ElementId> = sig.outputs.iter().map(|&k| names.fresh(k)).collect();
        let ins = (0..sig.inputs.len() as u32)
            .map(|j| match pattern.producer(v, j) {
                Some(e) => out_names[&e.src][e.out_slot as usize].clone(),
                None => formal_of[&(v, j)].clone(),
            })
            .collect();
        for (k, id) in outs.iter().enumerate() {
            let consumed = pattern.out_edges(v).any(|e| e.out_slot == k as u32);
            if id.kind == Kind::Hypothesis || !consumed {
                outputs.push(id.clone());
            }
        }
        body.push(Invocation {
            tactic: sig.name.clone(),
            inputs: ins,
            outputs: outs.clone(),
        });
        out_names.insert(v, outs);
    }
    TacticDef {
        name: name.into(),
        inputs,
        outputs,
        body,
    }
}

/// `custom0`, `custom1`, ... skipping names already used in `corpus`.
pub fn fresh_tactic_name(corpus: &Corpus) -> String {
    let used = corpus.tactic_names();
    (0..)
        .map(|i| format!("custom{i}"))
        .find(|n| !used.contains(n.as_str()))
        .expect("unbounded")
}

/// A tactic found by [`learn_tactic_with`] and the numbers behind it.
#[derive(Clone, Debug)]
pub struct Learned {
    pub tactic: TacticDef,
    pub effectiveness: usize,
    pub frequency: usize,
    pub explored: usize,
    pub pruned: usize,
    pub truncated: bool,
}

pub fn learn_tactic_with(
    corpus: &Corpus,
    cfg: &Config,
    objective: &dyn Objective,
    should_stop: &mut dyn FnMut() -> bool,
) -> Result<Option<Learned>, DiscoveryError> {
    let tdgs = corpus_tdgs(corpus)?;
    let miner = Miner::new(&tdgs, cfg);
    let r = miner.search(objective, should_stop);
    Ok(r.best.map(|c| Learned {
        tactic: materialize(&fresh_tactic_name(corpus), &c.graph),
        effectiveness: r.score,
        frequency: c.stats.frequency,
        explored: r.explored,
        pruned: r.pruned,
        truncated: r.truncated,
    }))
}

/// The tactic saving the most proof steps, if any saves `min_effectiveness`.
pub fn learn_tactic(corpus: &Corpus, cfg: &Config) -> Result<Option<TacticDef>, DiscoveryError> {
    Ok(learn_tactic_with(corpus, cfg, &Compression, &mut || false)?.map(|l| l.tactic))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LibraryStep {
    pub name: String,
    pub effectiveness: usize,
    pub frequency: usize,
    pub size_before: usize,
    pub size_after: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Library {
    /// Learned tactics in discovery order.
    pub tactics: Vec<TacticDef>,
    /// The input corpus refactored with every learned tactic.
    pub corpus: Corpus,
    pub steps: Vec<LibraryStep>,
    pub truncated: bool,
}

/// Alternates learning a tactic and refactoring the corpus with it until no
/// tactic qualifies or `max_tactics` is reached.
pub fn learn_library(corpus: &Corpus, cfg: &Config) -> Result<Library, DiscoveryError> {
    learn_library_with(corpus, cfg, &Compression, &mut || false)
}

pub fn learn_library_with(
    corpus: &Corpus,
    cfg: &Config,
    objective: &dyn Objective,
    should_stop: &mut dyn FnMut() -> bool,
) -> Result<Library, DiscoveryError> {
    let mut current = corpus.clone();
    let mut tactics = Vec::new();
    let mut steps = Vec::new();
    let mut truncated = false;
    while cfg.max_tactics.is_none_or(|m| tactics.len() < m) {
        let Some(l) = learn_tactic_with(&current, cfg, objective, should_stop)? else {
            break;
        };
        truncated |= l.truncated;
        let size_before = current.size();
        let (next, _) = refactor_corpus_with_outcomes(&l.tactic, &current)?;
        let size_after = next.size();
        if size_after >= size_before {
            break;
        }
        steps.push(LibraryStep {
            name: l.tactic.name.clone(),
            effectiveness: l.effectiveness,
            frequency: l.frequency,
            size_before,
            size_after,
        });
        tactics.push(l.tactic);
        current = next;
        if l.truncated {
            break;
        }
    }
    Ok(Library {
        tactics,
        corpus: current,
        steps,
        truncated,
    })
}
