//! Tactic dependence graphs: construction from scripts and tactic
//! definitions, and conversion back to scripts by topological sorting.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;
use core::fmt;

use thiserror::Error;

use crate::model::{
    check_script, ElementId, Failure, Invocation, Kind, Label, ProofScript, Signature, TacticDef,
    TacticDefError, INIT_TACTIC,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub label: Label,
    /// Index of the invocation this node came from, if any.
    pub origin: Option<usize>,
}

/// `src`'s output `out_slot` is `dst`'s input `in_slot`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub src: NodeId,
    pub dst: NodeId,
    pub out_slot: u32,
    pub in_slot: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TdgError {
    #[error("script is not a valid proof: {0:?}")]
    InvalidScript(Failure),
    #[error("invalid tactic definition: {0}")]
    InvalidTactic(#[from] TacticDefError),
    #[error("tactic body is not weakly connected")]
    DisconnectedBody,
    #[error("graph contains a cycle")]
    CyclicGraph,
    #[error("malformed graph: {0}")]
    Malformed(String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Tdg {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
    root: Option<NodeId>,
}

impl Tdg {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, label: Label, origin: Option<usize>) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node { label, origin });
        self.out_adj.push(Vec::new());
        self.in_adj.push(Vec::new());
        id
    }

    /// Adds an edge; an input slot that already has a producer is an error.
    pub fn add_edge(&mut self, e: Edge) -> Result<(), TdgError> {
        if e.src.index() >= self.nodes.len() || e.dst.index() >= self.nodes.len() {
            return Err(TdgError::Malformed(format!(
                "edge {e:?} has an unknown endpoint"
            )));
        }
        if self.producer(e.dst, e.in_slot).is_some() {
            return Err(TdgError::Malformed(format!(
                "input slot {} of {} has two producers",
                e.in_slot, e.dst
            )));
        }
        let i = self.edges.len();
        self.edges.push(e);
        self.out_adj[e.src.index()].push(i);
        self.in_adj[e.dst.index()].push(i);
        Ok(())
    }

    pub fn set_root(&mut self, root: Option<NodeId>) {
        self.root = root;
    }

    /// The synthetic node producing the initial proof state, if present.
    pub fn root(&self) -> Option<NodeId> {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of tactic-application nodes; the synthetic root is excluded.
    pub fn size(&self) -> usize {
        self.nodes.len() - usize::from(self.root.is_some())
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    /// Node ids excluding the root.
    pub fn body_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        let root = self.root;
        self.node_ids().filter(move |n| Some(*n) != root)
    }

    pub fn node(&self, n: NodeId) -> &Node {
        &self.nodes[n.index()]
    }

    pub fn label(&self, n: NodeId) -> &Label {
        &self.nodes[n.index()].label
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn out_edges(&self, n: NodeId) -> impl Iterator<Item = &Edge> + '_ {
        self.out_adj[n.index()].iter().map(move |&i| &self.edges[i])
    }

    pub fn in_edges(&self, n: NodeId) -> impl Iterator<Item = &Edge> + '_ {
        self.in_adj[n.index()].iter().map(move |&i| &self.edges[i])
    }

    pub fn producer(&self, dst: NodeId, in_slot: u32) -> Option<&Edge> {
        self.in_edges(dst).find(|e| e.in_slot == in_slot)
    }

    pub fn has_edge(&self, src: NodeId, dst: NodeId) -> bool {
        self.out_edges(src).any(|e| e.dst == dst)
    }

    /// Kahn order with ties broken by node id.
    pub fn topo_order(&self) -> Result<Vec<NodeId>, TdgError> {
        let keys: Vec<u32> = (0..self.nodes.len() as u32).collect();
        self.topo_order_by(|n| keys[n.index()])
    }

    /// Kahn order, always emitting the ready node of least key.
    pub fn topo_order_by<K: Ord>(
        &self,
        key: impl Fn(NodeId) -> K,
    ) -> Result<Vec<NodeId>, TdgError> {
        let mut indeg: Vec<usize> = self.in_adj.iter().map(Vec::len).collect();
        let mut ready = BinaryHeap::new();
        for n in self.node_ids() {
            if indeg[n.index()] == 0 {
                ready.push(Reverse((key(n), n)));
            }
        }
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some(Reverse((_, n))) = ready.pop() {
            order.push(n);
            for e in self.out_edges(n) {
                let d = &mut indeg[e.dst.index()];
                *d -= 1;
                if *d == 0 {
                    ready.push(Reverse((key(e.dst), e.dst)));
                }
            }
        }
        if order.len() == self.nodes.len() {
            Ok(order)
        } else {
            Err(TdgError::CyclicGraph)
        }
    }

    pub fn is_acyclic(&self) -> bool {
        self.topo_order().is_ok()
    }

    /// Every node reachable (following edges) from `n`, excluding `n`.
    pub fn descendants(&self, n: NodeId) -> Vec<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![n];
        let mut out = Vec::new();
        while let Some(x) = stack.pop() {
            for e in self.out_edges(x) {
                if !seen[e.dst.index()] {
                    seen[e.dst.index()] = true;
                    out.push(e.dst);
                    stack.push(e.dst);
                }
            }
        }
        out.sort();
        out
    }

    /// Whether the graph is connected when edge directions are ignored.
    pub fn is_weakly_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![NodeId(0)];
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            let nbrs = self
                .out_edges(x)
                .map(|e| e.dst)
                .chain(self.in_edges(x).map(|e| e.src));
            for y in nbrs.collect::<Vec<_>>() {
                if !seen[y.index()] {
                    seen[y.index()] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count == self.nodes.len()
    }

    /// Subgraph on `keep` (in the given order) with all edges between them.
    /// Nodes are renumbered by their position in `keep`.
    pub fn induced_subgraph(&self, keep: &[NodeId]) -> Tdg {
        let mut map = vec![None; self.nodes.len()];
        let mut g = Tdg::new();
        for &n in keep {
            let node = self.node(n);
            map[n.index()] = Some(g.add_node(node.label.clone(), node.origin));
        }
        for e in &self.edges {
            if let (Some(s), Some(d)) = (map[e.src.index()], map[e.dst.index()]) {
                g.add_edge(Edge {
                    src: s,
                    dst: d,
                    ..*e
                })
                .expect("subgraph keeps fan-in");
            }
        }
        g
    }

    /// Checks slot ranges, slot kinds and that every input slot is fed.
    pub fn check_wiring(&self) -> Result<(), TdgError> {
        for e in &self.edges {
            let (s, d) = (self.label(e.src), self.label(e.dst));
            let ok = match (
                s.outputs.get(e.out_slot as usize),
                d.inputs.get(e.in_slot as usize),
            ) {
                (Some(a), Some(b)) => a == b,
                _ => false,
            };
            if !ok {
                return Err(TdgError::Malformed(format!(
                    "edge {e:?} does not match slot kinds"
                )));
            }
        }
        for n in self.node_ids() {
            for j in 0..self.label(n).inputs.len() as u32 {
                if self.producer(n, j).is_none() {
                    return Err(TdgError::Malformed(format!(
                        "input slot {j} of {n} is unfed"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Interns signatures so equal labels share one allocation.
#[derive(Default)]
pub(crate) struct LabelCache(BTreeMap<Signature, Label>);

impl LabelCache {
    pub(crate) fn get(&mut self, sig: Signature) -> Label {
        self.0
            .entry(sig.clone())
            .or_insert_with(|| Arc::new(sig))
            .clone()
    }
}

pub fn init_signature(init: &[ElementId]) -> Signature {
    Signature {
        name: INIT_TACTIC.into(),
        inputs: Vec::new(),
        outputs: init.iter().map(|e| e.kind).collect(),
    }
}

/// Builds the TDG of a valid proof. Node 0 is the synthetic root producing
/// the initial state; node `i + 1` is invocation `i`.
pub fn build_proof_tdg(script: &ProofScript) -> Result<(Tdg, BranchInfo), TdgError> {
    let report = check_script(script);
    if let Some(f) = report.failure {
        return Err(TdgError::InvalidScript(f));
    }
    let mut labels = LabelCache::default();
    let mut g = Tdg::new();
    let root = g.add_node(labels.get(init_signature(&script.init)), None);
    g.set_root(Some(root));
    let mut producer: BTreeMap<&str, (NodeId, u32)> = BTreeMap::new();
    for (k, id) in script.init.iter().enumerate() {
        producer.insert(&id.name, (root, k as u32));
    }
    for (i, inv) in script.body.iter().enumerate() {
        let n = g.add_node(labels.get(inv.signature()), Some(i));
        for (j, input) in inv.inputs.iter().enumerate() {
            let (src, out_slot) = producer[input.name.as_str()];
            g.add_edge(Edge {
                src,
                dst: n,
                out_slot,
                in_slot: j as u32,
            })?;
        }
        for (k, out) in inv.outputs.iter().enumerate() {
            producer.insert(&out.name, (n, k as u32));
        }
    }
    let branches = BranchInfo::of(&g)?;
    Ok((g, branches))
}

/// One step of a branch path: the node that spawned several goals and the
/// position of the followed goal among them.
pub type BranchStep = (NodeId, u32);

/// Goal provenance recovered from the graph structure. Each node gets the
/// path of (spawner, sibling) pairs leading to the subgoal it works on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchInfo {
    paths: Vec<Vec<BranchStep>>,
}

impl BranchInfo {
    pub fn of(g: &Tdg) -> Result<Self, TdgError> {
        let order = g.topo_order()?;
        let mut paths: Vec<Vec<BranchStep>> = vec![Vec::new(); g.node_count()];
        let goal_path = |paths: &[Vec<BranchStep>], e: &Edge| {
            let sig = g.label(e.src);
            let mut p = paths[e.src.index()].clone();
            if sig.goal_outputs().count() >= 2 {
                let sib = sig
                    .goal_outputs()
                    .position(|k| k == e.out_slot as usize)
                    .unwrap_or(0);
                p.push((e.src, sib as u32));
            }
            p
        };
        for &n in &order {
            let goal_inputs: Vec<Vec<BranchStep>> = g
                .in_edges(n)
                .filter(|e| g.label(n).inputs.get(e.in_slot as usize) == Some(&Kind::Goal))
                .map(|e| goal_path(&paths, e))
                .collect();
            let p = if let Some(min) = goal_inputs.into_iter().min() {
                min
            } else {
                g.in_edges(n)
                    .map(|e| paths[e.src.index()].clone())
                    .min()
                    .unwrap_or_default()
            };
            paths[n.index()] = p;
        }
        // nodes working only on hypotheses belong to the branch of their consumers
        for &n in order.iter().rev() {
            if g.label(n).consumes_goal() || Some(n) == g.root() {
                continue;
            }
            if let Some(min) = g.out_edges(n).map(|e| paths[e.dst.index()].clone()).min() {
                paths[n.index()] = min;
            }
        }
        Ok(BranchInfo { paths })
    }

    pub fn path(&self, n: NodeId) -> &[BranchStep] {
        &self.paths[n.index()]
    }
}

/// Fresh names `g0, g1, ...` for goals and `H0, H1, ...` for hypotheses.
#[derive(Clone, Debug, Default)]
pub struct NameAllocator {
    goals: usize,
    hyps: usize,
}

impl NameAllocator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh(&mut self, kind: Kind) -> ElementId {
        match kind {
            Kind::Goal => {
                self.goals += 1;
                ElementId::goal(format!("g{}", self.goals - 1))
            }
            Kind::Hypothesis => {
                self.hyps += 1;
                ElementId::hyp(format!("H{}", self.hyps - 1))
            }
        }
    }
}

/// Emits a script whose TDG is `g`. Nodes are ordered topologically by
/// (branch path, original invocation index, node id), so tactics working on
/// the same subgoal stay together.
pub fn induced_proof(
    name: &str,
    g: &Tdg,
    branches: &BranchInfo,
    names: &mut NameAllocator,
) -> Result<ProofScript, TdgError> {
    let root = g
        .root()
        .ok_or_else(|| TdgError::Malformed("graph has no root".into()))?;
    if g.in_edges(root).next().is_some() {
        return Err(TdgError::Malformed("root has incoming edges".into()));
    }
    g.check_wiring()?;
    let order = g.topo_order_by(|n| (n != root, branches.path(n).to_vec(), g.node(n).origin, n))?;
    let mut out_names: Vec<Vec<ElementId>> = vec![Vec::new(); g.node_count()];
    let fresh_outputs = |n: NodeId, names: &mut NameAllocator| -> Vec<ElementId> {
        g.label(n).outputs.iter().map(|&k| names.fresh(k)).collect()
    };
    out_names[root.index()] = fresh_outputs(root, names);
    let mut body = Vec::with_capacity(g.size());
    for &n in &order {
        if n == root {
            continue;
        }
        if g.in_edges(n).next().is_none() {
            return Err(TdgError::Malformed(format!(
                "{n} is not reachable from the root"
            )));
        }
        out_names[n.index()] = fresh_outputs(n, names);
        let sig = g.label(n);
        let inputs = (0..sig.inputs.len() as u32)
            .map(|j| {
                let e = g.producer(n, j).expect("wiring checked");
                out_names[e.src.index()][e.out_slot as usize].clone()
            })
            .collect();
        body.push(Invocation {
            tactic: sig.name.clone(),
            inputs,
            outputs: out_names[n.index()].clone(),
        });
    }
    Ok(ProofScript {
        name: name.into(),
        init: out_names[root.index()].clone(),
        body,
    })
}

/// Formal input `formal` of a tactic feeds input `in_slot` of body node `dst`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntryEdge {
    pub formal: u32,
    pub dst: NodeId,
    pub in_slot: u32,
}

/// Output `out_slot` of body node `src` is formal output `formal`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExitEdge {
    pub src: NodeId,
    pub out_slot: u32,
    pub formal: u32,
}

/// TDG of a tactic definition: the body graph (no root) plus edges from
/// the entry sentinel and to the exit sentinel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TacticTdg {
    pub name: String,
    /// Label given to a node that stands for one call of this tactic.
    pub signature: Label,
    pub body: Tdg,
    pub entry: Vec<EntryEdge>,
    pub exit: Vec<ExitEdge>,
}

impl TacticTdg {
    pub fn size(&self) -> usize {
        self.body.size()
    }

    pub fn entries_for(&self, formal: u32) -> impl Iterator<Item = &EntryEdge> + '_ {
        self.entry.iter().filter(move |e| e.formal == formal)
    }

    /// Where formal input slot `(dst, in_slot)` comes from, if it is one.
    pub fn entry_at(&self, dst: NodeId, in_slot: u32) -> Option<&EntryEdge> {
        self.entry
            .iter()
            .find(|e| e.dst == dst && e.in_slot == in_slot)
    }

    pub fn exit_at(&self, src: NodeId, out_slot: u32) -> Option<&ExitEdge> {
        self.exit
            .iter()
            .find(|e| e.src == src && e.out_slot == out_slot)
    }
}

pub fn build_tactic_tdg(def: &TacticDef) -> Result<TacticTdg, TdgError> {
    def.validate_dataflow()?;
    let mut labels = LabelCache::default();
    let mut body = Tdg::new();
    let formal_in: BTreeMap<&str, u32> = def
        .inputs
        .iter()
        .enumerate()
        .map(|(i, e)| (e.name.as_str(), i as u32))
        .collect();
    let mut producer: BTreeMap<&str, (NodeId, u32)> = BTreeMap::new();
    let mut entry = Vec::new();
    for (i, inv) in def.body.iter().enumerate() {
        let n = body.add_node(labels.get(inv.signature()), Some(i));
        for (j, input) in inv.inputs.iter().enumerate() {
            let j = j as u32;
            match producer.get(input.name.as_str()) {
                Some(&(src, out_slot)) => body.add_edge(Edge {
                    src,
                    dst: n,
                    out_slot,
                    in_slot: j,
                })?,
                None => entry.push(EntryEdge {
                    formal: formal_in[input.name.as_str()],
                    dst: n,
                    in_slot: j,
                }),
            }
        }
        for (k, out) in inv.outputs.iter().enumerate() {
            producer.insert(&out.name, (n, k as u32));
        }
    }
    if !body.is_weakly_connected() {
        return Err(TdgError::DisconnectedBody);
    }
    let exit = def
        .outputs
        .iter()
        .enumerate()
        .map(|(l, o)| {
            let (src, out_slot) = producer[o.name.as_str()];
            ExitEdge {
                src,
                out_slot,
                formal: l as u32,
            }
        })
        .collect();
    Ok(TacticTdg {
        name: def.name.clone(),
        signature: Arc::new(def.signature()),
        body,
        entry,
        exit,
    })
}
