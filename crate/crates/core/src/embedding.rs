//! Witnesses of label- and slot-preserving embeddings of a pattern graph
//! into a proof TDG, and the collapsibility test that decides whether the
//! image can be contracted into a single tactic call.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::bitset::BitSet;
use crate::model::{Label, Signature};
use crate::tdg::{NodeId, TacticTdg, Tdg};

/// Injective map from pattern nodes (by index) to proof nodes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Witness(pub Vec<NodeId>);

impl Witness {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn image(&self, v: NodeId) -> NodeId {
        self.0[v.index()]
    }

    /// Range as a sorted node list.
    pub fn range(&self) -> Vec<NodeId> {
        let mut r = self.0.clone();
        r.sort();
        r
    }

    pub fn range_bits(&self, universe: usize) -> BitSet {
        let mut b = BitSet::new(universe);
        for n in &self.0 {
            b.insert(n.index());
        }
        b
    }
}

/// Witnesses for one (pattern, proof) pair, sorted and without repeats.
pub type WitnessSet = Vec<Witness>;

/// Reachability, depth and label tables of one proof TDG, computed once and
/// shared by all embedding queries against it.
#[derive(Clone, Debug)]
pub struct ProofIndex<'a> {
    pub gp: &'a Tdg,
    desc: Vec<BitSet>,
    anc: Vec<BitSet>,
    depth: Vec<u32>,
    by_label: BTreeMap<Label, Vec<NodeId>>,
}

impl<'a> ProofIndex<'a> {
    pub fn new(gp: &'a Tdg) -> Self {
        let n = gp.node_count();
        let order = gp.topo_order().expect("proof TDGs are acyclic");
        let mut desc = vec![BitSet::new(n); n];
        let mut anc = vec![BitSet::new(n); n];
        let mut depth = vec![0u32; n];
        for &v in &order {
            for e in gp.in_edges(v).copied().collect::<Vec<_>>() {
                let s = e.src.index();
                depth[v.index()] = depth[v.index()].max(depth[s] + 1);
                let from = anc[s].clone();
                anc[v.index()].union_with(&from);
                anc[v.index()].insert(s);
            }
        }
        for &v in order.iter().rev() {
            for e in gp.out_edges(v).copied().collect::<Vec<_>>() {
                let d = e.dst.index();
                let from = desc[d].clone();
                desc[v.index()].union_with(&from);
                desc[v.index()].insert(d);
            }
        }
        let mut by_label: BTreeMap<Label, Vec<NodeId>> = BTreeMap::new();
        for v in gp.body_ids() {
            by_label.entry(gp.label(v).clone()).or_default().push(v);
        }
        for nodes in by_label.values_mut() {
            nodes.sort_by_key(|v| (depth[v.index()], *v));
        }
        ProofIndex {
            gp,
            desc,
            anc,
            depth,
            by_label,
        }
    }

    /// Strict descendants of `n`.
    pub fn descendants(&self, n: NodeId) -> &BitSet {
        &self.desc[n.index()]
    }

    /// Strict ancestors of `n`.
    pub fn ancestors(&self, n: NodeId) -> &BitSet {
        &self.anc[n.index()]
    }

    pub fn depth(&self, n: NodeId) -> u32 {
        self.depth[n.index()]
    }

    /// Non-root nodes bearing `label`, in (depth, id) order.
    pub fn nodes_with_label(&self, label: &Signature) -> &[NodeId] {
        self.by_label.get(label).map_or(&[], Vec::as_slice)
    }

    pub fn labels(&self) -> impl Iterator<Item = &Label> + '_ {
        self.by_label.keys()
    }

    /// Labels match, `f` is injective and every pattern edge maps to a
    /// proof edge with the same slots.
    pub fn verify(&self, f: &Witness, pattern: &Tdg) -> bool {
        let gp = self.gp;
        if f.len() != pattern.node_count() {
            return false;
        }
        let mut seen = BitSet::new(gp.node_count());
        for (v, &img) in f.0.iter().enumerate() {
            if img.index() >= gp.node_count()
                || Some(img) == gp.root()
                || !seen.insert(img.index())
                || gp.label(img) != pattern.label(NodeId(v as u32))
            {
                return false;
            }
        }
        pattern.edges().iter().all(|e| {
            gp.producer(f.image(e.dst), e.in_slot)
                .is_some_and(|p| p.src == f.image(e.src) && p.out_slot == e.out_slot)
        })
    }

    /// Collapsibility of a verified witness: no path leaves the range and
    /// comes back, and every proof edge inside the range is a pattern edge.
    pub fn is_collapsible(&self, f: &Witness, pattern: &Tdg) -> bool {
        let n = self.gp.node_count();
        let range = f.range_bits(n);
        let mut below = BitSet::new(n);
        let mut above = BitSet::new(n);
        for &v in &f.0 {
            below.union_with(&self.desc[v.index()]);
            above.union_with(&self.anc[v.index()]);
        }
        below.intersect_with(&above);
        below.difference_with(&range);
        if !below.is_empty() {
            return false;
        }
        for (t, &img) in f.0.iter().enumerate() {
            for e in self.gp.in_edges(img) {
                if range.contains(e.src.index())
                    && pattern.producer(NodeId(t as u32), e.in_slot).is_none()
                {
                    return false;
                }
            }
        }
        true
    }

    /// Whether a call of `t` can replace the image: every output used
    /// outside the range is a formal output, and all body slots bound to one
    /// formal input receive the same proof element.
    pub fn fits_interface(&self, f: &Witness, t: &TacticTdg) -> bool {
        let gp = self.gp;
        let range = f.range_bits(gp.node_count());
        for (v, &img) in f.0.iter().enumerate() {
            for e in gp.out_edges(img) {
                if !range.contains(e.dst.index())
                    && t.exit_at(NodeId(v as u32), e.out_slot).is_none()
                {
                    return false;
                }
            }
        }
        let arity = t.signature.inputs.len() as u32;
        (0..arity).all(|formal| {
            let mut feeds = t.entries_for(formal).map(|en| {
                gp.producer(f.image(en.dst), en.in_slot)
                    .map(|p| (p.src, p.out_slot))
            });
            let first = feeds.next();
            first.is_some_and(|x| x.is_some_and(|(s, _)| !range.contains(s.index())))
                && feeds.all(|x| Some(x) == first)
        })
    }

    /// Embeddings acceptable for contraction into a call of `t`.
    pub fn is_contractible(&self, f: &Witness, t: &TacticTdg) -> bool {
        self.verify(f, &t.body) && self.is_collapsible(f, &t.body) && self.fits_interface(f, t)
    }

    /// Enumerates every embedding of `pattern` agreeing with `partial`, in
    /// canonical search order. `visit` returns `false` to stop early.
    pub fn embeddings(
        &self,
        pattern: &Tdg,
        partial: &[Option<NodeId>],
        mut visit: impl FnMut(&Witness) -> bool,
    ) {
        let n = pattern.node_count();
        let mut assign: Vec<Option<NodeId>> = vec![None; n];
        let mut used = BitSet::new(self.gp.node_count());
        for (v, img) in partial.iter().enumerate().take(n) {
            if let Some(img) = *img {
                let ok = img.index() < self.gp.node_count()
                    && Some(img) != self.gp.root()
                    && self.gp.label(img) == pattern.label(NodeId(v as u32))
                    && used.insert(img.index());
                if !ok {
                    return;
                }
                assign[v] = Some(img);
            }
        }
        for e in pattern.edges() {
            if let (Some(s), Some(d)) = (assign[e.src.index()], assign[e.dst.index()]) {
                if !self.edge_ok(s, d, e.out_slot, e.in_slot) {
                    return;
                }
            }
        }
        let plan = search_plan(pattern, &assign);
        let mut st = Search {
            idx: self,
            pattern,
            plan: &plan,
            assign,
            used,
        };
        st.go(0, &mut visit);
    }

    fn edge_ok(&self, s: NodeId, d: NodeId, out_slot: u32, in_slot: u32) -> bool {
        self.gp
            .producer(d, in_slot)
            .is_some_and(|p| p.src == s && p.out_slot == out_slot)
    }

    /// All embeddings of `pattern`, optionally capped.
    pub fn all_embeddings(&self, pattern: &Tdg, cap: Option<usize>) -> WitnessSet {
        let mut out = Vec::new();
        self.embeddings(pattern, &[], |w| {
            out.push(w.clone());
            cap.is_none_or(|c| out.len() < c)
        });
        out.sort();
        out
    }

    /// One single-node witness per proof node bearing `label`.
    pub fn seed_witnesses(&self, label: &Signature) -> WitnessSet {
        let mut ws: WitnessSet = self
            .nodes_with_label(label)
            .iter()
            .map(|&n| Witness(vec![n]))
            .collect();
        ws.sort();
        ws
    }

    /// Witnesses of `g_new` whose first `f.len()` entries agree with `f`.
    pub fn extend_witnesses(&self, f: &Witness, g_new: &Tdg) -> WitnessSet {
        let partial: Vec<Option<NodeId>> = f.0.iter().map(|&n| Some(n)).collect();
        let mut out = Vec::new();
        self.embeddings(g_new, &partial, |w| {
            out.push(w.clone());
            true
        });
        out.sort();
        out
    }

    /// Contractible embeddings of `t` (see [`ProofIndex::is_contractible`]).
    pub fn contractible_witnesses(&self, t: &TacticTdg) -> WitnessSet {
        let mut out = Vec::new();
        self.embeddings(&t.body, &[], |w| {
            if self.is_collapsible(w, &t.body) && self.fits_interface(w, t) {
                out.push(w.clone());
            }
            true
        });
        out.sort();
        out
    }

    /// First contractible witness in search order whose range avoids
    /// `excluded`.
    pub fn find_embedding(&self, t: &TacticTdg, excluded: &[NodeId]) -> Option<Witness> {
        let mut found = None;
        self.embeddings(&t.body, &[], |w| {
            let clear = w.0.iter().all(|n| !excluded.contains(n));
            if clear && self.is_collapsible(w, &t.body) && self.fits_interface(w, t) {
                found = Some(w.clone());
                return false;
            }
            true
        });
        found
    }
}

/// How the next pattern node's candidates are produced.
#[derive(Clone, Copy, Debug)]
enum Step {
    /// Any proof node with the label.
    Free(NodeId),
    /// A consumer of `(image of from, out_slot)` at `in_slot`.
    Child {
        v: NodeId,
        from: NodeId,
        out_slot: u32,
        in_slot: u32,
    },
    /// The producer of `(image of to, in_slot)`.
    Parent {
        v: NodeId,
        to: NodeId,
        out_slot: u32,
        in_slot: u32,
    },
}

impl Step {
    fn node(self) -> NodeId {
        match self {
            Step::Free(v) | Step::Child { v, .. } | Step::Parent { v, .. } => v,
        }
    }
}

/// Undirected breadth-first order over the unassigned pattern nodes,
/// starting each component from its lowest unassigned node.
fn search_plan(pattern: &Tdg, assign: &[Option<NodeId>]) -> Vec<Step> {
    let n = pattern.node_count();
    let mut placed: Vec<bool> = assign.iter().map(Option::is_some).collect();
    let mut plan = Vec::new();
    let mut queue: Vec<NodeId> = (0..n as u32)
        .map(NodeId)
        .filter(|v| placed[v.index()])
        .collect();
    let mut head = 0;
    loop {
        while head < queue.len() {
            let x = queue[head];
            head += 1;
            let mut steps: Vec<Step> = Vec::new();
            for e in pattern.out_edges(x) {
                steps.push(Step::Child {
                    v: e.dst,
                    from: x,
                    out_slot: e.out_slot,
                    in_slot: e.in_slot,
                });
            }
            for e in pattern.in_edges(x) {
                steps.push(Step::Parent {
                    v: e.src,
                    to: x,
                    out_slot: e.out_slot,
                    in_slot: e.in_slot,
                });
            }
            steps.sort_by_key(|s| s.node());
            for s in steps {
                if !placed[s.node().index()] {
                    placed[s.node().index()] = true;
                    plan.push(s);
                    queue.push(s.node());
                }
            }
        }
        match (0..n).find(|&v| !placed[v]) {
            Some(v) => {
                placed[v] = true;
                plan.push(Step::Free(NodeId(v as u32)));
                queue.push(NodeId(v as u32));
            }
            None => return plan,
        }
    }
}

struct Search<'s, 'a> {
    idx: &'s ProofIndex<'a>,
    pattern: &'s Tdg,
    plan: &'s [Step],
    assign: Vec<Option<NodeId>>,
    used: BitSet,
}

impl Search<'_, '_> {
    fn go(&mut self, k: usize, visit: &mut impl FnMut(&Witness) -> bool) -> bool {
        if k == self.plan.len() {
            let w = Witness(self.assign.iter().map(|x| x.expect("complete")).collect());
            return visit(&w);
        }
        let step = self.plan[k];
        let v = step.node();
        let gp = self.idx.gp;
        let mut cands: Vec<NodeId> = match step {
            Step::Free(_) => self.idx.nodes_with_label(self.pattern.label(v)).to_vec(),
            Step::Child {
                from,
                out_slot,
                in_slot,
                ..
            } => {
                let src = self.assign[from.index()].expect("placed");
                gp.out_edges(src)
                    .filter(|e| e.out_slot == out_slot && e.in_slot == in_slot)
                    .map(|e| e.dst)
                    .collect()
            }
            Step::Parent {
                to,
                out_slot,
                in_slot,
                ..
            } => {
                let dst = self.assign[to.index()].expect("placed");
                gp.producer(dst, in_slot)
                    .filter(|e| e.out_slot == out_slot)
                    .map(|e| e.src)
                    .into_iter()
                    .collect()
            }
        };
        if !matches!(step, Step::Free(_)) {
            cands.sort_by_key(|c| (self.idx.depth(*c), *c));
        }
        for c in cands {
            if Some(c) == gp.root()
                || self.used.contains(c.index())
                || gp.label(c) != self.pattern.label(v)
                || !self.consistent(v, c)
            {
                continue;
            }
            self.assign[v.index()] = Some(c);
            self.used.insert(c.index());
            let more = self.go(k + 1, visit);
            self.used.remove(c.index());
            self.assign[v.index()] = None;
            if !more {
                return false;
            }
        }
        true
    }

    /// All pattern edges between `v` and already placed nodes hold for `c`.
    fn consistent(&self, v: NodeId, c: NodeId) -> bool {
        let ok_out = self
            .pattern
            .out_edges(v)
            .all(|e| match self.assign[e.dst.index()] {
                Some(d) => self.idx.edge_ok(c, d, e.out_slot, e.in_slot),
                None => true,
            });
        ok_out
            && self
                .pattern
                .in_edges(v)
                .all(|e| match self.assign[e.src.index()] {
                    Some(s) => self.idx.edge_ok(s, c, e.out_slot, e.in_slot),
                    None => true,
                })
    }
}

/// Label-, edge- and slot-preserving injection check for a tactic body.
pub fn verify_embedding(f: &Witness, g: &TacticTdg, gp: &Tdg) -> bool {
    ProofIndex::new(gp).verify(f, &g.body)
}

pub fn is_collapsible(f: &Witness, g: &TacticTdg, gp: &Tdg) -> bool {
    ProofIndex::new(gp).is_collapsible(f, &g.body)
}

pub fn seed_witnesses(label: &Signature, gp: &Tdg) -> WitnessSet {
    ProofIndex::new(gp).seed_witnesses(label)
}

pub fn extend_witnesses(f: &Witness, g_new: &TacticTdg, gp: &Tdg) -> WitnessSet {
    ProofIndex::new(gp).extend_witnesses(f, &g_new.body)
}

pub fn find_embedding(g: &TacticTdg, gp: &Tdg, excluded: &[NodeId]) -> Option<Witness> {
    ProofIndex::new(gp).find_embedding(g, excluded)
}
