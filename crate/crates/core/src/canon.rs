//! Canonical forms for labeled DAGs: two graphs are isomorphic (labels and
//! edge slots preserved) iff their canonical forms are equal.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::model::Label;
use crate::tdg::{NodeId, Tdg};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonForm {
    pub labels: Vec<Label>,
    /// `[src, dst, out_slot, in_slot]` in canonical positions, sorted.
    pub edges: Vec<[u32; 4]>,
}

pub fn canonical_form(g: &Tdg) -> CanonForm {
    canonical_labeling(g).0
}

/// The canonical form together with the node placed at each position.
pub fn canonical_labeling(g: &Tdg) -> (CanonForm, Vec<NodeId>) {
    let n = g.node_count();
    let mut distinct: Vec<&Label> = g.node_ids().map(|v| g.label(v)).collect();
    distinct.sort();
    distinct.dedup();
    let colors: Vec<u32> = g
        .node_ids()
        .map(|v| distinct.binary_search(&g.label(v)).unwrap() as u32)
        .collect();
    let colors = refine(g, colors);
    let mut best: Option<(CanonForm, Vec<NodeId>)> = None;
    search(g, colors, &mut best);
    let (form, order) = best.unwrap_or((
        CanonForm {
            labels: Vec::new(),
            edges: Vec::new(),
        },
        Vec::new(),
    ));
    debug_assert_eq!(order.len(), n);
    (form, order)
}

type NodeSig = (u32, Vec<(u32, u32, u32)>, Vec<(u32, u32, u32)>);

/// Color refinement to the coarsest equitable partition finer than `colors`.
/// Colors are dense ranks of vertex signatures, so they do not depend on
/// vertex numbering.
fn refine(g: &Tdg, mut colors: Vec<u32>) -> Vec<u32> {
    let mut classes = count_classes(&colors);
    loop {
        let sigs: Vec<NodeSig> = g
            .node_ids()
            .map(|v| {
                let mut outs: Vec<_> = g
                    .out_edges(v)
                    .map(|e| (e.out_slot, e.in_slot, colors[e.dst.index()]))
                    .collect();
                let mut ins: Vec<_> = g
                    .in_edges(v)
                    .map(|e| (e.out_slot, e.in_slot, colors[e.src.index()]))
                    .collect();
                outs.sort_unstable();
                ins.sort_unstable();
                (colors[v.index()], outs, ins)
            })
            .collect();
        let mut sorted: Vec<&NodeSig> = sigs.iter().collect();
        sorted.sort();
        sorted.dedup();
        let next: Vec<u32> = sigs
            .iter()
            .map(|s| sorted.binary_search(&s).unwrap() as u32)
            .collect();
        let next_classes = sorted.len();
        colors = next;
        if next_classes == classes {
            return colors;
        }
        classes = next_classes;
    }
}

fn count_classes(colors: &[u32]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

fn search(g: &Tdg, colors: Vec<u32>, best: &mut Option<(CanonForm, Vec<NodeId>)>) {
    let mut cells: BTreeMap<u32, Vec<NodeId>> = BTreeMap::new();
    for v in g.node_ids() {
        cells.entry(colors[v.index()]).or_default().push(v);
    }
    let Some((_, cell)) = cells.iter().find(|(_, members)| members.len() > 1) else {
        let candidate = form_of(g, &colors);
        if best.as_ref().is_none_or(|(b, _)| candidate.0 < *b) {
            *best = Some(candidate);
        }
        return;
    };
    // swapping two twins is an automorphism, so one branch per twin class suffices
    let mut tried: Vec<Neighborhood> = Vec::new();
    for &v in cell {
        let key = neighborhood(g, v);
        if tried.contains(&key) {
            continue;
        }
        tried.push(key);
        let split: Vec<u32> = g
            .node_ids()
            .map(|u| 2 * colors[u.index()] + u32::from(u != v))
            .collect();
        search(g, refine(g, split), best);
    }
}

/// Sorted `(out slot, in slot, other end)` of outgoing and incoming edges.
type Neighborhood = (Vec<(u32, u32, u32)>, Vec<(u32, u32, u32)>);

fn neighborhood(g: &Tdg, v: NodeId) -> Neighborhood {
    let mut outs: Vec<_> = g
        .out_edges(v)
        .map(|e| (e.out_slot, e.in_slot, e.dst.0))
        .collect();
    let mut ins: Vec<_> = g
        .in_edges(v)
        .map(|e| (e.out_slot, e.in_slot, e.src.0))
        .collect();
    outs.sort_unstable();
    ins.sort_unstable();
    (outs, ins)
}

fn form_of(g: &Tdg, colors: &[u32]) -> (CanonForm, Vec<NodeId>) {
    let n = g.node_count();
    let mut order = vec![NodeId(0); n];
    for v in g.node_ids() {
        order[colors[v.index()] as usize] = v;
    }
    let labels = order.iter().map(|&v| g.label(v).clone()).collect();
    let mut edges: Vec<[u32; 4]> = g
        .edges()
        .iter()
        .map(|e| {
            [
                colors[e.src.index()],
                colors[e.dst.index()],
                e.out_slot,
                e.in_slot,
            ]
        })
        .collect();
    edges.sort_unstable();
    (CanonForm { labels, edges }, order)
}

#[cfg(test)]
pub(crate) mod oracle {
    use super::*;

    /// Least encoding over all vertex orders. Exponential; small graphs only.
    pub fn brute_force_form(g: &Tdg) -> CanonForm {
        let n = g.node_count();
        let mut perm: Vec<u32> = (0..n as u32).collect();
        let mut best: Option<CanonForm> = None;
        permute(&mut perm, 0, &mut |p| {
            // p[v] = position of vertex v
            let mut labels = vec![None; n];
            for v in g.node_ids() {
                labels[p[v.index()] as usize] = Some(g.label(v).clone());
            }
            let mut edges: Vec<[u32; 4]> = g
                .edges()
                .iter()
                .map(|e| [p[e.src.index()], p[e.dst.index()], e.out_slot, e.in_slot])
                .collect();
            edges.sort_unstable();
            let f = CanonForm {
                labels: labels.into_iter().map(Option::unwrap).collect(),
                edges,
            };
            if best.as_ref().is_none_or(|b| f < *b) {
                best = Some(f);
            }
        });
        best.unwrap()
    }

    fn permute(p: &mut Vec<u32>, k: usize, visit: &mut impl FnMut(&[u32])) {
        if k == p.len() {
            visit(p);
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            permute(p, k + 1, visit);
            p.swap(k, i);
        }
    }
}
