//! Slow reference implementations used to check the real algorithms.
//! Everything here is exhaustive search written without the library's own
//! matching, canonical forms or selection code.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use tdgmine_core::{NodeId, Tdg};

fn edge_set(g: &Tdg) -> BTreeSet<(u32, u32, u32, u32)> {
    g.edges()
        .iter()
        .map(|e| (e.src.0, e.dst.0, e.out_slot, e.in_slot))
        .collect()
}

/// Label- and slot-preserving graph isomorphism by backtracking.
pub fn isomorphic(a: &Tdg, b: &Tdg) -> bool {
    let n = a.node_count();
    if n != b.node_count() || a.edges().len() != b.edges().len() {
        return false;
    }
    let ea = edge_set(a);
    let eb = edge_set(b);
    let mut map: Vec<Option<u32>> = vec![None; n];
    let mut used = vec![false; n];
    fn go(
        i: usize,
        a: &Tdg,
        b: &Tdg,
        ea: &BTreeSet<(u32, u32, u32, u32)>,
        eb: &BTreeSet<(u32, u32, u32, u32)>,
        map: &mut Vec<Option<u32>>,
        used: &mut Vec<bool>,
    ) -> bool {
        let n = a.node_count();
        if i == n {
            return ea.iter().all(|&(s, d, o, j)| {
                eb.contains(&(map[s as usize].unwrap(), map[d as usize].unwrap(), o, j))
            });
        }
        let ai = NodeId(i as u32);
        for c in 0..n {
            if used[c] || a.label(ai) != b.label(NodeId(c as u32)) {
                continue;
            }
            if a.root() == Some(ai) && b.root() != Some(NodeId(c as u32)) {
                continue;
            }
            map[i] = Some(c as u32);
            // partial edge check among already mapped nodes
            let ok = ea
                .iter()
                .all(|&(s, d, o, j)| match (map[s as usize], map[d as usize]) {
                    (Some(ms), Some(md)) if (s as usize) <= i && (d as usize) <= i => {
                        eb.contains(&(ms, md, o, j))
                    }
                    _ => true,
                });
            if ok {
                used[c] = true;
                if go(i + 1, a, b, ea, eb, map, used) {
                    return true;
                }
                used[c] = false;
            }
            map[i] = None;
        }
        false
    }
    go(0, a, b, &ea, &eb, &mut map, &mut used)
}

/// Every injective, label-preserving map of `pattern` into `gp` under which
/// each pattern edge is a proof edge with the same slots.
pub fn all_injections(pattern: &Tdg, gp: &Tdg) -> BTreeSet<Vec<NodeId>> {
    let ep = edge_set(pattern);
    let eg = edge_set(gp);
    let mut out = BTreeSet::new();
    let mut cur: Vec<NodeId> = Vec::new();
    fn go(
        pattern: &Tdg,
        gp: &Tdg,
        ep: &BTreeSet<(u32, u32, u32, u32)>,
        eg: &BTreeSet<(u32, u32, u32, u32)>,
        cur: &mut Vec<NodeId>,
        out: &mut BTreeSet<Vec<NodeId>>,
    ) {
        let i = cur.len();
        if i == pattern.node_count() {
            let ok = ep
                .iter()
                .all(|&(s, d, o, j)| eg.contains(&(cur[s as usize].0, cur[d as usize].0, o, j)));
            if ok {
                out.insert(cur.clone());
            }
            return;
        }
        for c in gp.node_ids() {
            if cur.contains(&c) || pattern.label(NodeId(i as u32)) != gp.label(c) {
                continue;
            }
            cur.push(c);
            go(pattern, gp, ep, eg, cur, out);
            cur.pop();
        }
    }
    go(pattern, gp, &ep, &eg, &mut cur, &mut out);
    out
}

fn reach(gp: &Tdg) -> Vec<Vec<bool>> {
    let n = gp.node_count();
    let mut r = vec![vec![false; n]; n];
    for (v, row) in r.iter_mut().enumerate() {
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            for e in gp.out_edges(NodeId(x as u32)) {
                let d = e.dst.index();
                if !row[d] {
                    row[d] = true;
                    stack.push(d);
                }
            }
        }
    }
    r
}

/// No path leaves `set` and comes back.
pub fn convex(gp: &Tdg, set: &[NodeId]) -> bool {
    let r = reach(gp);
    let inside: BTreeSet<usize> = set.iter().map(|n| n.index()).collect();
    (0..gp.node_count())
        .filter(|x| !inside.contains(x))
        .all(|x| {
            let from_set = inside.iter().any(|&s| r[s][x]);
            let to_set = inside.iter().any(|&t| r[x][t]);
            !(from_set && to_set)
        })
}

/// Body-node subsets of size `2..=max` in which one node reaches all others
/// along edges inside the subset.
pub fn rooted_subsets(gp: &Tdg, max: usize) -> Vec<Vec<NodeId>> {
    let body: Vec<NodeId> = gp.node_ids().filter(|&n| Some(n) != gp.root()).collect();
    assert!(body.len() < 20, "exhaustive subsets only for small graphs");
    let mut out = Vec::new();
    for mask in 1u32..(1 << body.len()) {
        let k = mask.count_ones() as usize;
        if k < 2 || k > max {
            continue;
        }
        let set: Vec<NodeId> = (0..body.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| body[i])
            .collect();
        let rooted = set.iter().any(|&s| {
            let mut seen = BTreeSet::from([s]);
            let mut stack = vec![s];
            while let Some(x) = stack.pop() {
                for e in gp.out_edges(x) {
                    if set.contains(&e.dst) && seen.insert(e.dst) {
                        stack.push(e.dst);
                    }
                }
            }
            seen.len() == set.len()
        });
        if rooted {
            out.push(set);
        }
    }
    out
}

/// Whether contracting each group to a single node leaves `gp` acyclic.
pub fn quotient_acyclic(gp: &Tdg, groups: &[&Vec<NodeId>]) -> bool {
    let n = gp.node_count();
    let mut rep: Vec<usize> = (0..n).collect();
    for (gi, g) in groups.iter().enumerate() {
        for v in g.iter() {
            rep[v.index()] = n + gi;
        }
    }
    let mut adj: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for e in gp.edges() {
        let (s, d) = (rep[e.src.index()], rep[e.dst.index()]);
        if s != d {
            adj.entry(s).or_default().insert(d);
        }
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state: BTreeMap<usize, u8> = BTreeMap::new();
    fn cyclic(
        v: usize,
        adj: &BTreeMap<usize, BTreeSet<usize>>,
        state: &mut BTreeMap<usize, u8>,
    ) -> bool {
        match state.get(&v) {
            Some(1) => return true,
            Some(2) => return false,
            _ => {}
        }
        state.insert(v, 1);
        if let Some(next) = adj.get(&v) {
            for &w in next {
                if cyclic(w, adj, state) {
                    return true;
                }
            }
        }
        state.insert(v, 2);
        false
    }
    let nodes: BTreeSet<usize> = rep.iter().copied().collect();
    !nodes.into_iter().any(|v| cyclic(v, &adj, &mut state))
}

/// Largest number of pairwise disjoint occurrences that contract together.
pub fn max_disjoint(gp: &Tdg, occ: &[Vec<NodeId>]) -> usize {
    fn go(i: usize, gp: &Tdg, occ: &[Vec<NodeId>], chosen: &mut Vec<usize>, best: &mut usize) {
        if chosen.len() + (occ.len() - i) <= *best {
            return;
        }
        if i == occ.len() {
            *best = chosen.len();
            return;
        }
        let disjoint = chosen
            .iter()
            .all(|&c| occ[c].iter().all(|v| !occ[i].contains(v)));
        if disjoint {
            chosen.push(i);
            let groups: Vec<&Vec<NodeId>> = chosen.iter().map(|&c| &occ[c]).collect();
            if quotient_acyclic(gp, &groups) {
                go(i + 1, gp, occ, chosen, best);
            }
            chosen.pop();
        }
        go(i + 1, gp, occ, chosen, best);
    }
    let mut best = 0;
    go(0, gp, occ, &mut Vec::new(), &mut best);
    best
}

/// Best `(size - 1) * frequency` over all patterns, by exhaustive
/// enumeration of convex rooted subgraphs grouped up to isomorphism.
/// `None` when no pattern meets the thresholds.
pub fn best_effectiveness(
    tdgs: &[Tdg],
    min_frequency: usize,
    min_effectiveness: usize,
    max_size: usize,
) -> Option<usize> {
    struct Class {
        rep: Tdg,
        occ: Vec<Vec<Vec<NodeId>>>,
    }
    let mut classes: BTreeMap<(usize, usize, Vec<String>), Vec<Class>> = BTreeMap::new();
    for (p, gp) in tdgs.iter().enumerate() {
        for set in rooted_subsets(gp, max_size) {
            if !convex(gp, &set) {
                continue;
            }
            let sub = gp.induced_subgraph(&set);
            let mut names: Vec<String> = sub.node_ids().map(|n| sub.label(n).to_string()).collect();
            names.sort();
            let bucket = classes
                .entry((set.len(), sub.edges().len(), names))
                .or_default();
            let idx = match bucket.iter().position(|c| isomorphic(&c.rep, &sub)) {
                Some(i) => i,
                None => {
                    bucket.push(Class {
                        rep: sub,
                        occ: vec![Vec::new(); tdgs.len()],
                    });
                    bucket.len() - 1
                }
            };
            bucket[idx].occ[p].push(set);
        }
    }
    classes
        .values()
        .flatten()
        .filter_map(|c| {
            let freq: usize = tdgs
                .iter()
                .zip(&c.occ)
                .map(|(gp, o)| max_disjoint(gp, o))
                .sum();
            let score = (c.rep.node_count() - 1) * freq;
            (freq >= min_frequency && score >= min_effectiveness).then_some(score)
        })
        .max()
}
