//! Rewriting proofs with a custom tactic by contracting collapsible
//! embeddings of its body into single calls.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::embedding::{ProofIndex, Witness, WitnessSet};
use crate::model::{Corpus, ProofScript, TacticDef, TacticDefError};
use crate::tdg::{
    build_proof_tdg, build_tactic_tdg, induced_proof, BranchInfo, Edge, NameAllocator, NodeId,
    TacticTdg, Tdg, TdgError,
};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RefactorError {
    #[error("embedding cannot be contracted")]
    NotCollapsible,
    #[error("tactic name {0} is already in use")]
    NameClash(String),
    #[error(transparent)]
    InvalidTactic(#[from] TacticDefError),
    #[error(transparent)]
    Graph(#[from] TdgError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefactorOutcome {
    pub script: ProofScript,
    pub applications: usize,
    pub size_before: usize,
    pub size_after: usize,
}

/// Upper limit on search nodes visited by [`select_disjoint`]; past it the
/// best selection found so far is returned.
pub const SELECT_BUDGET: usize = 200_000;

/// Picks a largest set of witnesses with pairwise disjoint ranges that can
/// all be contracted together without creating a cycle. Among equally large
/// sets the one first in canonical witness order wins.
pub fn select_disjoint(ws: &[Witness], gp: &Tdg) -> Vec<Witness> {
    let mut seen_ranges = BTreeSet::new();
    let mut cands: Vec<&Witness> = Vec::new();
    let mut sorted: Vec<&Witness> = ws.iter().collect();
    sorted.sort();
    for w in sorted {
        if seen_ranges.insert(w.range()) {
            cands.push(w);
        }
    }
    let n = gp.node_count();
    let bits: Vec<_> = cands.iter().map(|w| w.range_bits(n)).collect();
    let mut st = Select {
        gp,
        cands: &cands,
        bits: &bits,
        chosen: Vec::new(),
        best: Vec::new(),
        budget: SELECT_BUDGET,
    };
    st.go(0);
    st.best.into_iter().map(|i| cands[i].clone()).collect()
}

struct Select<'s> {
    gp: &'s Tdg,
    cands: &'s [&'s Witness],
    bits: &'s [crate::bitset::BitSet],
    chosen: Vec<usize>,
    best: Vec<usize>,
    budget: usize,
}

impl Select<'_> {
    fn go(&mut self, k: usize) {
        if self.budget == 0 {
            return;
        }
        self.budget -= 1;
        if self.chosen.len() > self.best.len() {
            self.best = self.chosen.clone();
        }
        if k == self.cands.len() || self.chosen.len() + (self.cands.len() - k) <= self.best.len() {
            return;
        }
        let disjoint = self
            .chosen
            .iter()
            .all(|&c| self.bits[c].is_disjoint(&self.bits[k]));
        if disjoint {
            self.chosen.push(k);
            let groups: Vec<&Witness> = self.chosen.iter().map(|&i| self.cands[i]).collect();
            if quotient_is_acyclic(self.gp, &groups) {
                self.go(k + 1);
            }
            self.chosen.pop();
        }
        self.go(k + 1);
    }
}

/// Whether collapsing each witness range to one node leaves a DAG.
pub fn quotient_is_acyclic(gp: &Tdg, groups: &[&Witness]) -> bool {
    let n = gp.node_count();
    let mut class: Vec<usize> = (0..n).collect();
    for (i, w) in groups.iter().enumerate() {
        for v in &w.0 {
            class[v.index()] = n + i;
        }
    }
    let total = n + groups.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); total];
    let mut indeg = vec![0usize; total];
    let mut present = vec![false; total];
    for v in gp.node_ids() {
        present[class[v.index()]] = true;
    }
    for e in gp.edges() {
        let (a, b) = (class[e.src.index()], class[e.dst.index()]);
        if a != b {
            adj[a].push(b);
            indeg[b] += 1;
        }
    }
    let mut stack: Vec<usize> = (0..total)
        .filter(|&c| present[c] && indeg[c] == 0)
        .collect();
    let mut done = 0;
    while let Some(c) = stack.pop() {
        done += 1;
        for &d in &adj[c] {
            indeg[d] -= 1;
            if indeg[d] == 0 {
                stack.push(d);
            }
        }
    }
    done == present.iter().filter(|p| **p).count()
}

/// Contracts one embedding of `g` into a node labeled with `g`'s call
/// signature.
pub fn contract_embedding(gc: &Tdg, f: &Witness, g: &TacticTdg) -> Result<Tdg, RefactorError> {
    contract_all(gc, core::slice::from_ref(f), g)
}

/// Contracts several disjoint embeddings at once. Each range becomes one
/// node at the position of its least node; incoming edges are rewired to the
/// formal input they bind, outgoing edges to the formal output they carry,
/// and internal edges disappear.
pub fn contract_all(gc: &Tdg, ws: &[Witness], g: &TacticTdg) -> Result<Tdg, RefactorError> {
    let n = gc.node_count();
    // for every proof node in a range: (witness index, pattern node)
    let mut owner: Vec<Option<(usize, NodeId)>> = vec![None; n];
    for (i, w) in ws.iter().enumerate() {
        if w.len() != g.body.node_count() {
            return Err(RefactorError::NotCollapsible);
        }
        for (p, &v) in w.0.iter().enumerate() {
            if owner[v.index()].is_some() {
                return Err(RefactorError::NotCollapsible);
            }
            owner[v.index()] = Some((i, NodeId(p as u32)));
        }
    }
    let mut out = Tdg::new();
    let mut new_id: Vec<Option<NodeId>> = vec![None; n];
    let mut group_id: Vec<Option<NodeId>> = vec![None; ws.len()];
    for v in gc.node_ids() {
        match owner[v.index()] {
            None => {
                let node = gc.node(v);
                new_id[v.index()] = Some(out.add_node(node.label.clone(), node.origin));
            }
            Some((i, _)) if group_id[i].is_none() => {
                let origin = ws[i].0.iter().filter_map(|&u| gc.node(u).origin).min();
                group_id[i] = Some(out.add_node(g.signature.clone(), origin));
            }
            _ => {}
        }
    }
    out.set_root(gc.root().and_then(|r| new_id[r.index()]));
    let mut added = BTreeSet::new();
    for e in gc.edges() {
        let (so, do_) = (owner[e.src.index()], owner[e.dst.index()]);
        if let (Some((a, _)), Some((b, _))) = (so, do_) {
            if a == b {
                continue;
            }
        }
        let (src, out_slot) = match so {
            None => (new_id[e.src.index()].expect("kept"), e.out_slot),
            Some((i, p)) => {
                let x = g
                    .exit_at(p, e.out_slot)
                    .ok_or(RefactorError::NotCollapsible)?;
                (group_id[i].expect("placed"), x.formal)
            }
        };
        let (dst, in_slot) = match do_ {
            None => (new_id[e.dst.index()].expect("kept"), e.in_slot),
            Some((i, p)) => {
                let x = g
                    .entry_at(p, e.in_slot)
                    .ok_or(RefactorError::NotCollapsible)?;
                (group_id[i].expect("placed"), x.formal)
            }
        };
        let edge = Edge {
            src,
            dst,
            out_slot,
            in_slot,
        };
        if added.insert(edge) {
            out.add_edge(edge)
                .map_err(|_| RefactorError::NotCollapsible)?;
        }
    }
    if !out.is_acyclic() {
        return Err(RefactorError::NotCollapsible);
    }
    Ok(out)
}

/// Repeatedly contracts a maximum set of disjoint contractible embeddings of
/// `tau` until none is left, then linearizes the graph back into a script.
pub fn refactor(tau: &TacticDef, script: &ProofScript) -> Result<RefactorOutcome, RefactorError> {
    tau.validate()?;
    let t = build_tactic_tdg(tau)?;
    refactor_with(&t, script)
}

pub(crate) fn refactor_with(
    t: &TacticTdg,
    script: &ProofScript,
) -> Result<RefactorOutcome, RefactorError> {
    let (mut g, _) = build_proof_tdg(script)?;
    let mut applications = 0;
    loop {
        let idx = ProofIndex::new(&g);
        let ws: WitnessSet = idx.contractible_witnesses(t);
        if ws.is_empty() {
            break;
        }
        let chosen = select_disjoint(&ws, &g);
        g = contract_all(&g, &chosen, t)?;
        applications += chosen.len();
        if t.size() < 2 {
            break;
        }
    }
    let size_before = script.size();
    if applications == 0 {
        return Ok(RefactorOutcome {
            script: script.clone(),
            applications,
            size_before,
            size_after: size_before,
        });
    }
    let branches = BranchInfo::of(&g)?;
    let out = induced_proof(&script.name, &g, &branches, &mut NameAllocator::new())?;
    Ok(RefactorOutcome {
        size_after: out.size(),
        script: out,
        applications,
        size_before,
    })
}

/// Refactors every proof with `tau` and appends `tau` to the tactic list.
pub fn refactor_corpus(tau: &TacticDef, corpus: &Corpus) -> Result<Corpus, RefactorError> {
    refactor_corpus_with_outcomes(tau, corpus).map(|(c, _)| c)
}

pub fn refactor_corpus_with_outcomes(
    tau: &TacticDef,
    corpus: &Corpus,
) -> Result<(Corpus, Vec<RefactorOutcome>), RefactorError> {
    if corpus.tactic_names().contains(tau.name.as_str()) {
        return Err(RefactorError::NameClash(tau.name.clone()));
    }
    tau.validate()?;
    let t = build_tactic_tdg(tau)?;
    let outcomes = corpus
        .proofs
        .iter()
        .map(|p| refactor_with(&t, p))
        .collect::<Result<Vec<_>, _>>()?;
    let mut tactics = corpus.tactics.clone();
    tactics.push(tau.clone());
    let proofs = outcomes.iter().map(|o| o.script.clone()).collect();
    Ok((Corpus { proofs, tactics }, outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::canonical_form;
    use crate::model::fixtures::*;
    use crate::model::{check_script, Kind};

    fn w(ids: &[u32]) -> Witness {
        Witness(ids.iter().map(|&i| NodeId(i)).collect())
    }

    #[test]
    fn new_tac_on_disjunction() {
        let out = refactor(&new_tac(), &disjunction()).unwrap();
        assert_eq!(out.applications, 2);
        assert_eq!((out.size_before, out.size_after), (10, 8));
        assert!(check_script(&out.script).is_valid());
        let names: Vec<&str> = out.script.body.iter().map(|i| i.tactic.as_str()).collect();
        assert_eq!(
            names,
            ["intro", "intro", "intro", "destruct", "right", "newTac", "left", "newTac"]
        );
        // right's goal feeds the goal argument of the first call
        let right_goal = &out.script.body[4].outputs[0];
        assert_eq!(&out.script.body[5].inputs[1], right_goal);
    }

    #[test]
    fn contraction_rewires_slots() {
        let (gp, _) = build_proof_tdg(&disjunction()).unwrap();
        let t = build_tactic_tdg(&new_tac()).unwrap();
        let c = contract_embedding(&gp, &w(&[5, 7]), &t).unwrap();
        assert_eq!(c.size(), 9);
        let call = c.node_ids().find(|&n| c.label(n).name == "newTac").unwrap();
        let right = c.node_ids().find(|&n| c.label(n).name == "right").unwrap();
        let e = c.producer(call, 1).unwrap();
        assert_eq!((e.src, e.out_slot), (right, 0));
        let both = contract_all(&gp, &[w(&[5, 7]), w(&[8, 10])], &t).unwrap();
        assert_eq!(both.size(), 8);
    }

    #[test]
    fn single_node_contraction_relabels() {
        let (gp, _) = build_proof_tdg(&implication()).unwrap();
        let one = TacticDef {
            name: "finish".into(),
            inputs: vec![h("x"), g("g")],
            outputs: vec![],
            body: vec![inv("exact", vec![h("x"), g("g")], vec![])],
        };
        let t = build_tactic_tdg(&one).unwrap();
        let c = contract_embedding(&gp, &w(&[6]), &t).unwrap();
        assert_eq!(c.size(), gp.size());
        assert_eq!(c.label(NodeId(6)).name, "finish");
        assert_eq!(c.edges().len(), gp.edges().len());
    }

    #[test]
    fn non_collapsible_contraction_fails() {
        let (gp, _) = build_proof_tdg(&implication()).unwrap();
        let t = build_tactic_tdg(&my_tac2()).unwrap();
        // intro(1) does not feed apply(4) directly
        assert!(contract_embedding(&gp, &w(&[1, 4, 5]), &t).is_err());
    }

    #[test]
    fn selection_prefers_more_disjoint_witnesses() {
        let (gp, _) = build_proof_tdg(&disjunction()).unwrap();
        // #2 overlaps #1 and #3; #1 and #3 are disjoint
        let ws = [w(&[1, 2]), w(&[2, 8]), w(&[8, 9])];
        assert_eq!(select_disjoint(&ws, &gp), vec![w(&[1, 2]), w(&[8, 9])]);
        assert!(select_disjoint(&[], &gp).is_empty());
        let two = [w(&[5, 7]), w(&[8, 10])];
        assert_eq!(select_disjoint(&two, &gp), two.to_vec());
    }

    #[test]
    fn jointly_cyclic_selection_is_avoided() {
        // p1 -> q2 and q1 -> p2: {p1, p2} and {q1, q2} are each fine alone,
        // contracting both makes a cycle
        let script = ProofScript {
            name: "cross".into(),
            init: vec![g("g0")],
            body: vec![
                inv("intros", vec![g("g0")], vec![h("A"), h("B"), g("g1")]),
                inv("f", vec![h("A")], vec![h("P")]),
                inv("f", vec![h("B")], vec![h("Q")]),
                inv("k", vec![h("Q")], vec![h("R")]),
                inv("k", vec![h("P")], vec![h("S")]),
                inv("done", vec![g("g1")], vec![]),
            ],
        };
        let (gp, _) = build_proof_tdg(&script).unwrap();
        let x = w(&[2, 4]);
        let y = w(&[3, 5]);
        assert!(quotient_is_acyclic(&gp, &[&x]));
        assert!(quotient_is_acyclic(&gp, &[&y]));
        assert!(!quotient_is_acyclic(&gp, &[&x, &y]));
        assert_eq!(select_disjoint(&[x.clone(), y], &gp), vec![x]);
    }

    #[test]
    fn no_embedding_means_unchanged() {
        let out = refactor(&new_tac(), &implication()).unwrap();
        assert_eq!(out.applications, 0);
        assert_eq!(out.script, implication());
    }

    #[test]
    fn refactoring_is_idempotent() {
        let once = refactor(&new_tac(), &disjunction()).unwrap().script;
        let twice = refactor(&new_tac(), &once).unwrap();
        assert_eq!(twice.applications, 0);
        assert_eq!(twice.script, once);
    }

    #[test]
    fn name_clash() {
        let mut c = Corpus {
            proofs: vec![disjunction()],
            tactics: vec![],
        };
        let mut t = new_tac();
        t.name = "intro".into();
        assert_eq!(
            refactor_corpus(&t, &c),
            Err(RefactorError::NameClash("intro".into()))
        );
        c.tactics.push(new_tac());
        assert!(matches!(
            refactor_corpus(&new_tac(), &c),
            Err(RefactorError::NameClash(_))
        ));
    }

    #[test]
    fn corpus_refactor_touches_only_matching_proofs() {
        let c = Corpus {
            proofs: vec![implication(), disjunction()],
            tactics: vec![],
        };
        let out = refactor_corpus(&new_tac(), &c).unwrap();
        assert_eq!(out.proofs[0], implication());
        assert_eq!(out.proofs[1].size(), 8);
        assert_eq!(out.tactics, vec![new_tac()]);
        let empty = refactor_corpus(&new_tac(), &Corpus::default()).unwrap();
        assert!(empty.proofs.is_empty());
        assert_eq!(empty.tactics.len(), 1);
    }

    #[test]
    fn motivating_tactics_refactor_eq_sym() {
        let destruct_unfold = TacticDef {
            name: "destructUnfold".into(),
            inputs: vec![h("n"), g("g")],
            outputs: vec![h("h"), h("x"), g("g3")],
            body: vec![
                inv(
                    "destruct",
                    vec![h("n"), g("g")],
                    vec![h("h"), g("g1"), g("g2")],
                ),
                inv("unfold", vec![g("g1")], vec![g("g4")]),
                inv("intros", vec![g("g4")], vec![h("x"), g("g3")]),
                inv("auto", vec![g("g2")], vec![]),
            ],
        };
        let simpl_rewrite = TacticDef {
            name: "simplRewrite".into(),
            inputs: vec![h("H"), g("g")],
            outputs: vec![h("H1"), g("g1")],
            body: vec![
                inv("red", vec![h("H")], vec![h("H1")]),
                inv("rewrite", vec![h("H1"), g("g")], vec![g("g1")]),
            ],
        };
        let a = refactor(&destruct_unfold, &eq_sym()).unwrap();
        assert_eq!(a.applications, 1);
        let b = refactor(&simpl_rewrite, &a.script).unwrap();
        assert_eq!(b.applications, 2);
        let names: Vec<&str> = b.script.body.iter().map(|i| i.tactic.as_str()).collect();
        assert_eq!(
            names,
            [
                "intros",
                "destructUnfold",
                "simplRewrite",
                "simplRewrite",
                "reflexivity"
            ]
        );
        assert!(check_script(&b.script).is_valid());
        let sig = build_tactic_tdg(&simpl_rewrite).unwrap().signature;
        assert_eq!(sig.outputs, vec![Kind::Hypothesis, Kind::Goal]);
        let _ = canonical_form(&build_proof_tdg(&b.script).unwrap().0);
    }
}
