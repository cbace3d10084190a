//! Random valid proof scripts over a small fixed tactic alphabet, so that
//! repeated fragments are common.

#![allow(dead_code)]

use rand::seq::IndexedRandom;
use rand::Rng;
use tdgmine_core::{Corpus, ElementId, Invocation, Kind, ProofScript};

use Kind::{Goal as G, Hypothesis as H};

/// Tactic name with input and output kinds.
pub const ALPHABET: &[(&str, &[Kind], &[Kind])] = &[
    ("intro", &[G], &[H, G]),
    ("split", &[G], &[G, G]),
    ("simpl", &[G], &[G]),
    ("apply", &[H, G], &[G]),
    ("destruct", &[H, G], &[H, G, G]),
    ("rewrite", &[H, G], &[G]),
    ("red", &[H], &[H]),
    ("pose", &[H, H], &[H]),
    ("exact", &[H, G], &[]),
    ("auto", &[G], &[]),
];

pub struct Gen<'r, R: Rng> {
    pub rng: &'r mut R,
    /// Use only the first `width` alphabet entries that fit.
    pub width: usize,
}

impl<R: Rng> Gen<'_, R> {
    /// A valid script with at most `max_len` invocations.
    pub fn script(&mut self, name: &str, max_len: usize) -> ProofScript {
        assert!(max_len >= 1);
        let mut next_id = 0usize;
        let mut fresh = |k: Kind| {
            next_id += 1;
            match k {
                G => ElementId::goal(format!("g{next_id}")),
                H => ElementId::hyp(format!("h{next_id}")),
            }
        };
        let mut init = vec![fresh(G)];
        for _ in 0..self.rng.random_range(0..=2) {
            init.push(fresh(H));
        }
        let mut goals: Vec<ElementId> = vec![init[0].clone()];
        let mut hyps: Vec<ElementId> = init[1..].to_vec();
        let mut body = Vec::new();
        while !goals.is_empty() {
            let left = max_len - body.len();
            // every goal still open afterwards needs at least one more step
            let choices: Vec<&(&str, &[Kind], &[Kind])> = ALPHABET
                [..self.width.clamp(1, ALPHABET.len())]
                .iter()
                .chain(ALPHABET.iter().filter(|t| t.0 == "auto"))
                .filter(|(_, ins, outs)| {
                    let needs_hyp = ins.contains(&H);
                    let goal_in = ins.iter().filter(|k| **k == G).count();
                    let goal_out = outs.iter().filter(|k| **k == G).count();
                    let after = goals.len() - goal_in + goal_out;
                    (!needs_hyp || !hyps.is_empty()) && after < left
                })
                .collect();
            let pick = **choices.choose(self.rng).expect("auto always fits");
            let (name, ins, outs) = pick;
            let mut inputs = Vec::new();
            for k in ins {
                match k {
                    G => {
                        let i = self.rng.random_range(0..goals.len());
                        inputs.push(goals.remove(i));
                    }
                    H => inputs.push(hyps.choose(self.rng).unwrap().clone()),
                }
            }
            let outputs: Vec<ElementId> = outs.iter().map(|&k| fresh(k)).collect();
            for o in &outputs {
                match o.kind {
                    G => goals.push(o.clone()),
                    H => hyps.push(o.clone()),
                }
            }
            body.push(Invocation::new(name, inputs, outputs));
        }
        ProofScript {
            name: name.into(),
            init,
            body,
        }
    }

    pub fn corpus(&mut self, proofs: usize, max_len: usize) -> Corpus {
        Corpus {
            proofs: (0..proofs)
                .map(|i| self.script(&format!("p{i}"), max_len))
                .collect(),
            tactics: vec![],
        }
    }
}

/// A tactic made from a random fragment of `script`: a random start step
/// plus up to `extra` steps reachable from it.
pub fn random_fragment_tactic<R: Rng>(
    rng: &mut R,
    script: &ProofScript,
    extra: usize,
    name: &str,
) -> Option<tdgmine_core::TacticDef> {
    use tdgmine_core::{build_proof_tdg, NodeId};
    let (gp, _) = build_proof_tdg(script).ok()?;
    let body: Vec<NodeId> = gp.body_ids().collect();
    let start = *body.choose(rng)?;
    let mut set = vec![start];
    for _ in 0..extra {
        let frontier: Vec<NodeId> = set
            .iter()
            .flat_map(|&v| gp.out_edges(v).map(|e| e.dst))
            .filter(|d| !set.contains(d))
            .collect();
        match frontier.choose(rng) {
            Some(&d) => set.push(d),
            None => break,
        }
    }
    if set.len() < 2 {
        return None;
    }
    let pattern = gp.induced_subgraph(&set);
    Some(tdgmine_core::discovery::materialize(name, &pattern))
}
