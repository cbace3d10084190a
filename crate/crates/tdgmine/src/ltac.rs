//! One-line Ltac-style rendering of tactic definitions.
//!
//! The rendering follows goal flow: a step spawning several subgoals is
//! followed by a bracketed list with one entry per subgoal, and steps acting
//! only on hypotheses are placed just before the next step that works on a
//! goal. Term arguments cannot be recovered, so the output is for reading only.

use std::collections::BTreeMap;

use tdgmine_core::{Invocation, TacticDef};

fn render_step(inv: &Invocation) -> String {
    let hyps: Vec<&str> = inv
        .inputs
        .iter()
        .filter(|e| !e.is_goal())
        .map(|e| e.name.as_str())
        .collect();
    let on_goal = inv.inputs.iter().any(|e| e.is_goal());
    let mut s = inv.tactic.clone();
    match hyps.split_last() {
        None => {}
        Some((last, rest)) if !on_goal => {
            for a in rest {
                s.push(' ');
                s.push_str(a);
            }
            s.push_str(" in ");
            s.push_str(last);
        }
        Some(_) => {
            for a in hyps {
                s.push(' ');
                s.push_str(a);
            }
        }
    }
    s
}

struct Renderer<'a> {
    def: &'a TacticDef,
    consumer: BTreeMap<&'a str, usize>,
    /// Hypothesis-only steps keyed by the goal step they precede.
    before: BTreeMap<usize, Vec<usize>>,
    trailing: Vec<usize>,
}

impl<'a> Renderer<'a> {
    fn new(def: &'a TacticDef) -> Self {
        let mut consumer = BTreeMap::new();
        let mut before: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let mut pending = Vec::new();
        for (i, inv) in def.body.iter().enumerate() {
            let goals: Vec<&str> = inv
                .inputs
                .iter()
                .filter(|e| e.is_goal())
                .map(|e| e.name.as_str())
                .collect();
            if goals.is_empty() {
                pending.push(i);
                continue;
            }
            for g in goals {
                consumer.insert(g, i);
            }
            before.insert(i, std::mem::take(&mut pending));
        }
        Renderer {
            def,
            consumer,
            before,
            trailing: pending,
        }
    }

    fn step_with_prefix(&self, i: usize) -> String {
        let mut parts: Vec<String> = self.before[&i]
            .iter()
            .map(|&j| render_step(&self.def.body[j]))
            .collect();
        parts.push(render_step(&self.def.body[i]));
        parts.join("; ")
    }

    /// Script for the subtree rooted at goal `g`; empty if `g` is left open.
    fn goal(&self, g: &str) -> String {
        let Some(&i) = self.consumer.get(g) else {
            return String::new();
        };
        let head = self.step_with_prefix(i);
        let subgoals: Vec<&str> = self.def.body[i]
            .outputs
            .iter()
            .filter(|e| e.is_goal())
            .map(|e| e.name.as_str())
            .collect();
        match subgoals.as_slice() {
            [] => head,
            [one] => match self.goal(one) {
                t if t.is_empty() => head,
                t => format!("{head}; {t}"),
            },
            many => {
                let branches: Vec<String> = many
                    .iter()
                    .map(|s| match self.goal(s) {
                        t if t.is_empty() => "idtac".to_string(),
                        t => t,
                    })
                    .collect();
                format!("{head}; [{}]", branches.join(" | "))
            }
        }
    }
}

pub fn emit_ltac(def: &TacticDef) -> String {
    let r = Renderer::new(def);
    let mut parts: Vec<String> = def
        .inputs
        .iter()
        .filter(|e| e.is_goal())
        .map(|e| r.goal(&e.name))
        .filter(|s| !s.is_empty())
        .collect();
    parts.extend(r.trailing.iter().map(|&j| render_step(&def.body[j])));
    let mut head = format!("Ltac {}", def.name);
    for p in def.inputs.iter().filter(|e| !e.is_goal()) {
        head.push(' ');
        head.push_str(&p.name);
    }
    format!("{head} := {}.", parts.join("; "))
}
