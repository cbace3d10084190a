//! Proof elements, invocations, scripts, tactic definitions and the abstract
//! execution that decides whether a script is a proof.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

/// Name of the synthetic invocation that produces a proof's initial elements.
pub const INIT_TACTIC: &str = "<init>";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Goal,
    Hypothesis,
}

impl Kind {
    pub fn prefix(self) -> &'static str {
        match self {
            Kind::Goal => "g",
            Kind::Hypothesis => "h",
        }
    }
}

/// A named goal or hypothesis.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementId {
    pub kind: Kind,
    pub name: String,
}

impl ElementId {
    pub fn goal(name: impl Into<String>) -> Self {
        ElementId {
            kind: Kind::Goal,
            name: name.into(),
        }
    }

    pub fn hyp(name: impl Into<String>) -> Self {
        ElementId {
            kind: Kind::Hypothesis,
            name: name.into(),
        }
    }

    pub fn is_goal(&self) -> bool {
        self.kind == Kind::Goal
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind.prefix(), self.name)
    }
}

/// The shape of an invocation: its tactic name and the kinds flowing in and
/// out of each positional slot. TDG nodes are labeled by signatures.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Signature {
    pub name: String,
    pub inputs: Vec<Kind>,
    pub outputs: Vec<Kind>,
}

impl Signature {
    pub fn goal_outputs(&self) -> impl Iterator<Item = usize> + '_ {
        self.outputs
            .iter()
            .enumerate()
            .filter(|(_, k)| **k == Kind::Goal)
            .map(|(i, _)| i)
    }

    pub fn consumes_goal(&self) -> bool {
        self.inputs.contains(&Kind::Goal)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

pub type Label = Arc<Signature>;

/// One tactic application `(name, inputs, outputs)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Invocation {
    pub tactic: String,
    pub inputs: Vec<ElementId>,
    pub outputs: Vec<ElementId>,
}

impl Invocation {
    pub fn new(tactic: impl Into<String>, inputs: Vec<ElementId>, outputs: Vec<ElementId>) -> Self {
        Invocation {
            tactic: tactic.into(),
            inputs,
            outputs,
        }
    }

    pub fn signature(&self) -> Signature {
        Signature {
            name: self.tactic.clone(),
            inputs: self.inputs.iter().map(|e| e.kind).collect(),
            outputs: self.outputs.iter().map(|e| e.kind).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProofScript {
    pub name: String,
    pub init: Vec<ElementId>,
    pub body: Vec<Invocation>,
}

impl ProofScript {
    /// Number of tactic invocations.
    pub fn size(&self) -> usize {
        self.body.len()
    }
}

/// A custom tactic `(name, formal inputs, formal outputs, body)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TacticDef {
    pub name: String,
    pub inputs: Vec<ElementId>,
    pub outputs: Vec<ElementId>,
    pub body: Vec<Invocation>,
}

impl TacticDef {
    /// Signature of a call to this tactic.
    pub fn signature(&self) -> Signature {
        Signature {
            name: self.name.clone(),
            inputs: self.inputs.iter().map(|e| e.kind).collect(),
            outputs: self.outputs.iter().map(|e| e.kind).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.body.len()
    }

    /// Checks the well-formedness rules of a definition: fresh identifiers,
    /// every formal input used, every formal output produced by exactly one
    /// body invocation, no goal silently dropped, and at least two steps.
    pub fn validate(&self) -> Result<(), TacticDefError> {
        if self.body.len() < 2 {
            return Err(TacticDefError::TrivialBody(self.body.len()));
        }
        self.validate_dataflow()
    }

    /// All of [`TacticDef::validate`] except the minimum body length.
    pub fn validate_dataflow(&self) -> Result<(), TacticDefError> {
        let mut state = AbstractState::default();
        for id in &self.inputs {
            if !state.introduce(id) {
                return Err(TacticDefError::DuplicateId(id.name.clone()));
            }
        }
        let mut used: BTreeSet<&str> = BTreeSet::new();
        for (step, inv) in self.body.iter().enumerate() {
            if let Err(reason) = state.step(inv) {
                return Err(TacticDefError::Body { step, reason });
            }
            used.extend(inv.inputs.iter().map(|e| e.name.as_str()));
        }
        for id in &self.inputs {
            if !used.contains(id.name.as_str()) {
                return Err(TacticDefError::UnusedInput(id.name.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for id in &self.outputs {
            if !seen.insert(id.name.as_str()) {
                return Err(TacticDefError::DuplicateId(id.name.clone()));
            }
            let produced = self.body.iter().any(|inv| inv.outputs.contains(id));
            if !produced {
                return Err(TacticDefError::UnproducedOutput(id.name.clone()));
            }
            if id.is_goal() && !state.live_goals.contains(&id.name) {
                return Err(TacticDefError::ConsumedOutput(id.name.clone()));
            }
        }
        for goal in &state.live_goals {
            if !self.outputs.iter().any(|o| &o.name == goal) {
                return Err(TacticDefError::DroppedGoal(goal.clone()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Corpus {
    pub proofs: Vec<ProofScript>,
    pub tactics: Vec<TacticDef>,
}

impl Corpus {
    /// Total number of tactic invocations over all proofs.
    pub fn size(&self) -> usize {
        self.proofs.iter().map(ProofScript::size).sum()
    }

    pub fn tactic(&self, name: &str) -> Option<&TacticDef> {
        self.tactics.iter().find(|t| t.name == name)
    }

    /// Every tactic name that appears in a proof or a definition.
    pub fn tactic_names(&self) -> BTreeSet<&str> {
        let mut names: BTreeSet<&str> = BTreeSet::new();
        for p in &self.proofs {
            names.extend(p.body.iter().map(|i| i.tactic.as_str()));
        }
        for t in &self.tactics {
            names.insert(t.name.as_str());
            names.extend(t.body.iter().map(|i| i.tactic.as_str()));
        }
        names
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TacticDefError {
    #[error("tactic body has {0} invocation(s); at least 2 are required")]
    TrivialBody(usize),
    #[error("identifier {0} is introduced twice")]
    DuplicateId(String),
    #[error("body step {step}: {reason}")]
    Body { step: usize, reason: FailureReason },
    #[error("formal input {0} is never used")]
    UnusedInput(String),
    #[error("formal output {0} is not produced by the body")]
    UnproducedOutput(String),
    #[error("formal output {0} is a goal consumed inside the body")]
    ConsumedOutput(String),
    #[error("goal {0} is left open by the body but is not a formal output")]
    DroppedGoal(String),
}

/// Why an abstract execution step failed.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FailureReason {
    #[error("input {0} was never introduced")]
    UnknownInput(ElementId),
    #[error("input {0} has the wrong kind")]
    KindMismatch(ElementId),
    #[error("goal {0} was already consumed")]
    GoalConsumed(ElementId),
    #[error("goal {0} is passed twice")]
    GoalRepeated(ElementId),
    #[error("output {0} is not fresh")]
    NotFresh(ElementId),
    #[error("initial state has no goal")]
    NoInitialGoal,
    #[error("goal {0} undischarged")]
    Undischarged(String),
}

/// Which step failed; `None` means the initial state or the end of the script.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub step: Option<usize>,
    pub reason: FailureReason,
}

/// Result of running a script abstractly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    /// Live goal count after each successfully executed step.
    pub live_goals: Vec<usize>,
    pub failure: Option<Failure>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.failure.is_none()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.failure {
            None => f.write_str("valid"),
            Some(Failure {
                step: Some(step),
                reason,
            }) => write!(f, "invalid at step {}: {}", step + 1, reason),
            Some(Failure { step: None, reason }) => write!(f, "invalid: {}", reason),
        }
    }
}

#[derive(Default)]
struct AbstractState {
    kinds: BTreeMap<String, Kind>,
    // introduction order is kept so the first undischarged goal is reported
    live_goals: Vec<String>,
}

impl AbstractState {
    fn introduce(&mut self, id: &ElementId) -> bool {
        if self.kinds.contains_key(&id.name) {
            return false;
        }
        self.kinds.insert(id.name.clone(), id.kind);
        if id.is_goal() {
            self.live_goals.push(id.name.clone());
        }
        true
    }

    fn step(&mut self, inv: &Invocation) -> Result<(), FailureReason> {
        let mut consumed: Vec<&str> = Vec::new();
        for input in &inv.inputs {
            match self.kinds.get(&input.name) {
                None => return Err(FailureReason::UnknownInput(input.clone())),
                Some(k) if *k != input.kind => {
                    return Err(FailureReason::KindMismatch(input.clone()))
                }
                _ => {}
            }
            if input.is_goal() {
                if consumed.contains(&input.name.as_str()) {
                    return Err(FailureReason::GoalRepeated(input.clone()));
                }
                if !self.live_goals.contains(&input.name) {
                    return Err(FailureReason::GoalConsumed(input.clone()));
                }
                consumed.push(&input.name);
            }
        }
        for (i, out) in inv.outputs.iter().enumerate() {
            let repeated = inv.outputs[..i].iter().any(|o| o.name == out.name);
            if repeated || self.kinds.contains_key(&out.name) {
                return Err(FailureReason::NotFresh(out.clone()));
            }
        }
        self.live_goals.retain(|g| !consumed.contains(&g.as_str()));
        for out in &inv.outputs {
            self.introduce(out);
        }
        Ok(())
    }
}

/// Executes `script` abstractly: initial ids are live, every invocation needs
/// its inputs live, consumes its goal inputs and introduces its outputs. The
/// script is a proof iff every step succeeds and no goal is left.
pub fn check_script(script: &ProofScript) -> ValidationReport {
    let mut state = AbstractState::default();
    let mut live_goals = Vec::with_capacity(script.body.len());
    for id in &script.init {
        if !state.introduce(id) {
            return ValidationReport {
                live_goals,
                failure: Some(Failure {
                    step: None,
                    reason: FailureReason::NotFresh(id.clone()),
                }),
            };
        }
    }
    if state.live_goals.is_empty() {
        return ValidationReport {
            live_goals,
            failure: Some(Failure {
                step: None,
                reason: FailureReason::NoInitialGoal,
            }),
        };
    }
    for (step, inv) in script.body.iter().enumerate() {
        if let Err(reason) = state.step(inv) {
            return ValidationReport {
                live_goals,
                failure: Some(Failure {
                    step: Some(step),
                    reason,
                }),
            };
        }
        live_goals.push(state.live_goals.len());
    }
    let failure = state.live_goals.first().map(|g| Failure {
        step: None,
        reason: FailureReason::Undischarged(g.to_string()),
    });
    ValidationReport {
        live_goals,
        failure,
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    //! Hand transcriptions of the worked examples used across the test suite.

    use super::*;
    use alloc::vec;

    pub fn g(n: &str) -> ElementId {
        ElementId::goal(n)
    }

    pub fn h(n: &str) -> ElementId {
        ElementId::hyp(n)
    }

    pub fn inv(t: &str, i: Vec<ElementId>, o: Vec<ElementId>) -> Invocation {
        Invocation::new(t, i, o)
    }

    /// `(P1 /\ P2) -> (P1 -> P2 -> P3) -> P3`
    pub fn implication() -> ProofScript {
        ProofScript {
            name: "implication".into(),
            init: vec![g("g0")],
            body: vec![
                inv("intro", vec![g("g0")], vec![h("H"), g("g1")]),
                inv(
                    "destruct",
                    vec![h("H"), g("g1")],
                    vec![h("h1"), h("h2"), g("g2")],
                ),
                inv("intro", vec![g("g2")], vec![h("H0"), g("g3")]),
                inv("apply", vec![h("H0"), g("g3")], vec![g("g4"), g("g5")]),
                inv("exact", vec![h("h1"), g("g4")], vec![]),
                inv("exact", vec![h("h2"), g("g5")], vec![]),
            ],
        }
    }

    /// `(A -> D) -> (B -> C) -> ((A \/ B) -> (C \/ D))`
    pub fn disjunction() -> ProofScript {
        ProofScript {
            name: "example".into(),
            init: vec![g("g0")],
            body: vec![
                inv("intro", vec![g("g0")], vec![h("H"), g("g1")]),
                inv("intro", vec![g("g1")], vec![h("H0"), g("g2")]),
                inv("intro", vec![g("g2")], vec![h("H1"), g("g3")]),
                inv(
                    "destruct",
                    vec![h("H1"), g("g3")],
                    vec![h("Ha"), h("Hb"), g("g4"), g("g5")],
                ),
                inv("apply", vec![h("H"), h("Ha")], vec![h("Hc")]),
                inv("right", vec![g("g4")], vec![g("g6")]),
                inv("exact", vec![h("Hc"), g("g6")], vec![]),
                inv("apply", vec![h("H0"), h("Hb")], vec![h("Hd")]),
                inv("left", vec![g("g5")], vec![g("g7")]),
                inv("exact", vec![h("Hd"), g("g7")], vec![]),
            ],
        }
    }

    /// `apply h in h'; exact h'`, goal passed explicitly as the second formal.
    pub fn new_tac() -> TacticDef {
        TacticDef {
            name: "newTac".into(),
            inputs: vec![h("h"), g("g"), h("hp")],
            outputs: vec![h("h2")],
            body: vec![
                inv("apply", vec![h("h"), h("hp")], vec![h("h2")]),
                inv("exact", vec![h("h2"), g("g")], vec![]),
            ],
        }
    }

    /// `intro h0; apply h0; exact h` over formals `g`, `h`.
    pub fn my_tac2() -> TacticDef {
        TacticDef {
            name: "myTac2".into(),
            inputs: vec![g("g"), h("h")],
            outputs: vec![h("h0"), g("g3")],
            body: vec![
                inv("intro", vec![g("g")], vec![h("h0"), g("g1")]),
                inv("apply", vec![h("h0"), g("g1")], vec![g("g2"), g("g3")]),
                inv("exact", vec![h("h"), g("g2")], vec![]),
            ],
        }
    }

    /// `intro h0; apply h0 in h as h1; exact h1`
    pub fn my_tac() -> TacticDef {
        TacticDef {
            name: "myTac".into(),
            inputs: vec![g("g"), h("h")],
            outputs: vec![h("h0"), h("h1")],
            body: vec![
                inv("intro", vec![g("g")], vec![h("h0"), g("g1")]),
                inv("apply", vec![h("h"), h("h0")], vec![h("h1")]),
                inv("exact", vec![h("h1"), g("g1")], vec![]),
            ],
        }
    }

    /// Symmetry half of the motivating pair of dataflow-equality lemmas.
    pub fn eq_sym() -> ProofScript {
        ProofScript {
            name: "eq_sym".into(),
            init: vec![g("g0")],
            body: vec![
                inv(
                    "intros",
                    vec![g("g0")],
                    vec![h("x"), h("y"), h("H"), g("g1")],
                ),
                inv("red", vec![h("H")], vec![h("H'")]),
                inv(
                    "destruct",
                    vec![h("x"), g("g1")],
                    vec![h("h1"), g("g2"), g("g3")],
                ),
                inv("red", vec![h("h1")], vec![h("h1'")]),
                inv("unfold", vec![g("g2")], vec![g("g4")]),
                inv("intros", vec![g("g4")], vec![h("a"), g("g5")]),
                inv("rewrite", vec![h("h1'"), g("g5")], vec![g("g6")]),
                inv("rewrite", vec![h("H'"), g("g6")], vec![g("g7")]),
                inv("reflexivity", vec![g("g7")], vec![]),
                inv("auto", vec![g("g3")], vec![]),
            ],
        }
    }

    /// Transitivity half of the motivating pair.
    pub fn eq_trans() -> ProofScript {
        ProofScript {
            name: "eq_trans".into(),
            init: vec![g("g0")],
            body: vec![
                inv(
                    "intros",
                    vec![g("g0")],
                    vec![h("x"), h("y"), h("z"), h("H1"), h("H2"), g("g1")],
                ),
                inv("red", vec![h("H1")], vec![h("H1'")]),
                inv(
                    "destruct",
                    vec![h("y"), g("g1")],
                    vec![h("k"), g("g2"), g("g3")],
                ),
                inv("unfold", vec![g("g2")], vec![g("g4")]),
                inv("intros", vec![g("g4")], vec![h("b"), g("g5")]),
                inv("rewrite", vec![h("H1'"), g("g5")], vec![g("g6")]),
                inv("apply", vec![h("H2"), g("g6")], vec![g("g7"), g("g8")]),
                inv("split", vec![g("g7")], vec![g("g9"), g("g10")]),
                inv("simpl", vec![g("g9")], vec![g("g11")]),
                inv("assumption", vec![g("g11")], vec![]),
                inv("inversion", vec![h("H2"), g("g10")], vec![h("e"), g("g12")]),
                inv("subst", vec![h("e"), g("g12")], vec![g("g13")]),
                inv("eassumption", vec![g("g13")], vec![]),
                inv("symmetry", vec![g("g8")], vec![g("g14")]),
                inv(
                    "transitivity",
                    vec![h("z"), g("g14")],
                    vec![g("g15"), g("g16")],
                ),
                inv("trivial", vec![g("g15")], vec![]),
                inv("congruence", vec![g("g16")], vec![g("g17")]),
                inv("f_equal", vec![g("g17")], vec![g("g18")]),
                inv("tauto", vec![g("g18")], vec![]),
                inv("auto", vec![g("g3")], vec![]),
            ],
        }
    }

    pub fn motivating_corpus() -> Corpus {
        Corpus {
            proofs: vec![eq_sym(), eq_trans()],
            tactics: vec![],
        }
    }
}
