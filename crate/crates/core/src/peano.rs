//! Baseline tactic discovery by anti-unification of consecutive invocation
//! runs, with purely textual refactoring.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::discovery::fresh_tactic_name;
use crate::model::{
    check_script, Corpus, ElementId, Invocation, Kind, ProofScript, Signature, TacticDef,
};
use crate::tdg::NameAllocator;

/// One step of a generalized run; ids are replaced by parameter indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GenStep {
    pub sig: Signature,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
}

/// A run of tactic applications with its arguments abstracted. Parameters
/// are numbered in order of first occurrence.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Generalization {
    pub steps: Vec<GenStep>,
    pub params: Vec<Kind>,
}

impl Generalization {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn hypothesis_params(&self) -> usize {
        self.params
            .iter()
            .filter(|k| **k == Kind::Hypothesis)
            .count()
    }

    /// Parameters whose first occurrence is as an input.
    fn formal_inputs(&self) -> Vec<usize> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for s in &self.steps {
            for &p in &s.inputs {
                if seen.insert(p) {
                    out.push(p);
                }
            }
            seen.extend(s.outputs.iter().copied());
        }
        out
    }

    /// Produced hypotheses plus produced goals not consumed inside the run.
    fn formal_outputs(&self) -> Vec<usize> {
        let consumed: BTreeSet<usize> = self
            .steps
            .iter()
            .flat_map(|s| s.inputs.iter().copied())
            .collect();
        self.steps
            .iter()
            .flat_map(|s| s.outputs.iter().copied())
            .filter(|&p| self.params[p] == Kind::Hypothesis || !consumed.contains(&p))
            .collect()
    }

    /// Binds every parameter against `seg`, or `None` if `seg` is not an
    /// instance.
    pub fn match_segment(&self, seg: &[Invocation]) -> Option<Vec<ElementId>> {
        if seg.len() != self.steps.len() {
            return None;
        }
        let mut binding: Vec<Option<&ElementId>> = vec![None; self.params.len()];
        for (s, inv) in self.steps.iter().zip(seg) {
            if inv.tactic != s.sig.name
                || inv.inputs.len() != s.inputs.len()
                || inv.outputs.len() != s.outputs.len()
            {
                return None;
            }
            let pairs = s
                .inputs
                .iter()
                .zip(&inv.inputs)
                .chain(s.outputs.iter().zip(&inv.outputs));
            for (&p, id) in pairs {
                if id.kind != self.params[p] {
                    return None;
                }
                match binding[p] {
                    None => binding[p] = Some(id),
                    Some(b) if b == id => {}
                    Some(_) => return None,
                }
            }
        }
        binding.into_iter().map(|b| b.cloned()).collect()
    }

    /// Tactic definition with fresh formal names.
    pub fn to_tactic(&self, name: &str) -> TacticDef {
        let mut names = NameAllocator::new();
        let mut ids: Vec<Option<ElementId>> = vec![None; self.params.len()];
        let inputs: Vec<ElementId> = self
            .formal_inputs()
            .into_iter()
            .map(|p| {
                let id = names.fresh(self.params[p]);
                ids[p] = Some(id.clone());
                id
            })
            .collect();
        let mut body = Vec::new();
        for s in &self.steps {
            for &p in &s.outputs {
                ids[p] = Some(names.fresh(self.params[p]));
            }
            let get = |p: &usize| ids[*p].clone().expect("bound before use");
            body.push(Invocation {
                tactic: s.sig.name.clone(),
                inputs: s.inputs.iter().map(get).collect(),
                outputs: s.outputs.iter().map(get).collect(),
            });
        }
        let outputs = self
            .formal_outputs()
            .into_iter()
            .map(|p| ids[p].clone().expect("produced"))
            .collect();
        TacticDef {
            name: name.into(),
            inputs,
            outputs,
            body,
        }
    }

    /// The call replacing an instance with the given binding.
    fn call(&self, name: &str, binding: &[ElementId]) -> Invocation {
        Invocation {
            tactic: name.into(),
            inputs: self
                .formal_inputs()
                .into_iter()
                .map(|p| binding[p].clone())
                .collect(),
            outputs: self
                .formal_outputs()
                .into_iter()
                .map(|p| binding[p].clone())
                .collect(),
        }
    }
}

/// Least general generalization of two equally long runs: tactic
/// signatures must agree step by step, and each distinct pair of
/// co-occurring ids becomes one parameter.
pub fn anti_unify(a: &[Invocation], b: &[Invocation]) -> Option<Generalization> {
    if a.len() != b.len() {
        return None;
    }
    let mut param_of: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    let mut params = Vec::new();
    let mut steps = Vec::with_capacity(a.len());
    for (x, y) in a.iter().zip(b) {
        let sig = x.signature();
        if sig != y.signature() {
            return None;
        }
        let mut slots = [Vec::new(), Vec::new()];
        for (slot, (xs, ys)) in slots
            .iter_mut()
            .zip([(&x.inputs, &y.inputs), (&x.outputs, &y.outputs)])
        {
            for (i, j) in xs.iter().zip(ys) {
                let p = *param_of
                    .entry((i.name.as_str(), j.name.as_str()))
                    .or_insert_with(|| {
                        params.push(i.kind);
                        params.len() - 1
                    });
                slot.push(p);
            }
        }
        let [inputs, outputs] = slots;
        steps.push(GenStep {
            sig,
            inputs,
            outputs,
        });
    }
    Some(Generalization { steps, params })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeanoConfig {
    /// Only match runs whose steps all work on the same subgoal.
    pub same_branch: bool,
    pub max_tactics: Option<usize>,
    /// Longest run considered.
    pub max_len: Option<usize>,
}

impl Default for PeanoConfig {
    fn default() -> Self {
        PeanoConfig {
            same_branch: true,
            max_tactics: None,
            max_len: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeanoTactic {
    pub tactic: TacticDef,
    pub generalization: Generalization,
    /// `(length - 1) * number of proofs with an occurrence`.
    pub score: usize,
}

/// Branch of every invocation in script order: a step consuming a goal
/// belongs to that goal's branch, where each multi-goal step opens one
/// branch per produced goal. A step using only hypotheses acts on the goal
/// in focus, which is the one consumed next.
fn branch_paths(p: &ProofScript) -> Vec<Vec<(usize, usize)>> {
    let mut goal_path: BTreeMap<&str, Vec<(usize, usize)>> = BTreeMap::new();
    let init_goals: Vec<&ElementId> = p.init.iter().filter(|e| e.is_goal()).collect();
    for (k, gid) in init_goals.iter().enumerate() {
        let path = if init_goals.len() > 1 {
            vec![(usize::MAX, k)]
        } else {
            Vec::new()
        };
        goal_path.insert(&gid.name, path);
    }
    let mut paths: Vec<Option<Vec<(usize, usize)>>> = vec![None; p.body.len()];
    for (i, inv) in p.body.iter().enumerate() {
        let Some(gin) = inv.inputs.iter().find(|e| e.is_goal()) else {
            continue;
        };
        let path = goal_path
            .get(gin.name.as_str())
            .cloned()
            .unwrap_or_default();
        let goals: Vec<&ElementId> = inv.outputs.iter().filter(|e| e.is_goal()).collect();
        for (k, gout) in goals.iter().enumerate() {
            let mut q = path.clone();
            if goals.len() > 1 {
                q.push((i, k));
            }
            goal_path.insert(&gout.name, q);
        }
        paths[i] = Some(path);
    }
    let mut next: Option<Vec<(usize, usize)>> = None;
    let mut out = vec![Vec::new(); p.body.len()];
    for i in (0..p.body.len()).rev() {
        if paths[i].is_some() {
            next = paths[i].clone();
        }
        out[i] = paths[i]
            .clone()
            .or_else(|| next.clone())
            .unwrap_or_default();
    }
    out
}

struct Prepared<'a> {
    proofs: &'a [ProofScript],
    paths: Vec<Vec<Vec<(usize, usize)>>>,
    same_branch: bool,
}

impl Prepared<'_> {
    fn new<'a>(corpus: &'a Corpus, cfg: &PeanoConfig) -> Prepared<'a> {
        Prepared {
            proofs: &corpus.proofs,
            paths: corpus.proofs.iter().map(branch_paths).collect(),
            same_branch: cfg.same_branch,
        }
    }

    fn allowed(&self, proof: usize, start: usize, len: usize) -> bool {
        !self.same_branch || {
            let p = &self.paths[proof];
            p[start..start + len].iter().all(|x| *x == p[start])
        }
    }

    fn occurs_in(&self, proof: usize, g: &Generalization) -> bool {
        let body = &self.proofs[proof].body;
        let l = g.len();
        l <= body.len()
            && (0..=body.len() - l)
                .any(|s| self.allowed(proof, s, l) && g.match_segment(&body[s..s + l]).is_some())
    }
}

/// Exhaustive pairwise alignment of consecutive runs (length at least 2)
/// across distinct proofs; returns the generalization of best score that
/// can actually refactor some proof.
pub fn peano_learn_tactic(corpus: &Corpus, cfg: &PeanoConfig) -> Option<PeanoTactic> {
    let prep = Prepared::new(corpus, cfg);
    let proofs = &corpus.proofs;
    let mut gens: BTreeSet<Generalization> = BTreeSet::new();
    for i in 0..proofs.len() {
        for j in i + 1..proofs.len() {
            let (a, b) = (&proofs[i].body, &proofs[j].body);
            for sa in 0..a.len() {
                for sb in 0..b.len() {
                    let max = (a.len() - sa)
                        .min(b.len() - sb)
                        .min(cfg.max_len.unwrap_or(usize::MAX));
                    for l in 2..=max {
                        if !prep.allowed(i, sa, l) || !prep.allowed(j, sb, l) {
                            break;
                        }
                        match anti_unify(&a[sa..sa + l], &b[sb..sb + l]) {
                            Some(g) => {
                                gens.insert(g);
                            }
                            None => break,
                        }
                    }
                }
            }
        }
    }
    let name = fresh_tactic_name(corpus);
    let mut scored: Vec<(usize, Generalization)> = gens
        .into_iter()
        .map(|g| {
            let count = (0..proofs.len()).filter(|&p| prep.occurs_in(p, &g)).count();
            ((g.len() - 1) * count, g)
        })
        .collect();
    // best score first, then longer, then canonical order
    scored.sort_by(|x, y| {
        y.0.cmp(&x.0)
            .then(y.1.len().cmp(&x.1.len()))
            .then(x.1.cmp(&y.1))
    });
    for (score, g) in scored {
        if score == 0 {
            break;
        }
        let tactic = g.to_tactic(&name);
        if tactic.validate().is_err() {
            continue;
        }
        let usable = proofs
            .iter()
            .enumerate()
            .any(|(p, _)| textual_refactor_in(&prep, p, &g, &name).1 > 0);
        if usable {
            return Some(PeanoTactic {
                tactic,
                generalization: g,
                score,
            });
        }
    }
    None
}

fn textual_refactor_in(
    prep: &Prepared<'_>,
    proof: usize,
    g: &Generalization,
    name: &str,
) -> (ProofScript, usize) {
    let script = &prep.proofs[proof];
    let l = g.len();
    let mut current = script.clone();
    let mut applications = 0;
    // positions refer to the original body; `shift` tracks removed steps
    let mut shift = 0;
    let mut s = 0;
    while s + l <= script.body.len() {
        let seg = &script.body[s..s + l];
        if prep.allowed(proof, s, l) {
            if let Some(binding) = g.match_segment(seg) {
                let mut candidate = current.clone();
                let at = s - shift;
                candidate.body.splice(at..at + l, [g.call(name, &binding)]);
                if check_script(&candidate).is_valid() {
                    current = candidate;
                    applications += 1;
                    shift += l - 1;
                    s += l;
                    continue;
                }
            }
        }
        s += 1;
    }
    (current, applications)
}

/// Replaces leftmost non-overlapping instances of the generalization by calls
/// of `name`, skipping replacements that would break the proof.
pub fn textual_refactor(
    script: &ProofScript,
    g: &Generalization,
    name: &str,
    cfg: &PeanoConfig,
) -> (ProofScript, usize) {
    let corpus = Corpus {
        proofs: vec![script.clone()],
        tactics: vec![],
    };
    let prep = Prepared::new(&corpus, cfg);
    textual_refactor_in(&prep, 0, g, name)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeanoStep {
    pub name: String,
    pub score: usize,
    pub applications: usize,
    pub size_before: usize,
    pub size_after: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeanoLibrary {
    pub tactics: Vec<TacticDef>,
    /// Sequence patterns behind `tactics`, index for index.
    pub generalizations: Vec<Generalization>,
    pub corpus: Corpus,
    pub steps: Vec<PeanoStep>,
}

impl PeanoLibrary {
    /// Proof steps saved over all learned tactics.
    pub fn total_savings(&self) -> usize {
        self.steps
            .iter()
            .map(|s| s.size_before - s.size_after)
            .sum()
    }
}

pub fn peano_learn_library(corpus: &Corpus, cfg: &PeanoConfig) -> PeanoLibrary {
    let mut current = corpus.clone();
    let mut tactics = Vec::new();
    let mut generalizations = Vec::new();
    let mut steps = Vec::new();
    while cfg.max_tactics.is_none_or(|m| tactics.len() < m) {
        let Some(t) = peano_learn_tactic(&current, cfg) else {
            break;
        };
        let prep = Prepared::new(&current, cfg);
        let mut applications = 0;
        let proofs = (0..current.proofs.len())
            .map(|p| {
                let (s, k) = textual_refactor_in(&prep, p, &t.generalization, &t.tactic.name);
                applications += k;
                s
            })
            .collect();
        if applications == 0 {
            break;
        }
        let size_before = current.size();
        let mut next_tactics = current.tactics.clone();
        next_tactics.push(t.tactic.clone());
        let next = Corpus {
            proofs,
            tactics: next_tactics,
        };
        steps.push(PeanoStep {
            name: t.tactic.name.clone(),
            score: t.score,
            applications,
            size_before,
            size_after: next.size(),
        });
        tactics.push(t.tactic);
        generalizations.push(t.generalization);
        current = next;
    }
    PeanoLibrary {
        tactics,
        generalizations,
        corpus: current,
        steps,
    }
}

/// Rewrites `corpus` with every tactic of `lib` in order, returning the new
/// corpus and the number of calls inserted per tactic.
pub fn peano_refactor_corpus(
    corpus: &Corpus,
    lib: &PeanoLibrary,
    cfg: &PeanoConfig,
) -> (Corpus, Vec<usize>) {
    let mut current = corpus.clone();
    let mut usage = Vec::with_capacity(lib.tactics.len());
    for (t, g) in lib.tactics.iter().zip(&lib.generalizations) {
        let prep = Prepared::new(&current, cfg);
        let mut k = 0;
        let proofs = (0..current.proofs.len())
            .map(|p| {
                let (s, n) = textual_refactor_in(&prep, p, g, &t.name);
                k += n;
                s
            })
            .collect();
        let mut tactics = current.tactics.clone();
        tactics.push(t.clone());
        current = Corpus { proofs, tactics };
        usage.push(k);
    }
    (current, usage)
}
