//! Trace format parsing, emission and rendering.

#[path = "../../core/tests/support/gen.rs"]
mod gen;

use std::fs;
use std::path::Path;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tdgmine::dot::export_dot;
use tdgmine::format::{emit_corpus, parse_corpus, ParseError};
use tdgmine::ltac::emit_ltac;
use tdgmine_core::model::FailureReason;
use tdgmine_core::{build_proof_tdg, check_script, learn_library, Config, Tdg};

fn fixture(name: &str) -> String {
    fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("tests/fixtures")
            .join(name),
    )
    .unwrap()
}

#[test]
fn implication_parses_and_checks() {
    let c = parse_corpus(&fixture("implication.trace")).unwrap();
    assert_eq!(c.proofs.len(), 1);
    assert_eq!(c.proofs[0].body.len(), 6);
    let r = check_script(&c.proofs[0]);
    assert!(r.is_valid());
    assert_eq!(r.live_goals, [1, 1, 1, 2, 1, 0]);
}

#[test]
fn deleting_the_last_step_leaves_a_goal() {
    let mut p = parse_corpus(&fixture("implication.trace"))
        .unwrap()
        .proofs
        .remove(0);
    p.body.pop();
    let f = check_script(&p).failure.unwrap();
    assert_eq!(f.reason, FailureReason::Undischarged("g5".into()));
    assert_eq!(f.reason.to_string(), "goal g5 undischarged");
}

#[test]
fn empty_body_leaves_the_initial_goal() {
    let c = parse_corpus("proof p { init [g:g0] }").unwrap();
    assert_eq!(
        check_script(&c.proofs[0])
            .failure
            .unwrap()
            .reason
            .to_string(),
        "goal g0 undischarged"
    );
}

#[test]
fn empty_text_is_the_empty_corpus() {
    let c = parse_corpus("").unwrap();
    assert!(c.proofs.is_empty() && c.tactics.is_empty());
    assert_eq!(emit_corpus(&c), "");
    assert!(parse_corpus("# only a comment\n\n")
        .unwrap()
        .proofs
        .is_empty());
}

#[test]
fn reintroduced_goal_is_rejected() {
    let e = parse_corpus("proof p {\n  init [g:g0]\n  intro [g:g0] -> [h:H, g:g0]\n}").unwrap_err();
    assert!(
        matches!(e, ParseError::DuplicateId { line: 3, ref id, .. } if id == "g:g0"),
        "{e}"
    );
}

#[test]
fn repeated_proof_name_is_rejected() {
    let one = "proof p { init [g:g0] auto [g:g0] -> [] }\n";
    let e = parse_corpus(&format!("{one}{one}")).unwrap_err();
    assert!(
        matches!(e, ParseError::DuplicateProofName { line: 2, .. }),
        "{e}"
    );
}

#[test]
fn emission_is_canonical() {
    let c = parse_corpus(&fixture("implication.trace")).unwrap();
    let text = emit_corpus(&c);
    assert!(text.starts_with("proof implication {\n  init [g:g0]\n  intro [g:g0] -> [h:H, g:g1]\n"));
    assert_eq!(text.lines().count(), 2 + 6 + 1);
    assert!(!text.contains('\r'));
}

#[test]
fn fixtures_round_trip() {
    for name in [
        "implication.trace",
        "disjunction.trace",
        "newtac.trace",
        "motivating.trace",
    ] {
        let c = parse_corpus(&fixture(name)).unwrap();
        let text = emit_corpus(&c);
        let again = parse_corpus(&text).unwrap();
        assert_eq!(again, c, "{name}");
        assert_eq!(emit_corpus(&again), text, "{name}");
    }
}

#[test]
fn tactics_are_emitted_before_proofs() {
    let text = format!(
        "{}\n{}",
        fixture("disjunction.trace"),
        fixture("newtac.trace")
    );
    let out = emit_corpus(&parse_corpus(&text).unwrap());
    assert!(out.starts_with("tactic newTac"));
    assert!(out.contains("}\n\nproof example {"));
}

#[test]
fn learned_tactics_render_with_branches() {
    let c = parse_corpus(&fixture("motivating.trace")).unwrap();
    let lib = learn_library(&c, &Config::default()).unwrap();
    let lines: Vec<String> = lib.tactics.iter().map(emit_ltac).collect();
    assert_eq!(
        lines[0],
        "Ltac custom0 H0 := destruct H0; [unfold; intros | auto]."
    );
    assert_eq!(lines[1], "Ltac custom1 H0 := red in H0; rewrite H1.");
}

#[test]
fn implication_dot() {
    let c = parse_corpus(&fixture("implication.trace")).unwrap();
    let (g, _) = build_proof_tdg(&c.proofs[0]).unwrap();
    let dot = export_dot(&g);
    assert_eq!(
        dot.lines()
            .filter(|l| l.contains("[label=") && !l.contains("->"))
            .count(),
        7
    );
    assert!(dot.contains("  n3 [label=\"intro\"];"));
    assert!(dot.contains("  n4 [label=\"apply\"];"));
    assert!(dot.contains("  n3 -> n4 [label=\"(o1,i1)\"];"));
    assert_eq!(dot, export_dot(&g));
    assert_eq!(export_dot(&Tdg::new()), "digraph{}\n");
}

proptest! {
    #[test]
    fn random_corpora_round_trip(seed in any::<u64>(), proofs in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = gen::Gen { rng: &mut rng, width: 10 }.corpus(proofs, 15);
        let text = emit_corpus(&c);
        prop_assert_eq!(parse_corpus(&text).unwrap(), c);
    }

    #[test]
    fn odd_names_round_trip(tactic in "[ -~]{1,12}", hyp in "[a-zA-Z0-9_'<> -]{1,8}") {
        let text = format!(
            "proof p {{\n  init [g:g0, h:{}]\n  {} [h:{}, g:g0] -> []\n}}\n",
            quote(&hyp), quote(&tactic), quote(&hyp)
        );
        let c = parse_corpus(&text).unwrap();
        prop_assert_eq!(&c.proofs[0].body[0].tactic, &tactic);
        prop_assert_eq!(parse_corpus(&emit_corpus(&c)).unwrap(), c);
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}
