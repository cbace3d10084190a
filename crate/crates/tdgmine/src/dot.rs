//! Graphviz export of dependence graphs.

use std::fmt::Write as _;

use tdgmine_core::Tdg;

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' | '\\' => {
                out.push('\\');
                out.push(c);
            }
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// DOT text for `g`: nodes `n<id>` labelled with their tactic, edges
/// labelled `(o<out slot>,i<in slot>)`, everything in id order.
pub fn export_dot(g: &Tdg) -> String {
    if g.node_count() == 0 {
        return "digraph{}\n".to_string();
    }
    let mut out = String::from("digraph tdg {\n");
    for n in g.node_ids() {
        let _ = writeln!(out, "  n{} [label={}];", n.index(), quote(&g.label(n).name));
    }
    let mut edges: Vec<_> = g.edges().iter().collect();
    edges.sort_by_key(|e| (e.src, e.dst, e.out_slot, e.in_slot));
    for e in edges {
        let _ = writeln!(
            out,
            "  n{} -> n{} [label=\"(o{},i{})\"];",
            e.src.index(),
            e.dst.index(),
            e.out_slot,
            e.in_slot
        );
    }
    out.push_str("}\n");
    out
}
