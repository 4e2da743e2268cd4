//! Graphviz export.
//!
//! Flows are drawn as two columns of border vertices (left cut, right cut);
//! productive edges are bold. A juxtaposition puts the flows side by side,
//! gluing equal borders.

use std::fmt::Write;

use crate::factorization::FactorizationTree;
use crate::flow::{Flow, FlowGraph, Node, Side};
use crate::machine::{Reading, TwoWayTransducer};
use crate::monoid::FlowMonoid;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn vertex_label(t: &TwoWayTransducer, n: &Node) -> String {
    let arrow = match n.reading {
        Reading::Right => "→",
        Reading::Left => "←",
    };
    format!("{}{arrow}", n.name(t))
}

/// Column `c` of a juxtaposition: cut `c`, one cluster per column.
fn columns(t: &TwoWayTransducer, flows: &[&FlowGraph], out: &mut String) {
    let mut cols: Vec<&[Node]> = flows.iter().map(|f| f.left.as_slice()).collect();
    if let Some(last) = flows.last() {
        cols.push(&last.right);
    }
    for (c, nodes) in cols.iter().enumerate() {
        let _ = writeln!(out, "  subgraph cluster_{c} {{\n    label={};\n    style=dotted;", quote(&format!("cut {c}")));
        for (i, n) in nodes.iter().enumerate() {
            let _ = writeln!(out, "    c{c}_{i} [label={}];", quote(&vertex_label(t, n)));
        }
        for i in 1..nodes.len() {
            let _ = writeln!(out, "    c{c}_{} -> c{c}_{i} [style=invis];", i - 1);
        }
        out.push_str("  }\n");
    }
    for (k, f) in flows.iter().enumerate() {
        for e in &f.edges {
            let col = |s: Side| if s == Side::L { k } else { k + 1 };
            let style = if e.productive { "bold" } else { "solid" };
            let _ = writeln!(
                out,
                "  c{}_{} -> c{}_{} [style={style}, label={}];",
                col(e.from.side),
                e.from.index,
                col(e.to.side),
                e.to.index,
                quote(e.kind())
            );
        }
    }
}

pub fn flow_to_dot(t: &TwoWayTransducer, f: &Flow) -> String {
    match f {
        Flow::Bottom => "digraph flow {\n  bottom [label=\"⊥\", shape=plaintext];\n}\n".into(),
        Flow::Graph(g) => juxtaposition_to_dot(t, &[g]),
    }
}

pub fn juxtaposition_to_dot(t: &TwoWayTransducer, flows: &[&FlowGraph]) -> String {
    let mut out = String::from("digraph flow {\n  rankdir=LR;\n  node [shape=circle, fontsize=10];\n");
    columns(t, flows, &mut out);
    out.push_str("}\n");
    out
}

/// Tree nodes show their input interval and label; idempotent nodes are
/// boxes.
pub fn tree_to_dot(tree: &FactorizationTree, m: Option<&FlowMonoid>) -> String {
    let mut out = String::from("digraph tree {\n  node [fontsize=10];\n");
    for (i, n) in tree.nodes.iter().enumerate() {
        let shape = if tree.is_idempotent_node(i) { "box" } else { "ellipse" };
        let word = m.map(|m| {
            let w: String = m.letters(n.label).iter().map(|s| s.to_string()).collect();
            format!(" = {w}")
        });
        let label = format!("{} e{}{}", n.interval, n.label, word.unwrap_or_default());
        let _ = writeln!(out, "  n{i} [shape={shape}, label={}];", quote(&label));
        for &c in &n.children {
            let _ = writeln!(out, "  n{i} -> n{c};");
        }
    }
    out.push_str("}\n");
    out
}

pub fn transducer_to_dot(t: &TwoWayTransducer) -> String {
    let mut out = String::from("digraph transducer {\n  rankdir=LR;\n");
    for q in 0..t.num_states() {
        let shape = if t.is_final(q) { "doublecircle" } else { "circle" };
        let dir = match t.reading(q) {
            Reading::Right => "→",
            Reading::Left => "←",
        };
        let _ = writeln!(out, "  s{q} [shape={shape}, label={}];", quote(&format!("{} {dir}", t.state_name(q))));
        if t.is_initial(q) {
            let _ = writeln!(out, "  init{q} [shape=point];\n  init{q} -> s{q};");
        }
    }
    for tr in t.transitions() {
        let out_word = if tr.output.is_empty() { "ε" } else { &tr.output };
        let _ = writeln!(out, "  s{} -> s{} [label={}];", tr.source, tr.target, quote(&format!("{} / {out_word}", tr.read)));
    }
    out.push_str("}\n");
    out
}
