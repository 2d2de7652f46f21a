//! Graphviz output.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::BuchiHybridAutomaton;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// One box per location showing its name and flow constraints. Final
/// locations get a double border, initial ones a bold outline. Edges
/// between the same pair of locations are merged into one arrow.
pub fn export_dot(h: &BuchiHybridAutomaton) -> String {
    let mut out = String::from("digraph bha {\n  rankdir=LR;\n  node [shape=box];\n");
    for l in 0..h.num_locations() {
        let dynamics: Vec<&str> = h.dynamics(l).iter().map(|c| c.as_str()).collect();
        let dynamics = if dynamics.is_empty() {
            "true".to_string()
        } else {
            dynamics.join(" & ")
        };
        let mut attrs = format!("label=\"{}\\n{}\"", escape(h.name(l)), escape(&dynamics));
        if h.is_final(l) {
            attrs.push_str(", peripheries=2");
        }
        if h.init().contains(&l) {
            attrs.push_str(", style=bold");
        }
        let _ = writeln!(out, "  l{l} [{attrs}];");
    }
    let mut grouped: BTreeMap<(usize, usize), Vec<&str>> = BTreeMap::new();
    for e in h.edges() {
        grouped.entry((e.src, e.dst)).or_default().push(e.action.display_name());
    }
    for ((src, dst), actions) in grouped {
        let _ = writeln!(out, "  l{src} -> l{dst} [label=\"{}\"];", escape(&actions.join(", ")));
    }
    out.push_str("}\n");
    out
}
