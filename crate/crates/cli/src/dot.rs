//! Graphviz export.

use std::collections::BTreeSet;
use std::fmt::Write;

use relhyp_core::quotient::ClassKind;
use relhyp_core::{CoreGraph, CylinderPartition, Word};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Core graph with letter-labelled edges; the basepoint is drawn doubled.
pub fn core_graph_dot(name: &str, core: &CoreGraph) -> String {
    let mut out = format!("digraph {} {{\n  rankdir=LR;\n", quote(name));
    for v in 0..core.vertex_count() {
        let shape = if v == core.base() {
            "doublecircle"
        } else {
            "circle"
        };
        writeln!(out, "  v{v} [shape={shape}, label=\"{v}\"];").unwrap();
    }
    for (u, l, v) in core.edges() {
        writeln!(out, "  v{u} -> v{v} [label=\"{l}\"];").unwrap();
    }
    out.push_str("}\n");
    out
}

/// Several core graphs as clusters of one digraph.
pub fn collection_dot(cores: &[(String, &CoreGraph)]) -> String {
    let mut out = String::from("digraph subgroups {\n  rankdir=LR;\n");
    for (k, (name, core)) in cores.iter().enumerate() {
        writeln!(out, "  subgraph cluster_{k} {{\n    label={};", quote(name)).unwrap();
        for v in 0..core.vertex_count() {
            let shape = if v == core.base() {
                "doublecircle"
            } else {
                "circle"
            };
            writeln!(out, "    h{k}v{v} [shape={shape}, label=\"{v}\"];").unwrap();
        }
        for (u, l, v) in core.edges() {
            writeln!(out, "    h{k}v{u} -> h{k}v{v} [label=\"{l}\"];").unwrap();
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}

/// Class nerve of a partition: one node per class, joined when member
/// cylinders share their length-`(n−1)` prefix.
pub fn partition_dot(p: &CylinderPartition) -> String {
    let mut out = format!("digraph depth_{} {{\n", p.depth);
    for (i, class) in p.classes.iter().enumerate() {
        let label = match &class.kind {
            ClassKind::Parabolic { cosets } => {
                let names: Vec<String> = cosets.iter().map(|c| c.to_string()).collect();
                format!("{} ({} cyl)", names.join(", "), class.cylinders.len())
            }
            ClassKind::Singleton => class.cylinders[0].to_string(),
        };
        let shape = match class.kind {
            ClassKind::Parabolic { .. } => "box",
            ClassKind::Singleton => "ellipse",
        };
        writeln!(out, "  c{i} [shape={shape}, label={}];", quote(&label)).unwrap();
    }
    let parents: Vec<BTreeSet<Word>> = p
        .classes
        .iter()
        .map(|c| c.cylinders.iter().map(|w| w.prefix(p.depth - 1)).collect())
        .collect();
    for i in 0..parents.len() {
        for j in i + 1..parents.len() {
            if !parents[i].is_disjoint(&parents[j]) {
                writeln!(out, "  c{i} -> c{j} [dir=none];").unwrap();
            }
        }
    }
    out.push_str("}\n");
    out
}
