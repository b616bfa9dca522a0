//! Reachable transition systems: bounded breadth-first exploration that
//! keeps the full derivation on every edge, with DOT and JSON export.

use std::collections::HashMap;

use thiserror::Error;

use crate::sos::{step, Derivation, Semantics};
use crate::syntax::{Label, Process, Spec};

/// One transition of a built transition system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub src: usize,
    pub label: Label,
    pub derivation: Derivation,
    pub tgt: usize,
}

/// Exploration hit the state bound before exhausting the reachable set.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("more than {bound} states are reachable; raise the state bound to explore further")]
pub struct StateBoundExceeded {
    pub bound: usize,
}

/// The reachable part of a spec's transition system. States are numbered in
/// breadth-first discovery order, state 0 is the initial process, and the
/// edges leaving one state are sorted by derivation, so the whole structure
/// is deterministic in the spec.
#[derive(Clone, Debug)]
pub struct LtsGraph {
    semantics: Semantics,
    states: Vec<Process>,
    index: HashMap<Process, usize>,
    edges: Vec<Edge>,
    outgoing: Vec<std::ops::Range<usize>>,
}

/// Explores the states reachable from the spec's initial process, erroring
/// out when more than `max_states` states are found. The initial state is
/// always created.
pub fn reachable(
    spec: &Spec,
    sem: Semantics,
    max_states: usize,
) -> Result<LtsGraph, StateBoundExceeded> {
    reachable_from(spec.init(), spec, sem, max_states)
}

/// Explores the states reachable from an arbitrary root process under the
/// spec's declarations. State 0 is the root.
pub fn reachable_from(
    root: &Process,
    spec: &Spec,
    sem: Semantics,
    max_states: usize,
) -> Result<LtsGraph, StateBoundExceeded> {
    let init = root.clone();
    let mut states = vec![init.clone()];
    let mut index = HashMap::from([(init, 0)]);
    let mut edges: Vec<Edge> = Vec::new();
    let mut outgoing = Vec::new();
    let mut next = 0;
    while next < states.len() {
        let p = states[next].clone();
        let start = edges.len();
        for d in step(&p, spec, sem) {
            let target = d.target();
            let tgt = match index.get(&target) {
                Some(&i) => i,
                None => {
                    if states.len() >= max_states.max(1) {
                        return Err(StateBoundExceeded { bound: max_states });
                    }
                    let i = states.len();
                    states.push(target.clone());
                    index.insert(target, i);
                    i
                }
            };
            edges.push(Edge { src: next, label: d.label(), derivation: d, tgt });
        }
        outgoing.push(start..edges.len());
        next += 1;
    }
    Ok(LtsGraph { semantics: sem, states, index, edges, outgoing })
}

impl LtsGraph {
    pub fn semantics(&self) -> Semantics {
        self.semantics
    }

    pub fn states(&self) -> &[Process] {
        &self.states
    }

    pub fn init(&self) -> usize {
        0
    }

    pub fn index_of(&self, p: &Process) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// The edges leaving state `i`, sorted by derivation.
    pub fn outgoing(&self, i: usize) -> &[Edge] {
        &self.edges[self.outgoing[i].clone()]
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph lts {\n");
        out.push_str("  rankdir=LR;\n  node [shape=box, fontname=\"monospace\"];\n");
        for (i, p) in self.states.iter().enumerate() {
            let style = if i == 0 { ", penwidth=2" } else { "" };
            out.push_str(&format!("  s{i} [label=\"{}\"{style}];\n", dot_escape(&p.to_string())));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "  s{} -> s{} [label=\"{}\"];\n",
                e.src,
                e.tgt,
                dot_escape(&e.label.to_string())
            ));
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "semantics": self.semantics.to_string(),
            "init": 0,
            "states": self.states.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "edges": self.edges.iter().map(|e| serde_json::json!({
                "src": e.src,
                "label": e.label.to_string(),
                "tgt": e.tgt,
                "derivation": e.derivation.to_string(),
            })).collect::<Vec<_>>(),
        })
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
