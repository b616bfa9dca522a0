//! Bounded analysis over complete paths: enumeration, liveness checking,
//! and strong bisimilarity.
//!
//! Completeness of a path (progressing, just, admitted by the fairness
//! assumptions) is not decidable by inspecting any finite prefix alone, so
//! every search here is bounded: finite paths up to a length, lassos up to
//! a stem length and a simple-cycle length, decompositions up to a lift
//! bound. A `Holds` verdict therefore means "no complete counterexample
//! within the bounds", and the bounds travel with the verdict.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::abstraction::{abstract_of, AbstractTransition};
use crate::justness::{just_def1, just_s_via_lifts, non_blocking, progressing};
use crate::ltl::{admitted_by, eval_s, label_atoms_only, FairnessSpec, LtlError, LtlFormula};
use crate::lts::{reachable, reachable_from, Edge, LtsGraph, StateBoundExceeded};
use crate::paths::{FinitePath, Lasso, Path, SState};
use crate::sos::Semantics;
use crate::syntax::{Label, Process, Spec};

/// Search bounds for the bounded-completeness analyses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    /// Maximum number of transitions in a lasso stem.
    pub stem: usize,
    /// Maximum number of transitions in a lasso cycle. Cycles are simple:
    /// no process state repeats within one period.
    pub cycle: usize,
    /// Unroll bound for lifting transition paths to derivation paths.
    pub lift: usize,
    /// Maximum number of transitions in a finite path.
    pub finlen: usize,
    /// State-space cap; exceeding it aborts the analysis.
    pub max_states: usize,
}

impl Default for Bounds {
    fn default() -> Bounds {
        Bounds { stem: 8, cycle: 8, lift: 2, finlen: 12, max_states: 100_000 }
    }
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "stem <= {}, cycle <= {}, lift <= {}, finite <= {}, states <= {}",
            self.stem, self.cycle, self.lift, self.finlen, self.max_states
        )
    }
}

/// Outcome of a bounded liveness check.
#[derive(Debug, Clone)]
pub enum Verdict {
    /// No complete path within the bounds violates the property.
    Holds { bounds: Bounds },
    /// A complete path violating the property, with the fairness
    /// assumptions satisfied along it.
    Fails { counterexample: Path<SState> },
    /// The search could not be carried out, for the stated reason.
    Unknown { reason: String },
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds { .. })
    }

    pub fn fails(&self) -> bool {
        matches!(self, Verdict::Fails { .. })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Holds { bounds } => {
                write!(f, "holds for every complete path within {bounds}")
            }
            Verdict::Fails { counterexample } => {
                write!(f, "fails; complete counterexample:\n{counterexample}")
            }
            Verdict::Unknown { reason } => write!(f, "unknown: {reason}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Ltl(#[from] LtlError),
    #[error(transparent)]
    StateBound(#[from] StateBoundExceeded),
    /// The two justness checkers are required to agree; a split verdict is
    /// reported rather than silently resolved in either direction.
    #[error("justness checkers disagree on {path}: blocked-set analysis says {def1}, \
             lift analysis says {lifts}; raise the lift bound")]
    CheckerDisagreement { path: String, def1: bool, lifts: bool },
}

fn proc_state(graph: &LtsGraph, i: usize) -> SState {
    SState::Proc(graph.states()[i].clone())
}

fn mid_state(graph: &LtsGraph, e: &Edge) -> SState {
    SState::Mid {
        src: graph.states()[e.src].clone(),
        label: e.label.clone(),
        tgt: graph.states()[e.tgt].clone(),
    }
}

fn finite_from_edges(graph: &LtsGraph, start: usize, edges: &[&Edge]) -> FinitePath<SState> {
    let mut states = Vec::with_capacity(2 * edges.len() + 1);
    states.push(proc_state(graph, start));
    for e in edges {
        states.push(mid_state(graph, e));
        states.push(proc_state(graph, e.tgt));
    }
    FinitePath::new(states).expect("walks through the graph are adjacent")
}

/// The lasso whose stem follows `stem_edges` from the initial state and
/// whose cycle follows `cycle_edges` starting at rotation `r`.
fn lasso_from(
    graph: &LtsGraph,
    stem_edges: &[&Edge],
    cycle_edges: &[&Edge],
    r: usize,
) -> Lasso<SState> {
    let mut stem = Vec::with_capacity(2 * stem_edges.len());
    if !stem_edges.is_empty() {
        stem.push(proc_state(graph, stem_edges[0].src));
        for (i, e) in stem_edges.iter().enumerate() {
            stem.push(mid_state(graph, e));
            if i + 1 < stem_edges.len() {
                stem.push(proc_state(graph, e.tgt));
            }
        }
    }
    let mut cycle = Vec::with_capacity(2 * cycle_edges.len());
    for i in 0..cycle_edges.len() {
        let e = cycle_edges[(r + i) % cycle_edges.len()];
        cycle.push(proc_state(graph, e.src));
        cycle.push(mid_state(graph, e));
    }
    Lasso::new(stem, cycle).expect("walks through the graph are adjacent")
}

/// Calls the visitor once for every path from the initial state with at
/// most `maxlen` transitions, the empty path included, in depth-first
/// order following each state's edge order. The visitor receives the end
/// state and the edges taken; nothing is allocated per path.
pub fn visit_finite_paths<'g>(
    graph: &'g LtsGraph,
    maxlen: usize,
    visitor: &mut dyn FnMut(usize, &[&'g Edge]),
) {
    fn walk<'g>(
        graph: &'g LtsGraph,
        node: usize,
        left: usize,
        stack: &mut Vec<&'g Edge>,
        visitor: &mut dyn FnMut(usize, &[&'g Edge]),
    ) {
        visitor(node, stack);
        if left == 0 {
            return;
        }
        for e in graph.outgoing(node) {
            stack.push(e);
            walk(graph, e.tgt, left - 1, stack, visitor);
            stack.pop();
        }
    }
    let mut stack = Vec::new();
    walk(graph, graph.init(), maxlen, &mut stack, visitor);
}

/// Every path from the initial state with at most `maxlen` transitions,
/// as structured paths, in depth-first order.
pub fn enumerate_finite_paths(graph: &LtsGraph, maxlen: usize) -> Vec<FinitePath<SState>> {
    let mut out = Vec::new();
    visit_finite_paths(graph, maxlen, &mut |_, edges| {
        out.push(finite_from_edges(graph, graph.init(), edges));
    });
    out
}

/// Shortest path lengths to `anchor` through states with index >= anchor,
/// used to prune the cycle search. `usize::MAX` marks unreachable states.
fn dist_to_anchor(graph: &LtsGraph, incoming: &[Vec<&Edge>], anchor: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; graph.states().len()];
    dist[anchor] = 0;
    let mut queue = VecDeque::from([anchor]);
    while let Some(u) = queue.pop_front() {
        for e in &incoming[u] {
            if e.src >= anchor && dist[e.src] == usize::MAX {
                dist[e.src] = dist[u] + 1;
                queue.push_back(e.src);
            }
        }
    }
    dist
}

fn incoming_edges(graph: &LtsGraph) -> Vec<Vec<&Edge>> {
    let mut incoming = vec![Vec::new(); graph.states().len()];
    for e in graph.edges() {
        incoming[e.tgt].push(e);
    }
    incoming
}

/// Every simple cycle with at most `bound` edges, each listed once,
/// starting at its smallest state index. Anchoring at the smallest index
/// makes the enumeration canonical; rotations are recovered by callers.
fn simple_cycles(graph: &LtsGraph, bound: usize) -> Vec<Vec<&Edge>> {
    fn dfs<'g>(
        graph: &'g LtsGraph,
        anchor: usize,
        node: usize,
        bound: usize,
        dist: &[usize],
        stack: &mut Vec<&'g Edge>,
        on_path: &mut Vec<bool>,
        out: &mut Vec<Vec<&'g Edge>>,
    ) {
        for e in graph.outgoing(node) {
            if e.tgt == anchor {
                let mut cycle = stack.clone();
                cycle.push(e);
                out.push(cycle);
            } else if e.tgt > anchor
                && !on_path[e.tgt]
                && dist[e.tgt] != usize::MAX
                && stack.len() + 1 + dist[e.tgt] <= bound
            {
                stack.push(e);
                on_path[e.tgt] = true;
                dfs(graph, anchor, e.tgt, bound, dist, stack, on_path, out);
                on_path[e.tgt] = false;
                stack.pop();
            }
        }
    }
    let mut out = Vec::new();
    if bound == 0 {
        return out;
    }
    let incoming = incoming_edges(graph);
    for anchor in 0..graph.states().len() {
        let dist = dist_to_anchor(graph, &incoming, anchor);
        let mut stack = Vec::new();
        let mut on_path = vec![false; graph.states().len()];
        on_path[anchor] = true;
        dfs(graph, anchor, anchor, bound, &dist, &mut stack, &mut on_path, &mut out);
    }
    out
}

/// Every lasso whose stem is a walk from the initial state with at most
/// `stem_bound` transitions and whose cycle is a simple cycle with at most
/// `cycle_bound` transitions. Each cycle appears in every rotation a stem
/// can attach to, and stems need not be simple.
pub fn enumerate_lassos(
    graph: &LtsGraph,
    stem_bound: usize,
    cycle_bound: usize,
) -> Vec<Lasso<SState>> {
    let cycles = simple_cycles(graph, cycle_bound);
    let mut stems: HashMap<usize, Vec<Vec<&Edge>>> = HashMap::new();
    visit_finite_paths(graph, stem_bound, &mut |end, edges| {
        stems.entry(end).or_default().push(edges.to_vec());
    });
    let mut out = Vec::new();
    for cyc in &cycles {
        for r in 0..cyc.len() {
            let attach = cyc[r].src;
            let Some(walks) = stems.get(&attach) else { continue };
            for walk in walks {
                out.push(lasso_from(graph, walk, cyc, r));
            }
        }
    }
    out
}

/// Runs both justness checkers and insists they agree; the explicit
/// blocked-set analysis and the lift analysis validate one another.
fn cross_checked_just(
    path: &Path<SState>,
    spec: &Spec,
    lift_bound: usize,
) -> Result<bool, AnalysisError> {
    let by_sets = just_def1(path, spec, lift_bound);
    let by_lifts = just_s_via_lifts(path, spec, lift_bound);
    if by_sets.just != by_lifts.just {
        return Err(AnalysisError::CheckerDisagreement {
            path: path.to_string(),
            def1: by_sets.just,
            lifts: by_lifts.just,
        });
    }
    Ok(by_sets.just)
}

fn path_order(p: &Path<SState>) -> (usize, usize, String) {
    match p {
        Path::Finite(f) => (0, f.transition_count(), p.to_string()),
        Path::Lasso(l) => (1, (l.stem().len() + l.cycle().len()) / 2, p.to_string()),
    }
}

/// Every complete path within the bounds: progressing, just by both
/// checkers, and admitted by the fairness assumptions. Finite paths come
/// first, then lassos, each group ordered by transition count and then by
/// rendering, so the output is deterministic.
pub fn enumerate_complete(
    spec: &Spec,
    fs: &FairnessSpec,
    bounds: &Bounds,
) -> Result<Vec<Path<SState>>, AnalysisError> {
    let graph = reachable(spec, Semantics::Original, bounds.max_states)?;
    let mut out = Vec::new();
    for p in enumerate_finite_paths(&graph, bounds.finlen) {
        let path = Path::Finite(p);
        if !progressing(&path, spec) {
            continue;
        }
        if cross_checked_just(&path, spec, bounds.lift)? && admitted_by(&path, fs)? {
            out.push(path);
        }
    }
    for l in enumerate_lassos(&graph, bounds.stem, bounds.cycle) {
        let path = Path::Lasso(l);
        if cross_checked_just(&path, spec, bounds.lift)? && admitted_by(&path, fs)? {
            out.push(path);
        }
    }
    out.sort_by_cached_key(path_order);
    Ok(out)
}

/// One entry per subformula, children before parents, with child operands
/// replaced by their indices. `next[i]` below always refers to the same
/// subformula one position later.
enum Op {
    True,
    Atom(Label),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Implies(usize, usize),
    X(usize),
    U(usize, usize),
    G(usize),
    F(usize),
}

fn compile(roots: &[&LtlFormula]) -> Result<(Vec<LtlFormula>, Vec<Op>), LtlError> {
    fn add(f: &LtlFormula, subs: &mut Vec<LtlFormula>, ops: &mut Vec<Op>) -> Result<usize, LtlError> {
        if let Some(i) = subs.iter().position(|g| g == f) {
            return Ok(i);
        }
        let op = match f {
            LtlFormula::True => Op::True,
            LtlFormula::AtomLabel(l) => Op::Atom(l.clone()),
            LtlFormula::AtomNu(_) | LtlFormula::AtomEn(_) => return Err(LtlError::LevelMismatch),
            LtlFormula::Not(a) => Op::Not(add(a, subs, ops)?),
            LtlFormula::And(a, b) => Op::And(add(a, subs, ops)?, add(b, subs, ops)?),
            LtlFormula::Or(a, b) => Op::Or(add(a, subs, ops)?, add(b, subs, ops)?),
            LtlFormula::Implies(a, b) => Op::Implies(add(a, subs, ops)?, add(b, subs, ops)?),
            LtlFormula::X(a) => Op::X(add(a, subs, ops)?),
            LtlFormula::U(a, b) => Op::U(add(a, subs, ops)?, add(b, subs, ops)?),
            LtlFormula::G(a) => Op::G(add(a, subs, ops)?),
            LtlFormula::F(a) => Op::F(add(a, subs, ops)?),
        };
        subs.push(f.clone());
        ops.push(op);
        Ok(subs.len() - 1)
    }
    let mut subs = Vec::new();
    let mut ops = Vec::new();
    for f in roots {
        add(f, &mut subs, &mut ops)?;
    }
    Ok((subs, ops))
}

/// Truth of every subformula at a position, given truth at the position
/// after it. The one-step expansion laws for U, G and F make this exact on
/// ultimately periodic paths once the cycle values are seeded by a
/// fixpoint evaluation.
fn step_back(ops: &[Op], label: Option<&Label>, next: &[bool]) -> Vec<bool> {
    let mut v = vec![false; ops.len()];
    for (i, op) in ops.iter().enumerate() {
        v[i] = match op {
            Op::True => true,
            Op::Atom(l) => label == Some(l),
            Op::Not(a) => !v[*a],
            Op::And(a, b) => v[*a] && v[*b],
            Op::Or(a, b) => v[*a] || v[*b],
            Op::Implies(a, b) => !v[*a] || v[*b],
            Op::X(a) => next[*a],
            Op::U(a, b) => v[*b] || (v[*a] && next[i]),
            Op::G(a) => v[*a] && next[i],
            Op::F(a) => v[*a] || next[i],
        };
    }
    v
}

/// Truth vector at the last state of a finite path: atoms are false at a
/// process state, steps have no successor, an eventuality must deliver
/// now, an invariant needs only the present.
fn end_vector(ops: &[Op]) -> Vec<bool> {
    let mut v = vec![false; ops.len()];
    for (i, op) in ops.iter().enumerate() {
        v[i] = match op {
            Op::True => true,
            Op::Atom(_) => false,
            Op::Not(a) => !v[*a],
            Op::And(a, b) => v[*a] && v[*b],
            Op::Or(a, b) => v[*a] || v[*b],
            Op::Implies(a, b) => !v[*a] || v[*b],
            Op::X(_) => false,
            Op::U(_, b) => v[*b],
            Op::G(a) => v[*a],
            Op::F(a) => v[*a],
        };
    }
    v
}

/// Searches for a finite complete counterexample. A finite path can only
/// be complete if its end state admits no non-blocking action, so a stem
/// is grown backwards from each such end by the same product search the
/// lasso side uses.
fn finite_counterexample(
    graph: &LtsGraph,
    spec: &Spec,
    phi: &LtlFormula,
    fs: &FairnessSpec,
    bounds: &Bounds,
) -> Result<Option<Path<SState>>, AnalysisError> {
    let neg = LtlFormula::Not(Arc::new(phi.clone()));
    let roots: Vec<&LtlFormula> = std::iter::once(&neg).chain(fs.formulas.iter()).collect();
    let (subs, ops) = compile(&roots)?;
    let root_idx: Vec<usize> = roots
        .iter()
        .map(|f| subs.iter().position(|g| &g == f).unwrap())
        .collect();
    let incoming = incoming_edges(graph);
    let init = graph.init();
    let end = end_vector(&ops);
    for s in 0..graph.states().len() {
        if graph.outgoing(s).iter().any(|e| non_blocking(&e.label)) {
            continue;
        }
        let Some(stem) =
            backward_search(&ops, &incoming, end.clone(), &root_idx, bounds.finlen, init, s)
        else {
            continue;
        };
        let path = Path::Finite(finite_from_edges(graph, init, &stem));
        if !cross_checked_just(&path, spec, bounds.lift)? {
            continue;
        }
        debug_assert!(progressing(&path, spec));
        debug_assert!(admitted_by(&path, fs)? && !eval_s(phi, &path)?);
        return Ok(Some(path));
    }
    Ok(None)
}

/// Truth of every subformula at every position around a cycle, solved
/// bottom-up: children are final before a parent's own fixpoint runs,
/// least for U and F, greatest for G. Interleaving the fixpoints instead
/// would let a least entry grow through a provisionally true greatest
/// child and then survive its fall.
fn cycle_solution(ops: &[Op], labels: &[Option<&Label>]) -> Vec<Vec<bool>> {
    let n = labels.len();
    let mut v = vec![vec![false; ops.len()]; n];
    for i in 0..ops.len() {
        match ops[i] {
            Op::True => {
                for p in 0..n {
                    v[p][i] = true;
                }
            }
            Op::Atom(ref l) => {
                for p in 0..n {
                    v[p][i] = labels[p] == Some(l);
                }
            }
            Op::Not(a) => {
                for p in 0..n {
                    v[p][i] = !v[p][a];
                }
            }
            Op::And(a, b) => {
                for p in 0..n {
                    v[p][i] = v[p][a] && v[p][b];
                }
            }
            Op::Or(a, b) => {
                for p in 0..n {
                    v[p][i] = v[p][a] || v[p][b];
                }
            }
            Op::Implies(a, b) => {
                for p in 0..n {
                    v[p][i] = !v[p][a] || v[p][b];
                }
            }
            Op::X(a) => {
                for p in 0..n {
                    let x = v[(p + 1) % n][a];
                    v[p][i] = x;
                }
            }
            Op::U(a, b) => loop {
                let mut changed = false;
                for p in (0..n).rev() {
                    let new = v[p][b] || (v[p][a] && v[(p + 1) % n][i]);
                    if new != v[p][i] {
                        v[p][i] = new;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            },
            Op::G(a) => {
                for p in 0..n {
                    v[p][i] = true;
                }
                loop {
                    let mut changed = false;
                    for p in (0..n).rev() {
                        let new = v[p][a] && v[(p + 1) % n][i];
                        if new != v[p][i] {
                            v[p][i] = new;
                            changed = true;
                        }
                    }
                    if !changed {
                        break;
                    }
                }
            }
            Op::F(a) => loop {
                let mut changed = false;
                for p in (0..n).rev() {
                    let new = v[p][a] || v[(p + 1) % n][i];
                    if new != v[p][i] {
                        v[p][i] = new;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            },
        }
    }
    v
}

/// Searches for a lasso counterexample. Cycles are enumerated first and
/// filtered by justness, which depends only on the cycle; stems are then
/// grown backwards from each rotation by a product search over pairs of a
/// state and a subformula truth vector, so stem walks sharing a vector are
/// explored once. Shorter stems are found first.
fn lasso_counterexample(
    graph: &LtsGraph,
    spec: &Spec,
    phi: &LtlFormula,
    fs: &FairnessSpec,
    bounds: &Bounds,
) -> Result<Option<Path<SState>>, AnalysisError> {
    let neg = LtlFormula::Not(Arc::new(phi.clone()));
    let roots: Vec<&LtlFormula> = std::iter::once(&neg).chain(fs.formulas.iter()).collect();
    let (subs, ops) = compile(&roots)?;
    let root_idx: Vec<usize> = roots
        .iter()
        .map(|f| subs.iter().position(|g| &g == f).unwrap())
        .collect();
    let incoming = incoming_edges(graph);
    let init = graph.init();

    // A cycle can only be unjust if some non-blocking abstract transition
    // is enabled at every state on it, so cycles failing that skip the
    // lift-based probe altogether.
    let nonblocking_abstracts: Vec<BTreeSet<AbstractTransition>> = (0..graph.states().len())
        .map(|i| {
            graph
                .outgoing(i)
                .iter()
                .filter(|e| non_blocking(&e.label))
                .filter_map(|e| abstract_of(&e.derivation))
                .collect()
        })
        .collect();

    // Distinct cycles and rotations reaching the same attachment state with
    // the same truth vector share one backward search.
    let mut searched: HashMap<SearchKey, Option<Vec<&Edge>>> = HashMap::new();

    for cyc in simple_cycles(graph, bounds.cycle) {
        let mut persistent = nonblocking_abstracts[cyc[0].src].clone();
        for e in &cyc[1..] {
            persistent.retain(|nu| nonblocking_abstracts[e.src].contains(nu));
            if persistent.is_empty() {
                break;
            }
        }
        if !persistent.is_empty() {
            let probe = Path::Lasso(lasso_from(graph, &[], &cyc, 0));
            if !just_s_via_lifts(&probe, spec, bounds.lift).just {
                continue;
            }
        }
        let mut labels = Vec::with_capacity(2 * cyc.len());
        for e in &cyc {
            labels.push(None);
            labels.push(Some(&e.label));
        }
        let solution = cycle_solution(&ops, &labels);
        for r in 0..cyc.len() {
            let attach = cyc[r].src;
            let key: SearchKey = (attach, solution[2 * r].clone());
            let found = searched.entry(key).or_insert_with_key(|k| {
                backward_search(&ops, &incoming, k.1.clone(), &root_idx, bounds.stem, init, k.0)
            });
            let Some(stem_edges) = found.clone() else {
                continue;
            };
            let path = Path::Lasso(lasso_from(graph, &stem_edges, &cyc, r));
            if !cross_checked_just(&path, spec, bounds.lift)? {
                continue;
            }
            debug_assert!(admitted_by(&path, fs)? && !eval_s(phi, &path)?);
            return Ok(Some(path));
        }
    }
    Ok(None)
}

type SearchKey = (usize, Vec<bool>);

/// Breadth-first search backwards from the cycle attachment point. A key
/// pairs a state with the truth vector holding at it; accepting keys sit
/// at the initial state with every root formula true.
fn backward_search<'g>(
    ops: &[Op],
    incoming: &[Vec<&'g Edge>],
    seed: Vec<bool>,
    root_idx: &[usize],
    stem_bound: usize,
    init: usize,
    attach: usize,
) -> Option<Vec<&'g Edge>> {
    let accept = |node: usize, v: &[bool]| node == init && root_idx.iter().all(|&i| v[i]);
    let reconstruct = |parent: &HashMap<SearchKey, Option<(&'g Edge, SearchKey)>>,
                       from: &SearchKey| {
        let mut edges = Vec::new();
        let mut key = from.clone();
        while let Some((e, next)) = parent[&key].clone() {
            edges.push(e);
            key = next;
        }
        edges
    };
    let start: SearchKey = (attach, seed);
    if accept(start.0, &start.1) {
        return Some(Vec::new());
    }
    let mut parent: HashMap<SearchKey, Option<(&Edge, SearchKey)>> =
        HashMap::from([(start.clone(), None)]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some((key, depth)) = queue.pop_front() {
        if depth == stem_bound {
            continue;
        }
        for e in &incoming[key.0] {
            let at_mid = step_back(ops, Some(&e.label), &key.1);
            let at_src = step_back(ops, None, &at_mid);
            let pred: SearchKey = (e.src, at_src);
            if parent.contains_key(&pred) {
                continue;
            }
            parent.insert(pred.clone(), Some((e, key.clone())));
            if accept(pred.0, &pred.1) {
                return Some(reconstruct(&parent, &pred));
            }
            queue.push_back((pred, depth + 1));
        }
    }
    None
}

/// Bounded check that every complete path satisfies the property under the
/// fairness assumptions. Finite counterexamples are searched first in
/// depth-first order, then lassos, cycles in canonical order with shorter
/// stems first, so the reported counterexample is deterministic. Every
/// counterexample is validated by both justness checkers before being
/// returned.
pub fn check(
    spec: &Spec,
    phi: &LtlFormula,
    fs: &FairnessSpec,
    bounds: &Bounds,
) -> Result<Verdict, AnalysisError> {
    if !label_atoms_only(phi) {
        return Err(LtlError::LevelMismatch.into());
    }
    let graph = match reachable(spec, Semantics::Original, bounds.max_states) {
        Ok(g) => g,
        Err(e) => return Ok(Verdict::Unknown { reason: e.to_string() }),
    };
    if let Some(path) = finite_counterexample(&graph, spec, phi, fs, bounds)? {
        return Ok(Verdict::Fails { counterexample: path });
    }
    if let Some(path) = lasso_counterexample(&graph, spec, phi, fs, bounds)? {
        return Ok(Verdict::Fails { counterexample: path });
    }
    Ok(Verdict::Holds { bounds: *bounds })
}

/// Strong bisimilarity of two processes under the original semantics, by
/// partition refinement over the disjoint union of their reachable state
/// spaces. Two states fall in the same block exactly when no sequence of
/// label-matching moves separates them.
pub fn bisimilar(
    p: &Process,
    q: &Process,
    spec: &Spec,
    max_states: usize,
) -> Result<bool, StateBoundExceeded> {
    let gp = reachable_from(p, spec, Semantics::Original, max_states)?;
    let gq = reachable_from(q, spec, Semantics::Original, max_states)?;
    let np = gp.states().len();
    let n = np + gq.states().len();
    if n > max_states {
        return Err(StateBoundExceeded { bound: max_states });
    }
    let mut succ: Vec<Vec<(Label, usize)>> = Vec::with_capacity(n);
    for i in 0..np {
        succ.push(gp.outgoing(i).iter().map(|e| (e.label.clone(), e.tgt)).collect());
    }
    for i in 0..gq.states().len() {
        succ.push(gq.outgoing(i).iter().map(|e| (e.label.clone(), e.tgt + np)).collect());
    }
    let mut block = vec![0usize; n];
    loop {
        let mut ids: BTreeMap<(usize, BTreeSet<(Label, usize)>), usize> = BTreeMap::new();
        let mut next = Vec::with_capacity(n);
        for i in 0..n {
            let sig: BTreeSet<(Label, usize)> =
                succ[i].iter().map(|(l, t)| (l.clone(), block[*t])).collect();
            let fresh = ids.len();
            next.push(*ids.entry((block[i], sig)).or_insert(fresh));
        }
        if next == block {
            return Ok(block[0] == block[np]);
        }
        block = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::{parse_fairness, parse_ltl};
    use crate::parse::parse_spec;
    use crate::paths::State;

    fn spec(text: &str) -> Spec {
        parse_spec(text).unwrap()
    }

    fn small() -> Bounds {
        Bounds { stem: 4, cycle: 4, lift: 2, finlen: 6, max_states: 1000 }
    }

    #[test]
    fn eventuality_fails_on_the_procrastinating_choice_and_holds_when_forced() {
        let fs = FairnessSpec::empty();
        let phi_text = "G (<a> => F <d!>)";

        let forced = spec("handshake a;\nbroadcast d;\ninit a.tau.d!.0");
        let phi = parse_ltl(phi_text, &forced).unwrap();
        assert!(check(&forced, &phi, &fs, &small()).unwrap().holds());

        let lazy = spec("handshake a;\nbroadcast d;\nagent Q = tau.Q + tau.d!.0\ninit a.Q");
        let phi = parse_ltl(phi_text, &lazy).unwrap();
        let verdict = check(&lazy, &phi, &fs, &small()).unwrap();
        let Verdict::Fails { counterexample } = verdict else {
            panic!("the tau loop after a procrastinates forever");
        };
        assert!(!counterexample.is_finite());
        assert!(!eval_s(&phi, &counterexample).unwrap());
        assert!(just_def1(&counterexample, &lazy, 2).just);
        assert!(progressing(&counterexample, &lazy));

        let side_loop = spec("handshake a;\nbroadcast d;\nagent T = tau.T\ninit a.tau.d!.0 | T");
        let phi = parse_ltl(phi_text, &side_loop).unwrap();
        assert!(
            check(&side_loop, &phi, &fs, &small()).unwrap().holds(),
            "postponing d! forever in favour of the unrelated tau loop is unjust"
        );
    }

    #[test]
    fn fairness_assumptions_rescue_the_choice() {
        let s = spec("broadcast i j d;\nhandshake a;\nagent Q = i!.Q + j!.d!.0\ninit a.Q");
        let phi = parse_ltl("G (<a> => F <d!>)", &s).unwrap();
        let verdict = check(&s, &phi, &FairnessSpec::empty(), &small()).unwrap();
        assert!(verdict.fails(), "the i! loop is just, so without fairness it procrastinates");

        let fair = parse_fairness("G F <i!> => G F <j!>", &s).unwrap();
        assert!(check(&s, &phi, &fair, &small()).unwrap().holds());
    }

    #[test]
    fn complete_paths_of_tiny_systems_are_exactly_the_maximal_runs() {
        let nil = spec("init 0");
        let all = enumerate_complete(&nil, &FairnessSpec::empty(), &small()).unwrap();
        assert_eq!(all.len(), 1);
        assert!(all[0].is_finite());
        assert!(all[0].labels().is_empty());

        let two_sends = spec("broadcast b1 b2;\ninit b1!.b2!.0");
        let all = enumerate_complete(&two_sends, &FairnessSpec::empty(), &small()).unwrap();
        assert_eq!(all.len(), 1, "stopping before a pending send is not progressing");
        assert_eq!(all[0].labels().len(), 2);

        let b = spec("handshake c;\nbroadcast b;\nagent B = c.B + b!.0\ninit B");
        let bounds = Bounds { stem: 2, cycle: 2, lift: 2, finlen: 3, max_states: 100 };
        let all = enumerate_complete(&b, &FairnessSpec::empty(), &bounds).unwrap();
        let (finite, lassos): (Vec<_>, Vec<_>) = all.iter().partition(|p| p.is_finite());
        assert_eq!(finite.len(), 3, "c^n b! for n in 0..=2");
        assert!(finite.iter().all(|p| p.labels().last().unwrap().to_string() == "b!"));
        assert_eq!(lassos.len(), 3, "the c loop under stems c^0, c^1, c^2");
    }

    #[test]
    fn unjust_loops_are_not_complete() {
        let s = spec("handshake c;\nbroadcast b;\nagent C = c.C\ninit C | b!.0");
        let bounds = Bounds { stem: 2, cycle: 2, lift: 2, finlen: 3, max_states: 100 };
        let all = enumerate_complete(&s, &FairnessSpec::empty(), &bounds).unwrap();
        assert!(!all.is_empty());
        for p in &all {
            let sent = p.labels().iter().any(|l| l.to_string() == "b!");
            match p {
                Path::Finite(_) => assert!(sent, "finite ends must have fired the send"),
                Path::Lasso(l) => {
                    let stem_sent = l
                        .stem()
                        .iter()
                        .filter_map(|s| s.label())
                        .any(|l| l.to_string() == "b!");
                    assert!(stem_sent, "looping on c while b! is pending is unjust");
                }
            }
        }
    }

    #[test]
    fn a_state_bound_blowout_reports_unknown() {
        let s = spec("broadcast b;\nagent K = b!.(K | K)\ninit K");
        let phi = parse_ltl("G F <b!>", &s).unwrap();
        let bounds = Bounds { max_states: 10, ..Bounds::default() };
        let verdict = check(&s, &phi, &FairnessSpec::empty(), &bounds).unwrap();
        let Verdict::Unknown { reason } = verdict else {
            panic!("unrolling K | K forever exceeds any state bound");
        };
        assert!(reason.contains("10"));
    }

    #[test]
    fn bisimilar_identifies_commuted_parallel_and_separates_choice() {
        let s = spec("handshake a;\nbroadcast b;\ninit 0");
        let parse = |t: &str| crate::parse::parse_process(t, &s).unwrap();
        let pq = parse("a.0 | b!.0");
        let qp = parse("b!.0 | a.0");
        assert!(bisimilar(&pq, &qp, &s, 1000).unwrap());

        let once = parse("a.0");
        let twice = parse("a.a.0");
        let idem = parse("a.0 + a.0");
        assert!(bisimilar(&once, &idem, &s, 1000).unwrap());
        assert!(!bisimilar(&once, &twice, &s, 1000).unwrap());

        let tau = parse("tau.0");
        let nil = parse("0");
        assert!(!bisimilar(&tau, &nil, &s, 1000).unwrap(), "strong, not weak");
    }

    #[test]
    fn the_check_verdict_agrees_with_the_complete_path_oracle() {
        let cases = [
            ("handshake a;\nbroadcast d;\nagent Q = tau.Q + tau.d!.0\ninit a.Q", "G (<a> => F <d!>)"),
            ("handshake a;\nbroadcast d;\nagent Q = tau.Q + tau.d!.0\ninit a.Q", "F <a>"),
            ("handshake c;\nbroadcast b;\nagent B = c.B + b!.0\ninit B", "F <b!>"),
            ("handshake c;\nbroadcast b;\nagent C = c.C\ninit C | b!.0", "F <b!>"),
            ("handshake c;\nbroadcast b;\nagent C = c.C\ninit C | b!.0", "G F <c>"),
        ];
        let fs = FairnessSpec::empty();
        let bounds = Bounds { stem: 3, cycle: 3, lift: 2, finlen: 5, max_states: 100 };
        for (text, phi_text) in cases {
            let s = spec(text);
            let phi = parse_ltl(phi_text, &s).unwrap();
            let verdict = check(&s, &phi, &fs, &bounds).unwrap();
            let oracle = enumerate_complete(&s, &fs, &bounds)
                .unwrap()
                .into_iter()
                .any(|p| !eval_s(&phi, &p).unwrap());
            assert_eq!(
                verdict.fails(),
                oracle,
                "search and enumeration disagree on {phi_text} over {text}"
            );
            if let Verdict::Fails { counterexample } = verdict {
                assert!(!eval_s(&phi, &counterexample).unwrap());
                assert!(just_def1(&counterexample, &s, bounds.lift).just);
            }
        }
    }

    #[test]
    fn lasso_enumeration_covers_rotations_and_stems() {
        let s = spec("handshake c;\nbroadcast b;\nagent B = c.B + b!.0\ninit B");
        let graph = reachable(&s, Semantics::Original, 100).unwrap();
        let lassos = enumerate_lassos(&graph, 1, 2);
        for l in &lassos {
            assert!(l.check_genuine(&s).is_ok());
        }
        let loops_at_b = lassos
            .iter()
            .filter(|l| l.stem().is_empty() && l.cycle().len() == 2)
            .count();
        assert_eq!(loops_at_b, 1, "the self loop at B in its only rotation, stemless");
    }

    #[test]
    fn the_cyclic_solver_matches_the_evaluator() {
        // Nesting an eventuality around an invariant is the case where a
        // simultaneous fixpoint over all subformulas goes wrong, so every
        // rotation of every cycle is checked against direct evaluation.
        let cases = [
            (
                spec("handshake c e;\nbroadcast b;\nagent D = c.(b?.0 + e.D)\ninit b!.0 | D"),
                vec!["F (G <c>)", "G (F <c>)", "(!<b!>) U <e>", "X <c>", "F <b!>"],
            ),
            (
                spec("handshake c;\nbroadcast b;\nagent B = c.B + b!.0\ninit B"),
                vec!["F (G <c>)", "G (F <c>)", "X <c>", "F <b!>", "G <c>"],
            ),
        ];
        for (s, phis) in &cases {
            let graph = reachable(s, Semantics::Original, 1000).unwrap();
            for phi_text in phis {
                let phi = parse_ltl(phi_text, s).unwrap();
                let roots = [&phi];
                let (subs, ops) = compile(&roots).unwrap();
                let root = subs.iter().position(|g| *g == phi).unwrap();
                for cyc in simple_cycles(&graph, 4) {
                    let mut labels = Vec::new();
                    for e in &cyc {
                        labels.push(None);
                        labels.push(Some(&e.label));
                    }
                    let solution = cycle_solution(&ops, &labels);
                    for r in 0..cyc.len() {
                        let rot = Path::Lasso(lasso_from(&graph, &[], &cyc, r));
                        let direct = eval_s(&phi, &rot).unwrap();
                        assert_eq!(
                            solution[2 * r][root],
                            direct,
                            "{phi_text} disagrees on rotation {r} of {rot}"
                        );
                    }
                }
            }
        }
    }
}
