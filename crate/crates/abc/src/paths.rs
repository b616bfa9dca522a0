//! Paths through the two Kripke structures built over the transition
//! system: `S`, whose extra states sit midway a transition and carry its
//! label, and the finer `U`, whose midway states are whole derivations.
//!
//! Infinite paths are represented as lassos (stem plus repeated cycle);
//! finite paths always end in a process state, since a run cannot stop
//! midway a transition. `hat` projects `U`-paths onto `S`-paths by
//! forgetting which derivation a midway state came from; `lifts` inverts
//! it, up to a bound on how often the cycle is unrolled. Paths of parallel
//! compositions decompose componentwise (uniquely in `U`), and paths of
//! restrictions and relabellings strip the outer operator.

use std::fmt;
use std::sync::Arc;

use crate::lts::LtsGraph;
use crate::sos::{step_original, Derivation};
use crate::syntax::{Label, Name, Process, Relabelling, Spec};

/// A state of one of the two Kripke structures. Process states alternate
/// with midway states along every path.
pub trait State:
    Clone + fmt::Debug + fmt::Display + PartialEq + Eq + PartialOrd + Ord + std::hash::Hash
{
    /// The process, for a process state.
    fn proc(&self) -> Option<&Process>;

    /// The transition label, for a midway state.
    fn label(&self) -> Option<Label>;

    fn is_proc(&self) -> bool {
        self.proc().is_some()
    }

    /// Whether `next` can directly follow `self`. Process and midway
    /// states strictly alternate.
    fn adjacent(&self, next: &Self) -> bool;

    /// Whether a midway state arises from an actual derivation of the
    /// original semantics. Process states are always genuine.
    fn genuine(&self, spec: &Spec) -> bool;
}

/// A state of `U`: a process or a derivation currently being executed.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UState {
    Proc(Process),
    Deriv(Derivation),
}

/// A state of `S`: a process or a point midway a transition, identified
/// by the transition triple.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SState {
    Proc(Process),
    Mid { src: Process, label: Label, tgt: Process },
}

impl State for UState {
    fn proc(&self) -> Option<&Process> {
        match self {
            UState::Proc(p) => Some(p),
            UState::Deriv(_) => None,
        }
    }

    fn label(&self) -> Option<Label> {
        match self {
            UState::Proc(_) => None,
            UState::Deriv(d) => Some(d.label()),
        }
    }

    fn adjacent(&self, next: &Self) -> bool {
        match (self, next) {
            (UState::Proc(p), UState::Deriv(d)) => d.src() == *p,
            (UState::Deriv(d), UState::Proc(q)) => d.target() == *q,
            _ => false,
        }
    }

    fn genuine(&self, spec: &Spec) -> bool {
        match self {
            UState::Proc(_) => true,
            UState::Deriv(d) => step_original(&d.src(), spec).contains(d),
        }
    }
}

impl State for SState {
    fn proc(&self) -> Option<&Process> {
        match self {
            SState::Proc(p) => Some(p),
            SState::Mid { .. } => None,
        }
    }

    fn label(&self) -> Option<Label> {
        match self {
            SState::Proc(_) => None,
            SState::Mid { label, .. } => Some(label.clone()),
        }
    }

    fn adjacent(&self, next: &Self) -> bool {
        match (self, next) {
            (SState::Proc(p), SState::Mid { src, .. }) => src == p,
            (SState::Mid { tgt, .. }, SState::Proc(q)) => tgt == q,
            _ => false,
        }
    }

    fn genuine(&self, spec: &Spec) -> bool {
        match self {
            SState::Proc(_) => true,
            SState::Mid { src, label, tgt } => step_original(src, spec)
                .iter()
                .any(|d| d.label() == *label && d.target() == *tgt),
        }
    }
}

impl fmt::Display for UState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UState::Proc(p) => write!(f, "{p}"),
            UState::Deriv(d) => write!(f, "[{d}]"),
        }
    }
}

impl fmt::Display for SState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SState::Proc(p) => write!(f, "{p}"),
            SState::Mid { label, .. } => write!(f, "[{label}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PathError {
    #[error("a path needs at least one state")]
    Empty,
    #[error("states at positions {0} and {} are not adjacent", .0 + 1)]
    NotAdjacent(usize),
    #[error("a finite path must end in a process state, not midway a transition")]
    EndsMidway,
    #[error("a lasso needs a nonempty cycle")]
    EmptyCycle,
    #[error("the midway state at position {0} does not arise from the semantics")]
    NotGenuine(usize),
}

/// A finite path: an alternating state sequence ending in a process state.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FinitePath<S> {
    states: Vec<S>,
}

impl<S: State> FinitePath<S> {
    pub fn new(states: Vec<S>) -> Result<Self, PathError> {
        if states.is_empty() {
            return Err(PathError::Empty);
        }
        for (i, pair) in states.windows(2).enumerate() {
            if !pair[0].adjacent(&pair[1]) {
                return Err(PathError::NotAdjacent(i));
            }
        }
        if !states.last().unwrap().is_proc() {
            return Err(PathError::EndsMidway);
        }
        Ok(FinitePath { states })
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn first(&self) -> &S {
        &self.states[0]
    }

    /// The final state; always a process.
    pub fn end(&self) -> &Process {
        self.states.last().unwrap().proc().expect("finite paths end in a process state")
    }

    /// The transition labels along the path, in order.
    pub fn labels(&self) -> Vec<Label> {
        self.states.iter().filter_map(State::label).collect()
    }

    /// Number of transitions, counting a leading midway state as one.
    pub fn transition_count(&self) -> usize {
        self.states.iter().filter(|s| !s.is_proc()).count()
    }

    /// All suffixes, one per start position; the path itself is included.
    pub fn suffixes(&self) -> Vec<FinitePath<S>> {
        (0..self.states.len())
            .map(|i| FinitePath { states: self.states[i..].to_vec() })
            .collect()
    }

    /// Checks every midway state against the semantics.
    pub fn check_genuine(&self, spec: &Spec) -> Result<(), PathError> {
        for (i, s) in self.states.iter().enumerate() {
            if !s.genuine(spec) {
                return Err(PathError::NotGenuine(i));
            }
        }
        Ok(())
    }
}

/// An ultimately periodic infinite path, presented as stem followed by a
/// forever-repeated cycle. The cycle is nonempty and of even length.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lasso<S> {
    stem: Vec<S>,
    cycle: Vec<S>,
}

impl<S: State> Lasso<S> {
    pub fn new(stem: Vec<S>, cycle: Vec<S>) -> Result<Self, PathError> {
        if cycle.is_empty() {
            return Err(PathError::EmptyCycle);
        }
        let all: Vec<&S> = stem.iter().chain(cycle.iter()).collect();
        for (i, pair) in all.windows(2).enumerate() {
            if !pair[0].adjacent(pair[1]) {
                return Err(PathError::NotAdjacent(i));
            }
        }
        if !cycle.last().unwrap().adjacent(&cycle[0]) {
            return Err(PathError::NotAdjacent(stem.len() + cycle.len() - 1));
        }
        debug_assert!(cycle.len() % 2 == 0, "alternation forces an even cycle");
        Ok(Lasso { stem, cycle })
    }

    pub fn stem(&self) -> &[S] {
        &self.stem
    }

    pub fn cycle(&self) -> &[S] {
        &self.cycle
    }

    /// The first state of the denoted infinite path.
    pub fn head(&self) -> &S {
        self.stem.first().unwrap_or(&self.cycle[0])
    }

    /// The state at position `i` of the denoted infinite path.
    pub fn at(&self, i: usize) -> &S {
        if i < self.stem.len() {
            &self.stem[i]
        } else {
            &self.cycle[(i - self.stem.len()) % self.cycle.len()]
        }
    }

    /// The labels occurring in one pass of the cycle.
    pub fn cycle_labels(&self) -> Vec<Label> {
        self.cycle.iter().filter_map(State::label).collect()
    }

    /// The same path with the cycle written out `m` times.
    pub fn unrolled(&self, m: usize) -> Lasso<S> {
        assert!(m >= 1);
        let mut cycle = Vec::with_capacity(self.cycle.len() * m);
        for _ in 0..m {
            cycle.extend(self.cycle.iter().cloned());
        }
        Lasso { stem: self.stem.clone(), cycle }
    }

    /// Every suffix of the denoted path, up to the identification of
    /// suffixes that start one full cycle apart: one class per stem
    /// position plus one per cycle rotation.
    pub fn suffix_classes(&self) -> Vec<Lasso<S>> {
        let mut out = Vec::with_capacity(self.stem.len() + self.cycle.len());
        for i in 0..self.stem.len() {
            out.push(Lasso { stem: self.stem[i..].to_vec(), cycle: self.cycle.clone() });
        }
        for j in 0..self.cycle.len() {
            let mut rotated = self.cycle[j..].to_vec();
            rotated.extend_from_slice(&self.cycle[..j]);
            out.push(Lasso { stem: Vec::new(), cycle: rotated });
        }
        out
    }

    pub fn check_genuine(&self, spec: &Spec) -> Result<(), PathError> {
        for (i, s) in self.stem.iter().chain(self.cycle.iter()).enumerate() {
            if !s.genuine(spec) {
                return Err(PathError::NotGenuine(i));
            }
        }
        Ok(())
    }
}

/// A finite path or a lasso.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Path<S> {
    Finite(FinitePath<S>),
    Lasso(Lasso<S>),
}

impl<S: State> Path<S> {
    pub fn head(&self) -> &S {
        match self {
            Path::Finite(p) => p.first(),
            Path::Lasso(l) => l.head(),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Path::Finite(_))
    }

    /// Transition labels: all of them for a finite path, the stem followed
    /// by one cycle period for a lasso.
    pub fn labels(&self) -> Vec<Label> {
        match self {
            Path::Finite(p) => p.labels(),
            Path::Lasso(l) => {
                l.stem().iter().chain(l.cycle()).filter_map(State::label).collect()
            }
        }
    }

    /// Suffix classes: all suffixes for a finite path, stem suffixes plus
    /// cycle rotations for a lasso.
    pub fn suffix_classes(&self) -> Vec<Path<S>> {
        match self {
            Path::Finite(p) => p.suffixes().into_iter().map(Path::Finite).collect(),
            Path::Lasso(l) => l.suffix_classes().into_iter().map(Path::Lasso).collect(),
        }
    }

    pub fn check_genuine(&self, spec: &Spec) -> Result<(), PathError> {
        match self {
            Path::Finite(p) => p.check_genuine(spec),
            Path::Lasso(l) => l.check_genuine(spec),
        }
    }
}

fn render_chain<S: State>(states: &[S], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let mut first = true;
    for s in states {
        match s.label() {
            None => {
                if !first {
                    f.write_str(" ")?;
                }
                write!(f, "{}", s.proc().unwrap())?;
            }
            Some(l) => {
                if first {
                    f.write_str("(midway)")?;
                }
                write!(f, " -{l}->")?;
            }
        }
        first = false;
    }
    Ok(())
}

impl<S: State> fmt::Display for FinitePath<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        render_chain(&self.states, f)
    }
}

impl<S: State> fmt::Display for Lasso<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        render_chain(&self.stem, f)?;
        f.write_str(" ; ")?;
        render_chain(&self.cycle, f)?;
        // The cycle wraps; repeat its head so the loop is visible.
        match self.cycle[0].proc() {
            Some(p) => write!(f, " {p}"),
            None => f.write_str(" (wrap)"),
        }
    }
}

impl<S: State> fmt::Display for Path<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Path::Finite(p) => p.fmt(f),
            Path::Lasso(l) => l.fmt(f),
        }
    }
}

/// Projection from `U` to `S`: a derivation is forgotten down to its
/// transition triple.
pub fn hat_state(u: &UState) -> SState {
    match u {
        UState::Proc(p) => SState::Proc(p.clone()),
        UState::Deriv(d) => {
            SState::Mid { src: d.src(), label: d.label(), tgt: d.target() }
        }
    }
}

pub fn hat_finite(path: &FinitePath<UState>) -> FinitePath<SState> {
    FinitePath::new(path.states().iter().map(hat_state).collect())
        .expect("projection preserves path validity")
}

pub fn hat_lasso(lasso: &Lasso<UState>) -> Lasso<SState> {
    Lasso::new(
        lasso.stem().iter().map(hat_state).collect(),
        lasso.cycle().iter().map(hat_state).collect(),
    )
    .expect("projection preserves path validity")
}

pub fn hat(path: &Path<UState>) -> Path<SState> {
    match path {
        Path::Finite(p) => Path::Finite(hat_finite(p)),
        Path::Lasso(l) => Path::Lasso(hat_lasso(l)),
    }
}

fn derivation_choices(s: &SState, spec: &Spec) -> Vec<UState> {
    match s {
        SState::Proc(p) => vec![UState::Proc(p.clone())],
        SState::Mid { src, label, tgt } => step_original(src, spec)
            .into_iter()
            .filter(|d| d.label() == *label && d.target() == *tgt)
            .map(UState::Deriv)
            .collect(),
    }
}

fn choice_product(options: &[Vec<UState>]) -> Vec<Vec<UState>> {
    let mut out: Vec<Vec<UState>> = vec![Vec::new()];
    for opts in options {
        let mut next = Vec::with_capacity(out.len() * opts.len());
        for partial in &out {
            for o in opts {
                let mut extended = partial.clone();
                extended.push(o.clone());
                next.push(extended);
            }
        }
        out = next;
    }
    out
}

/// All `U`-lassos projecting onto `rho` after unrolling its cycle at most
/// `k` times: every midway state is replaced by each derivation of that
/// transition, independently per position.
pub fn lifts(rho: &Lasso<SState>, spec: &Spec, k: usize) -> Vec<Lasso<UState>> {
    assert!(k >= 1, "the period bound must be at least 1");
    let mut out = Vec::new();
    for m in 1..=k {
        let unrolled = rho.unrolled(m);
        let stem_opts: Vec<Vec<UState>> =
            unrolled.stem().iter().map(|s| derivation_choices(s, spec)).collect();
        let cycle_opts: Vec<Vec<UState>> =
            unrolled.cycle().iter().map(|s| derivation_choices(s, spec)).collect();
        for stem in choice_product(&stem_opts) {
            for cycle in choice_product(&cycle_opts) {
                out.push(
                    Lasso::new(stem.clone(), cycle)
                        .expect("lift choices preserve adjacency"),
                );
            }
        }
    }
    out
}

/// All `U`-paths projecting onto a finite `S`-path. Complete: finite paths
/// need no period bound.
pub fn lifts_finite(path: &FinitePath<SState>, spec: &Spec) -> Vec<FinitePath<UState>> {
    let opts: Vec<Vec<UState>> =
        path.states().iter().map(|s| derivation_choices(s, spec)).collect();
    choice_product(&opts)
        .into_iter()
        .map(|states| FinitePath::new(states).expect("lift choices preserve adjacency"))
        .collect()
}

pub fn lift_path(path: &Path<SState>, spec: &Spec, k: usize) -> Vec<Path<UState>> {
    match path {
        Path::Finite(p) => lifts_finite(p, spec).into_iter().map(Path::Finite).collect(),
        Path::Lasso(l) => lifts(l, spec, k).into_iter().map(Path::Lasso).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("state `{at}` does not have the required {expected} shape")]
pub struct DecomposeError {
    pub expected: &'static str,
    pub at: String,
}

fn project_par(u: &UState) -> Result<(UState, UState), DecomposeError> {
    match u {
        UState::Proc(Process::Par(l, r)) => {
            Ok((UState::Proc((**l).clone()), UState::Proc((**r).clone())))
        }
        UState::Deriv(Derivation::ParL { inner, right }) => {
            Ok((UState::Deriv((**inner).clone()), UState::Proc((**right).clone())))
        }
        UState::Deriv(Derivation::ParR { left, inner }) => {
            Ok((UState::Proc((**left).clone()), UState::Deriv((**inner).clone())))
        }
        UState::Deriv(Derivation::Sync { left, right }) => {
            Ok((UState::Deriv((**left).clone()), UState::Deriv((**right).clone())))
        }
        other => Err(DecomposeError { expected: "parallel", at: other.to_string() }),
    }
}

/// Contracts runs of equal consecutive states, remembering for each kept
/// state the position it first appeared at.
fn contract(seq: Vec<UState>) -> Vec<(UState, usize)> {
    let mut out: Vec<(UState, usize)> = Vec::new();
    for (i, s) in seq.into_iter().enumerate() {
        if out.last().map(|(prev, _)| *prev == s) != Some(true) {
            out.push((s, i));
        }
    }
    out
}

/// One side of a lasso decomposition. `n` is the stem length and `m` the
/// cycle length of the composite; `unrolled` covers stem plus two cycle
/// copies, so positions `n + m ..` repeat the steady-state pattern and can
/// be cut out as the projected cycle. A side with no derivation there has
/// stopped moving and projects to a finite path.
fn side_of_lasso(unrolled: Vec<UState>, n: usize, m: usize) -> Path<UState> {
    let kept = contract(unrolled);
    let moves_in_cycle = kept
        .iter()
        .any(|(s, origin)| *origin >= n + m && matches!(s, UState::Deriv(_)));
    if moves_in_cycle {
        let stem: Vec<UState> =
            kept.iter().filter(|(_, o)| *o < n + m).map(|(s, _)| s.clone()).collect();
        let cycle: Vec<UState> =
            kept.iter().filter(|(_, o)| *o >= n + m).map(|(s, _)| s.clone()).collect();
        Path::Lasso(Lasso::new(stem, cycle).expect("projection preserves adjacency"))
    } else {
        // The repetition beyond the last move contracts to a single final
        // process state, so the kept sequence is the whole finite path.
        let states: Vec<UState> = kept.into_iter().map(|(s, _)| s).collect();
        Path::Finite(FinitePath::new(states).expect("projection preserves adjacency"))
    }
}

/// Decomposes a path all of whose states have parallel shape into its two
/// component paths. Unique: in `U` every midway state names the component
/// (or components) it moves.
pub fn decompose_par_u(
    path: &Path<UState>,
) -> Result<(Path<UState>, Path<UState>), DecomposeError> {
    match path {
        Path::Finite(p) => {
            let mut left = Vec::new();
            let mut right = Vec::new();
            for s in p.states() {
                let (l, r) = project_par(s)?;
                left.push(l);
                right.push(r);
            }
            let left: Vec<UState> = contract(left).into_iter().map(|(s, _)| s).collect();
            let right: Vec<UState> = contract(right).into_iter().map(|(s, _)| s).collect();
            Ok((
                Path::Finite(FinitePath::new(left).expect("projection preserves adjacency")),
                Path::Finite(FinitePath::new(right).expect("projection preserves adjacency")),
            ))
        }
        Path::Lasso(l) => {
            let n = l.stem().len();
            let m = l.cycle().len();
            let twice = l.unrolled(2);
            let mut left = Vec::with_capacity(n + 2 * m);
            let mut right = Vec::with_capacity(n + 2 * m);
            for s in twice.stem().iter().chain(twice.cycle().iter()) {
                let (a, b) = project_par(s)?;
                left.push(a);
                right.push(b);
            }
            Ok((side_of_lasso(left, n, m), side_of_lasso(right, n, m)))
        }
    }
}

/// Strips one restriction operator off every state. The restricted name
/// must be the same throughout; transition labels are unchanged.
pub fn decompose_res<S: State + StripState>(
    path: &Path<S>,
) -> Result<(Path<S>, Name), DecomposeError> {
    let name = match path.head().strip_res() {
        Some((_, n)) => n,
        None => {
            return Err(DecomposeError { expected: "restriction", at: path.head().to_string() })
        }
    };
    let strip = |s: &S| -> Result<S, DecomposeError> {
        match s.strip_res() {
            Some((inner, n)) if n == name => Ok(inner),
            _ => Err(DecomposeError { expected: "restriction", at: s.to_string() }),
        }
    };
    Ok((map_path(path, strip)?, name))
}

/// Strips one relabelling operator off every state. In `S` the inner label
/// of a midway state is chosen as the least preimage realised by an actual
/// transition; which preimage is chosen never affects justness, which
/// inspects states only.
pub fn decompose_rel<S: State + StripState>(
    path: &Path<S>,
    spec: &Spec,
) -> Result<(Path<S>, Arc<Relabelling>), DecomposeError> {
    let f = match path.head().strip_rel(spec) {
        Some((_, f)) => f,
        None => {
            return Err(DecomposeError { expected: "relabelling", at: path.head().to_string() })
        }
    };
    let strip = |s: &S| -> Result<S, DecomposeError> {
        match s.strip_rel(spec) {
            Some((inner, g)) if g == f => Ok(inner),
            _ => Err(DecomposeError { expected: "relabelling", at: s.to_string() }),
        }
    };
    Ok((map_path(path, strip)?, f))
}

fn map_path<S: State>(
    path: &Path<S>,
    f: impl Fn(&S) -> Result<S, DecomposeError>,
) -> Result<Path<S>, DecomposeError> {
    Ok(match path {
        Path::Finite(p) => {
            let states = p.states().iter().map(&f).collect::<Result<Vec<S>, _>>()?;
            Path::Finite(FinitePath::new(states).expect("stripping preserves adjacency"))
        }
        Path::Lasso(l) => {
            let stem = l.stem().iter().map(&f).collect::<Result<Vec<S>, _>>()?;
            let cycle = l.cycle().iter().map(&f).collect::<Result<Vec<S>, _>>()?;
            Path::Lasso(Lasso::new(stem, cycle).expect("stripping preserves adjacency"))
        }
    })
}

/// State-level stripping of restriction and relabelling operators.
pub trait StripState: Sized {
    fn strip_res(&self) -> Option<(Self, Name)>;
    fn strip_rel(&self, spec: &Spec) -> Option<(Self, Arc<Relabelling>)>;
}

impl StripState for UState {
    fn strip_res(&self) -> Option<(Self, Name)> {
        match self {
            UState::Proc(Process::Restrict(p, c)) => {
                Some((UState::Proc((**p).clone()), c.clone()))
            }
            UState::Deriv(Derivation::Res { inner, name }) => {
                Some((UState::Deriv((**inner).clone()), name.clone()))
            }
            _ => None,
        }
    }

    fn strip_rel(&self, _spec: &Spec) -> Option<(Self, Arc<Relabelling>)> {
        match self {
            UState::Proc(Process::Relabel(p, f)) => {
                Some((UState::Proc((**p).clone()), f.clone()))
            }
            UState::Deriv(Derivation::Rel { inner, relabelling }) => {
                Some((UState::Deriv((**inner).clone()), relabelling.clone()))
            }
            _ => None,
        }
    }
}

impl StripState for SState {
    fn strip_res(&self) -> Option<(Self, Name)> {
        match self {
            SState::Proc(Process::Restrict(p, c)) => {
                Some((SState::Proc((**p).clone()), c.clone()))
            }
            SState::Mid { src: Process::Restrict(ps, c), label, tgt: Process::Restrict(pt, c2) }
                if c == c2 =>
            {
                Some((
                    SState::Mid {
                        src: (**ps).clone(),
                        label: label.clone(),
                        tgt: (**pt).clone(),
                    },
                    c.clone(),
                ))
            }
            _ => None,
        }
    }

    fn strip_rel(&self, spec: &Spec) -> Option<(Self, Arc<Relabelling>)> {
        match self {
            SState::Proc(Process::Relabel(p, f)) => {
                Some((SState::Proc((**p).clone()), f.clone()))
            }
            SState::Mid { src: Process::Relabel(ps, f), label, tgt: Process::Relabel(pt, f2) }
                if f == f2 =>
            {
                let inner = step_original(ps, spec)
                    .into_iter()
                    .filter(|d| {
                        f.apply_label(&d.label()) == *label && d.target() == **pt
                    })
                    .map(|d| d.label())
                    .min()?;
                Some((
                    SState::Mid {
                        src: (**ps).clone(),
                        label: inner,
                        tgt: (**pt).clone(),
                    },
                    f.clone(),
                ))
            }
            _ => None,
        }
    }
}

/// All decompositions of an `S`-path of a parallel composition that arise
/// from some lift: each lift decomposes uniquely in `U`, and the pair is
/// projected back. For lassos the result is complete up to the period
/// bound `k`.
pub fn decompose_par_s(
    path: &Path<SState>,
    spec: &Spec,
    k: usize,
) -> Result<Vec<(Path<SState>, Path<SState>)>, DecomposeError> {
    let mut out = Vec::new();
    for lift in lift_path(path, spec, k) {
        let (l, r) = decompose_par_u(&lift)?;
        let pair = (hat(&l), hat(&r));
        if !out.contains(&pair) {
            out.push(pair);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LassoLiteralError {
    #[error("a lasso literal is written `stem ; cycle` with exactly one `;`")]
    MissingSeparator,
    #[error("malformed element `{0}`: expected a state index or an arrow `-label->`")]
    BadElement(String),
    #[error("state index {0} is out of range")]
    BadIndex(usize),
    #[error("no transition labelled `{label}` from state {src} to state {tgt}")]
    NoSuchTransition { src: usize, label: String, tgt: usize },
    #[error("expected alternating indices and arrows")]
    BadShape,
    #[error("the cycle must return to its first state")]
    CycleNotClosed,
    #[error("the stem must end where the cycle starts")]
    StemDetached,
    #[error("the cycle needs at least one transition")]
    EmptyCycleLiteral,
}

fn parse_chain(
    part: &str,
    graph: &LtsGraph,
) -> Result<(Vec<usize>, Vec<Label>), LassoLiteralError> {
    let mut nodes: Vec<usize> = Vec::new();
    let mut labels = Vec::new();
    let mut pending_arrow: Option<&str> = None;
    for tok in part.split_whitespace() {
        if pending_arrow.is_none() && !nodes.is_empty() {
            // Expecting an arrow between two indices.
            let inner = tok
                .strip_prefix('-')
                .and_then(|t| t.strip_suffix("->"))
                .filter(|t| !t.is_empty())
                .ok_or_else(|| LassoLiteralError::BadElement(tok.to_string()))?;
            pending_arrow = Some(inner);
            continue;
        }
        let idx: usize =
            tok.parse().map_err(|_| LassoLiteralError::BadElement(tok.to_string()))?;
        if idx >= graph.states().len() {
            return Err(LassoLiteralError::BadIndex(idx));
        }
        if let Some(text) = pending_arrow.take() {
            let src = *nodes.last().unwrap();
            let label = graph
                .outgoing(src)
                .iter()
                .find(|e| e.tgt == idx && e.label.to_string() == text)
                .map(|e| e.label.clone())
                .ok_or_else(|| LassoLiteralError::NoSuchTransition {
                    src,
                    label: text.to_string(),
                    tgt: idx,
                })?;
            labels.push(label);
        }
        nodes.push(idx);
    }
    if pending_arrow.is_some() || nodes.is_empty() {
        return Err(LassoLiteralError::BadShape);
    }
    Ok((nodes, labels))
}

/// Parses `stem ; cycle` against a reachable graph, e.g. `0 ; 0 -c-> 0`.
/// Both parts are chains of state indices joined by `-label->` arrows; the
/// stem may be a single index. The cycle must close on its first state and
/// the stem must end there.
pub fn parse_lasso_literal(
    text: &str,
    graph: &LtsGraph,
) -> Result<Lasso<SState>, LassoLiteralError> {
    let mut parts = text.split(';');
    let (stem_part, cycle_part) = match (parts.next(), parts.next(), parts.next()) {
        (Some(s), Some(c), None) => (s, c),
        _ => return Err(LassoLiteralError::MissingSeparator),
    };
    let (stem_nodes, stem_labels) = parse_chain(stem_part, graph)?;
    let (cycle_nodes, cycle_labels) = parse_chain(cycle_part, graph)?;
    if cycle_labels.is_empty() {
        return Err(LassoLiteralError::EmptyCycleLiteral);
    }
    if cycle_nodes.first() != cycle_nodes.last() {
        return Err(LassoLiteralError::CycleNotClosed);
    }
    if stem_nodes.last() != cycle_nodes.first() {
        return Err(LassoLiteralError::StemDetached);
    }
    let proc_at = |i: usize| graph.states()[i].clone();
    let mut stem = Vec::new();
    for (pos, label) in stem_labels.iter().enumerate() {
        stem.push(SState::Proc(proc_at(stem_nodes[pos])));
        stem.push(SState::Mid {
            src: proc_at(stem_nodes[pos]),
            label: label.clone(),
            tgt: proc_at(stem_nodes[pos + 1]),
        });
    }
    let mut cycle = Vec::new();
    for (pos, label) in cycle_labels.iter().enumerate() {
        cycle.push(SState::Proc(proc_at(cycle_nodes[pos])));
        cycle.push(SState::Mid {
            src: proc_at(cycle_nodes[pos]),
            label: label.clone(),
            tgt: proc_at(cycle_nodes[pos + 1]),
        });
    }
    Lasso::new(stem, cycle).map_err(|_| LassoLiteralError::BadShape)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lts::reachable;
    use crate::parse::parse_spec;
    use crate::sos::Semantics;

    fn deriv_by_label(p: &Process, spec: &Spec, label: &str) -> Derivation {
        let hits: Vec<Derivation> = step_original(p, spec)
            .into_iter()
            .filter(|d| d.label().to_string() == label)
            .collect();
        assert_eq!(hits.len(), 1, "expected a unique {label} derivation");
        hits[0].clone()
    }

    fn tau_cycle_s(p: &Process) -> Lasso<SState> {
        Lasso::new(
            Vec::new(),
            vec![
                SState::Proc(p.clone()),
                SState::Mid {
                    src: p.clone(),
                    label: Label::Act(crate::syntax::Action::Tau),
                    tgt: p.clone(),
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn both_tau_derivations_lift_the_same_s_lasso() {
        let spec = parse_spec(
            "broadcast b; handshake c;\nagent A = c.A\nagent B = 'c.B + (tau.B + b!.0)\ninit A | B",
        )
        .unwrap();
        let rho = tau_cycle_s(spec.init());
        let ls = lifts(&rho, &spec, 1);
        assert_eq!(ls.len(), 2);
        for l in &ls {
            assert_eq!(hat_lasso(l), rho);
            l.check_genuine(&spec).unwrap();
        }
        assert_ne!(ls[0], ls[1]);

        // Unrolling doubles the cycle and squares the choice count.
        assert_eq!(lifts(&rho, &spec, 2).len(), 2 + 4);
    }

    #[test]
    fn a_shared_cycle_lifts_once_per_component_owner() {
        let spec = parse_spec(
            "broadcast b; handshake c;\nagent C = c.C\nagent B = c.B + b!.0\ninit C | B",
        )
        .unwrap();
        let p = spec.init();
        let rho = Lasso::new(
            Vec::new(),
            vec![
                SState::Proc(p.clone()),
                SState::Mid {
                    src: p.clone(),
                    label: Label::Act(crate::syntax::Action::handshake("c")),
                    tgt: p.clone(),
                },
            ],
        )
        .unwrap();
        let ls = lifts(&rho, &spec, 1);
        assert_eq!(ls.len(), 2);
        let kinds: Vec<bool> = ls
            .iter()
            .map(|l| match &l.cycle()[1] {
                UState::Deriv(Derivation::ParL { .. }) => true,
                UState::Deriv(Derivation::ParR { .. }) => false,
                other => panic!("unexpected cycle state {other}"),
            })
            .collect();
        assert!(kinds.contains(&true) && kinds.contains(&false));
    }

    #[test]
    fn decomposition_splits_a_stopped_component_off_as_a_finite_path() {
        // After the a-step, only the right component keeps moving.
        let spec = parse_spec("broadcast d; handshake a;\nagent T = tau.T\ninit a.tau.d!.0 | T")
            .unwrap();
        let p0 = spec.init();
        let a = deriv_by_label(&p0, &spec, "a");
        let p1 = a.target();
        let tau_right = {
            let hits: Vec<Derivation> = step_original(&p1, &spec)
                .into_iter()
                .filter(|d| matches!(d, Derivation::ParR { .. }))
                .collect();
            assert_eq!(hits.len(), 1);
            hits[0].clone()
        };
        let pi = Path::Lasso(
            Lasso::new(
                vec![UState::Proc(p0.clone()), UState::Deriv(a)],
                vec![UState::Proc(p1.clone()), UState::Deriv(tau_right)],
            )
            .unwrap(),
        );
        let (left, right) = decompose_par_u(&pi).unwrap();
        match &left {
            Path::Finite(fp) => {
                assert_eq!(fp.end().to_string(), "tau.d!.0");
                assert_eq!(
                    fp.labels().iter().map(ToString::to_string).collect::<Vec<_>>(),
                    ["a"]
                );
            }
            Path::Lasso(_) => panic!("left component stops after its a-step"),
        }
        match &right {
            Path::Lasso(l) => {
                assert_eq!(
                    l.cycle_labels().iter().map(ToString::to_string).collect::<Vec<_>>(),
                    ["tau"]
                );
            }
            Path::Finite(_) => panic!("right component loops forever"),
        }
    }

    #[test]
    fn decomposition_keeps_an_idle_component_as_a_single_state() {
        let spec =
            parse_spec("broadcast b; handshake c;\nagent C = c.C\ninit C | b!.0").unwrap();
        let p = spec.init();
        let c_left = deriv_by_label(&p, &spec, "c");
        assert!(matches!(c_left, Derivation::ParL { .. }));
        let pi = Path::Lasso(
            Lasso::new(Vec::new(), vec![UState::Proc(p.clone()), UState::Deriv(c_left)])
                .unwrap(),
        );
        let (left, right) = decompose_par_u(&pi).unwrap();
        match left {
            Path::Lasso(l) => assert_eq!(l.head().to_string(), "C"),
            Path::Finite(_) => panic!("C keeps cycling"),
        }
        match right {
            Path::Finite(fp) => {
                assert_eq!(fp.states().len(), 1);
                assert_eq!(fp.end().to_string(), "b!.0");
            }
            Path::Lasso(_) => panic!("the idle right component is a single state"),
        }
    }

    #[test]
    fn recomposition_reproduces_the_composite_states() {
        let spec = parse_spec("broadcast d; handshake a;\nagent T = tau.T\ninit a.tau.d!.0 | T")
            .unwrap();
        let p0 = spec.init();
        let a = deriv_by_label(&p0, &spec, "a");
        let p1 = a.target();
        let taus: Vec<Derivation> = step_original(&p1, &spec);
        let tau_right = taus
            .iter()
            .find(|d| matches!(d, Derivation::ParR { .. }))
            .unwrap()
            .clone();
        let composite = vec![
            UState::Proc(p0.clone()),
            UState::Deriv(a),
            UState::Proc(p1.clone()),
            UState::Deriv(tau_right),
            UState::Proc(p1.clone()),
        ];
        let pi = Path::Finite(FinitePath::new(composite.clone()).unwrap());
        let (Path::Finite(l), Path::Finite(r)) = decompose_par_u(&pi).unwrap() else {
            panic!("finite input decomposes to finite sides");
        };
        let (mut i, mut j) = (0usize, 0usize);
        for u in &composite {
            let (a, b) = project_par(u).unwrap();
            if l.states()[i] != a {
                i += 1;
            }
            assert_eq!(l.states()[i], a);
            if r.states()[j] != b {
                j += 1;
            }
            assert_eq!(r.states()[j], b);
        }
        assert_eq!(i + 1, l.states().len());
        assert_eq!(j + 1, r.states().len());
    }

    #[test]
    fn s_level_decomposition_enumerates_both_owners() {
        let spec = parse_spec(
            "broadcast b; handshake c;\nagent C = c.C\nagent B = c.B + b!.0\ninit C | B",
        )
        .unwrap();
        let p = spec.init();
        let rho = Path::Lasso(
            Lasso::new(
                Vec::new(),
                vec![
                    SState::Proc(p.clone()),
                    SState::Mid {
                        src: p.clone(),
                        label: Label::Act(crate::syntax::Action::handshake("c")),
                        tgt: p.clone(),
                    },
                ],
            )
            .unwrap(),
        );
        let decs = decompose_par_s(&rho, &spec, 1).unwrap();
        assert_eq!(decs.len(), 2);
        let mut shapes: Vec<(bool, bool)> = decs
            .iter()
            .map(|(l, r)| (l.is_finite(), r.is_finite()))
            .collect();
        shapes.sort();
        assert_eq!(shapes, [(false, true), (true, false)]);
    }

    #[test]
    fn restriction_and_relabelling_strip_off() {
        let spec = parse_spec("handshake c;\ninit (c.0 | 'c.0)\\c").unwrap();
        let p = spec.init();
        let tau = deriv_by_label(&p, &spec, "tau");
        let q = tau.target();
        let pi = Path::Finite(
            FinitePath::new(vec![
                UState::Proc(p.clone()),
                UState::Deriv(tau),
                UState::Proc(q.clone()),
            ])
            .unwrap(),
        );
        let (inner, name) = decompose_res(&pi).unwrap();
        assert_eq!(name.as_str(), "c");
        assert_eq!(inner.head().to_string(), "c.0 | 'c.0");

        let spec = parse_spec("handshake a e;\ninit (a.0)[e/a]").unwrap();
        let p = spec.init();
        let e = deriv_by_label(&p, &spec, "e");
        let q = e.target();
        let s_path = Path::Finite(
            FinitePath::new(vec![
                SState::Proc(p.clone()),
                SState::Mid {
                    src: p.clone(),
                    label: Label::Act(crate::syntax::Action::handshake("e")),
                    tgt: q.clone(),
                },
                SState::Proc(q.clone()),
            ])
            .unwrap(),
        );
        let (inner, _f) = decompose_rel(&s_path, &spec).unwrap();
        let Path::Finite(fp) = inner else { panic!() };
        assert_eq!(
            fp.labels().iter().map(ToString::to_string).collect::<Vec<_>>(),
            ["a"],
            "the midway label is mapped back to its preimage"
        );
    }

    #[test]
    fn suffix_classes_count_stem_positions_plus_rotations() {
        let spec = parse_spec("handshake a c;\nagent A = c.A\ninit a.A").unwrap();
        let p0 = spec.init();
        let a = deriv_by_label(&p0, &spec, "a");
        let p1 = a.target();
        let c = deriv_by_label(&p1, &spec, "c");
        let lasso = Lasso::new(
            vec![UState::Proc(p0.clone()), UState::Deriv(a)],
            vec![UState::Proc(p1), UState::Deriv(c)],
        )
        .unwrap();
        let classes = lasso.suffix_classes();
        assert_eq!(classes.len(), 4);
        assert_eq!(classes[0], lasso);
        assert!(classes[2].stem().is_empty());
        // A suffix of a suffix is again one of the classes.
        for cls in &classes {
            for sub in cls.suffix_classes() {
                assert!(
                    classes.iter().any(|c| c.cycle() == sub.cycle() && c.stem() == sub.stem()),
                    "suffix closure"
                );
            }
        }
    }

    #[test]
    fn constructors_reject_broken_paths() {
        let spec = parse_spec("handshake c;\ninit c.0").unwrap();
        let p = spec.init();
        let c = deriv_by_label(&p, &spec, "c");
        assert_eq!(
            FinitePath::new(vec![UState::Proc(p.clone()), UState::Deriv(c.clone())])
                .unwrap_err(),
            PathError::EndsMidway
        );
        assert_eq!(
            FinitePath::new(vec![UState::Proc(p.clone()), UState::Proc(p.clone())])
                .unwrap_err(),
            PathError::NotAdjacent(0)
        );
        assert_eq!(FinitePath::<UState>::new(Vec::new()).unwrap_err(), PathError::Empty);
        assert_eq!(
            Lasso::new(vec![UState::Proc(p.clone())], Vec::new()).unwrap_err(),
            PathError::EmptyCycle
        );

        // A midway state that names a non-transition is caught by the
        // genuineness check even when adjacency holds.
        let spec2 = parse_spec("handshake c;\ninit c.0 + c.c.0").unwrap();
        let q = spec2.init();
        let fake = SState::Mid {
            src: q.clone(),
            label: Label::Act(crate::syntax::Action::handshake("c")),
            tgt: q.clone(),
        };
        let path = FinitePath::new(vec![
            SState::Proc(q.clone()),
            fake,
            SState::Proc(q.clone()),
        ])
        .unwrap();
        assert_eq!(path.check_genuine(&spec2).unwrap_err(), PathError::NotGenuine(1));
    }

    #[test]
    fn lasso_literals_resolve_against_the_graph() {
        let spec =
            parse_spec("broadcast b; handshake c;\nagent B = c.B + b!.0\ninit B").unwrap();
        let graph = reachable(&spec, Semantics::Original, 100).unwrap();
        let lasso = parse_lasso_literal("0 ; 0 -c-> 0", &graph).unwrap();
        assert!(lasso.stem().is_empty());
        assert_eq!(lasso.cycle().len(), 2);
        assert_eq!(lasso.head().to_string(), "B");
        lasso.check_genuine(&spec).unwrap();

        let stemmed = parse_lasso_literal("0 -b!-> 1 ; 1 -tau-> 1", &graph);
        assert!(matches!(
            stemmed,
            Err(LassoLiteralError::NoSuchTransition { src: 1, .. })
        ));
        assert!(matches!(
            parse_lasso_literal("0 -c-> 0", &graph),
            Err(LassoLiteralError::MissingSeparator)
        ));
        assert!(matches!(
            parse_lasso_literal("0 ; 0 -b!-> 1", &graph),
            Err(LassoLiteralError::CycleNotClosed)
        ));
        assert!(matches!(
            parse_lasso_literal("1 ; 0 -c-> 0", &graph),
            Err(LassoLiteralError::StemDetached)
        ));
    }

    #[test]
    fn hat_forgets_derivations_but_keeps_the_triple() {
        let spec = parse_spec("handshake c;\ninit c.0 | 'c.0").unwrap();
        let p = spec.init();
        let tau = deriv_by_label(&p, &spec, "tau");
        let q = tau.target();
        let u = FinitePath::new(vec![
            UState::Proc(p.clone()),
            UState::Deriv(tau),
            UState::Proc(q.clone()),
        ])
        .unwrap();
        let s = hat_finite(&u);
        assert_eq!(
            s.states()[1],
            SState::Mid {
                src: p.clone(),
                label: Label::Act(crate::syntax::Action::Tau),
                tgt: q
            }
        );
        assert_eq!(s.transition_count(), u.transition_count());
    }
}
