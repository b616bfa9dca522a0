//! Justness: the completeness criterion ruling out runs in which some
//! parallel component is forever denied a non-blocking action that stays
//! enabled.
//!
//! Two independent checkers are provided. The first evaluates the
//! coinductive definition directly on `S`-paths: a path is just for a set
//! `Y` of handshake actions (those an environment could block forever)
//! when every suffix satisfies the clause for its head shape, with paths
//! of parallel compositions decomposing into components whose blocked
//! sets must not enable a handshake between them. The second works on
//! derivation-level lassos: a lasso is unjust exactly when some abstract
//! transition with a non-blocking label is enabled at every cycle state,
//! so that it is forever enabled yet never taken. The two agree on
//! ultimately periodic paths; keeping both honest against each other is
//! the point of having two.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::abstraction::{
    abstract_of, enabled_during, enabled_in_process, AbstractTransition,
};
use crate::ltl::{admitted_by, FairnessSpec, LtlError};
use crate::paths::{
    decompose_par_s, decompose_par_u, decompose_rel, decompose_res, lift_path, Path, SState,
    State, UState,
};
use crate::sos::{step_original, Derivation};
use crate::syntax::{Action, Label, Process, Spec};

/// Actions no environment can block: internal moves and broadcast sends.
pub fn non_blocking_action(a: &Action) -> bool {
    matches!(a, Action::Tau) || a.is_broadcast_send()
}

pub fn non_blocking(label: &Label) -> bool {
    match label {
        Label::Act(a) => non_blocking_action(a),
        Label::Discard(_) => false,
    }
}

/// A finite path may only stop where no non-blocking action is enabled;
/// infinite paths always progress.
pub fn progressing(path: &Path<SState>, spec: &Spec) -> bool {
    match path {
        Path::Lasso(_) => true,
        Path::Finite(p) => step_original(p.end(), spec)
            .iter()
            .all(|d| !non_blocking(&d.label())),
    }
}

/// A set of handshake actions assumed blocked by the environment.
pub type YSet = BTreeSet<Action>;

fn render_yset(y: &YSet) -> String {
    let items: Vec<String> = y.iter().map(ToString::to_string).collect();
    format!("{{{}}}", items.join(", "))
}

/// Keeps only the inclusion-minimal sets.
fn minimize(mut sets: Vec<YSet>) -> Vec<YSet> {
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    sets.dedup();
    let mut out: Vec<YSet> = Vec::new();
    for s in sets {
        if !out.iter().any(|m| m.is_subset(&s)) {
            out.push(s);
        }
    }
    out
}

/// Conjunction of two antichains of lower bounds: pairwise unions,
/// minimized. An empty antichain is unsatisfiable and absorbs.
fn conjoin(a: &[YSet], b: &[YSet]) -> Vec<YSet> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            let mut u = x.clone();
            u.extend(y.iter().cloned());
            out.push(u);
        }
    }
    minimize(out)
}

struct Def1Ctx<'a> {
    spec: &'a Spec,
    lift_bound: usize,
    memo: HashMap<Path<SState>, Vec<YSet>>,
}

impl<'a> Def1Ctx<'a> {
    /// The inclusion-minimal blocked sets `Y` for which the path is
    /// `Y`-just; empty when it is just for no `Y`. The recursion follows
    /// the clause for each suffix's head shape and terminates because
    /// every decomposition strips one operator off every state.
    fn min_sets(&mut self, path: &Path<SState>) -> Vec<YSet> {
        if let Some(v) = self.memo.get(path) {
            return v.clone();
        }
        let mut acc = vec![YSet::new()];
        'outer: for class in path.suffix_classes() {
            for clause in self.clauses_at(&class) {
                acc = conjoin(&acc, &clause);
                if acc.is_empty() {
                    break 'outer;
                }
            }
        }
        self.memo.insert(path.clone(), acc.clone());
        acc
    }

    /// The constraints contributed by one suffix: the stopping clause for
    /// finite paths, and a structural clause when the head process is a
    /// parallel composition, restriction, or relabelling.
    fn clauses_at(&mut self, class: &Path<SState>) -> Vec<Vec<YSet>> {
        let mut out = Vec::new();
        if let Path::Finite(p) = class {
            out.push(end_clause(p.end(), self.spec));
        }
        match class.head().proc() {
            Some(Process::Par(..)) => {
                let decs = decompose_par_s(class, self.spec, self.lift_bound)
                    .expect("parallel shape is preserved along paths");
                let mut cands = Vec::new();
                for (l, r) in decs {
                    let ms_l = self.min_sets(&l);
                    let ms_r = self.min_sets(&r);
                    for x in &ms_l {
                        for z in &ms_r {
                            if compatible(x, z) {
                                let mut u = x.clone();
                                u.extend(z.iter().cloned());
                                cands.push(u);
                            }
                        }
                    }
                }
                out.push(minimize(cands));
            }
            Some(Process::Restrict(..)) => {
                let (inner, c) = decompose_res(class)
                    .expect("restriction shape is preserved along paths");
                let barred = Action::coname(c.as_str());
                let plain = Action::handshake(c.as_str());
                let sets = self
                    .min_sets(&inner)
                    .into_iter()
                    .map(|mut m| {
                        m.remove(&plain);
                        m.remove(&barred);
                        m
                    })
                    .collect();
                out.push(minimize(sets));
            }
            Some(Process::Relabel(..)) => {
                let (inner, f) = decompose_rel(class, self.spec)
                    .expect("relabelling shape is preserved along paths");
                let sets = self
                    .min_sets(&inner)
                    .into_iter()
                    .map(|m| m.iter().map(|a| f.apply_action(a)).collect())
                    .collect();
                out.push(minimize(sets));
            }
            _ => {}
        }
        out
    }
}

/// One component may not wait forever on a handshake its sibling is
/// assumed to refuse: the blocked sets must not contain complementary
/// actions.
fn compatible(x: &YSet, z: &YSet) -> bool {
    x.iter().all(|a| {
        let bar = a.complement().expect("blocked sets hold handshake actions only");
        !z.contains(&bar)
    })
}

/// A stopped path is just only if everything still enabled could have
/// been blocked: receives may idle freely, handshakes go into the blocked
/// set, and an enabled internal move or broadcast send admits no excuse.
fn end_clause(end: &Process, spec: &Spec) -> Vec<YSet> {
    let mut y = YSet::new();
    for d in step_original(end, spec) {
        match d.label() {
            Label::Act(a) if non_blocking_action(&a) => return Vec::new(),
            Label::Act(a) if a.is_handshake() => {
                y.insert(a);
            }
            _ => {}
        }
    }
    vec![y]
}

/// The minimal blocked sets witnessing justness of an `S`-path, by the
/// coinductive definition evaluated over decompositions periodic within
/// the given lift bound. Raising the bound only refines the answer
/// downward: longer periods admit more decompositions, such as two
/// components taking turns serving a loop so that neither ever waits.
pub fn min_blocked_sets(path: &Path<SState>, spec: &Spec, lift_bound: usize) -> Vec<YSet> {
    Def1Ctx { spec, lift_bound, memo: HashMap::new() }.min_sets(path)
}

/// Whether the path is `Y`-just for this particular blocked set.
pub fn y_just_def1(path: &Path<SState>, y: &YSet, spec: &Spec, lift_bound: usize) -> bool {
    min_blocked_sets(path, spec, lift_bound).iter().any(|m| m.is_subset(y))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JustnessMethod {
    /// Direct evaluation of the coinductive definition on the `S`-path.
    Def1,
    /// Search for a derivation-level lift with no forever-enabled
    /// non-blocking abstract transition.
    Thm3Lift,
}

impl fmt::Display for JustnessMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JustnessMethod::Def1 => f.write_str("blocked-set decomposition"),
            JustnessMethod::Thm3Lift => f.write_str("derivation-level lift search"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct JustnessVerdict {
    pub just: bool,
    pub method: JustnessMethod,
    pub lift_bound: usize,
    pub witness: String,
}

/// Justness by the coinductive definition. The witness names a minimal
/// blocked set, or explains where the decomposition constraints collapse.
pub fn just_def1(path: &Path<SState>, spec: &Spec, lift_bound: usize) -> JustnessVerdict {
    let mut ctx = Def1Ctx { spec, lift_bound, memo: HashMap::new() };
    let sets = ctx.min_sets(path);
    let just = !sets.is_empty();
    let mut witness = if just {
        format!("just for every blocked set extending {}", render_yset(&sets[0]))
    } else {
        "no blocked set satisfies all component constraints".to_string()
    };
    witness.push('\n');
    witness.push_str(&certificate(&mut ctx, path, 0));
    JustnessVerdict { just, method: JustnessMethod::Def1, lift_bound, witness }
}

/// An indented tree retracing the decomposition the verdict rests on.
fn certificate(ctx: &mut Def1Ctx<'_>, path: &Path<SState>, depth: usize) -> String {
    let pad = "  ".repeat(depth);
    let sets = ctx.min_sets(path);
    let verdict = if sets.is_empty() {
        "unjustifiable".to_string()
    } else {
        format!("minimal blocked sets {}", sets.iter().map(render_yset).collect::<Vec<_>>().join(" "))
    };
    let mut out = format!("{pad}{path}: {verdict}\n");
    if let Path::Finite(p) = path {
        let end = end_clause(p.end(), ctx.spec);
        if end.is_empty() {
            out.push_str(&format!(
                "{pad}  stops at `{}` although a non-blocking action is enabled\n",
                p.end()
            ));
        }
    }
    match path.head().proc() {
        Some(Process::Par(..)) => {
            let decs = decompose_par_s(path, ctx.spec, ctx.lift_bound)
                .expect("parallel shape is preserved along paths");
            let chosen = decs
                .iter()
                .find(|(l, r)| {
                    !ctx.min_sets(l).is_empty() && !ctx.min_sets(r).is_empty()
                })
                .or_else(|| decs.first());
            if let Some((l, r)) = chosen {
                out.push_str(&format!("{pad}  components:\n"));
                out.push_str(&certificate(ctx, l, depth + 2));
                out.push_str(&certificate(ctx, r, depth + 2));
            }
        }
        Some(Process::Restrict(..)) => {
            let (inner, c) =
                decompose_res(path).expect("restriction shape is preserved along paths");
            out.push_str(&format!("{pad}  under \\{c}:\n"));
            out.push_str(&certificate(ctx, &inner, depth + 2));
        }
        Some(Process::Relabel(..)) => {
            let (inner, _f) = decompose_rel(path, ctx.spec)
                .expect("relabelling shape is preserved along paths");
            out.push_str(&format!("{pad}  before relabelling:\n"));
            out.push_str(&certificate(ctx, &inner, depth + 2));
        }
        _ => {}
    }
    out
}

fn en_at(state: &UState, nu: &AbstractTransition, spec: &Spec) -> bool {
    match state {
        UState::Proc(p) => enabled_in_process(nu, p, spec),
        UState::Deriv(d) => enabled_during(nu, d, spec),
    }
}

/// The abstract transition, if any, that convicts a derivation-level path
/// of unjustness: non-blocking label, enabled at every cycle state (for a
/// finite path: at its end). `None` means the path is just.
pub fn thm3_violation(path: &Path<UState>, spec: &Spec) -> Option<AbstractTransition> {
    match path {
        Path::Finite(p) => step_original(p.end(), spec)
            .iter()
            .filter(|d| non_blocking(&d.label()))
            .find_map(abstract_of_checked),
        Path::Lasso(l) => {
            let anchor = l
                .cycle()
                .iter()
                .find_map(State::proc)
                .expect("an alternating cycle contains a process state");
            let mut candidates: Vec<AbstractTransition> = step_original(anchor, spec)
                .iter()
                .filter_map(|d| abstract_of(d))
                .filter(|nu| non_blocking_action(&nu.label()))
                .collect();
            candidates.sort();
            candidates.dedup();
            candidates
                .into_iter()
                .find(|nu| l.cycle().iter().all(|u| en_at(u, nu, spec)))
        }
    }
}

fn abstract_of_checked(d: &Derivation) -> Option<AbstractTransition> {
    let nu = abstract_of(d);
    debug_assert!(nu.is_some(), "non-blocking labels always have an abstract form");
    nu
}

/// Justness of a derivation-level path: no non-blocking abstract
/// transition stays enabled forever without being taken. On a lasso
/// "forever" means at every cycle state.
pub fn just_thm3_u(path: &Path<UState>, spec: &Spec) -> bool {
    thm3_violation(path, spec).is_none()
}

/// Justness of an `S`-path by searching its derivation-level lifts, with
/// cycles unrolled at most `lift_bound` times. Sound always; complete up
/// to that bound.
pub fn just_s_via_lifts(
    path: &Path<SState>,
    spec: &Spec,
    lift_bound: usize,
) -> JustnessVerdict {
    let lifts = lift_path(path, spec, lift_bound);
    let mut first_violation = None;
    for lift in &lifts {
        match thm3_violation(lift, spec) {
            None => {
                return JustnessVerdict {
                    just: true,
                    method: JustnessMethod::Thm3Lift,
                    lift_bound,
                    witness: format!("just derivation-level lift:\n{lift}"),
                };
            }
            Some(nu) => {
                if first_violation.is_none() {
                    first_violation = Some((lift.clone(), nu));
                }
            }
        }
    }
    let witness = match first_violation {
        Some((lift, nu)) => format!(
            "every lift with period up to {lift_bound} keeps a non-blocking abstract \
             transition enabled through its whole cycle; e.g. `{nu}` along\n{lift}"
        ),
        None => "the path has no derivation-level lift".to_string(),
    };
    JustnessVerdict { just: false, method: JustnessMethod::Thm3Lift, lift_bound, witness }
}

/// Whether an abstract transition is enabled along a derivation-level
/// path in the component-tracking sense: some suffix ends enabled, or the
/// path decomposes and the matching component is enabled in it.
pub fn nu_enabled(path: &Path<UState>, nu: &AbstractTransition, spec: &Spec) -> bool {
    path.suffix_classes().iter().any(|class| nu_enabled_local(class, nu, spec))
}

fn is_par_u(s: &UState) -> bool {
    match s {
        UState::Proc(p) => matches!(p, Process::Par(..)),
        UState::Deriv(d) => matches!(
            d,
            Derivation::ParL { .. } | Derivation::ParR { .. } | Derivation::Sync { .. }
        ),
    }
}

fn nu_enabled_local(class: &Path<UState>, nu: &AbstractTransition, spec: &Spec) -> bool {
    if let Path::Finite(p) = class {
        if enabled_in_process(nu, p.end(), spec) {
            return true;
        }
    }
    let head = class.head();
    if is_par_u(head) {
        let (left, right) =
            decompose_par_u(class).expect("parallel shape is preserved along paths");
        return match nu {
            AbstractTransition::ParL(n1) => nu_enabled(&left, n1, spec),
            AbstractTransition::ParR(n2) => nu_enabled(&right, n2, spec),
            AbstractTransition::Sync(n1, n2) => {
                nu_enabled(&left, n1, spec) && nu_enabled(&right, n2, spec)
            }
            _ => false,
        };
    }
    match head {
        UState::Proc(Process::Restrict(..)) | UState::Deriv(Derivation::Res { .. }) => {
            let (inner, c) =
                decompose_res(class).expect("restriction shape is preserved along paths");
            match nu {
                AbstractTransition::Res(n, name) if *name == c => {
                    nu_enabled(&inner, n, spec)
                }
                _ => false,
            }
        }
        UState::Proc(Process::Relabel(..)) | UState::Deriv(Derivation::Rel { .. }) => {
            let (inner, f) = decompose_rel(class, spec)
                .expect("relabelling shape is preserved along paths");
            match nu {
                AbstractTransition::Rel(n, g) if *g == f => nu_enabled(&inner, n, spec),
                _ => false,
            }
        }
        _ => false,
    }
}

/// A complete run: stops only where nothing non-blocking is enabled, is
/// just, and satisfies every fairness assumption.
pub fn complete(
    path: &Path<SState>,
    fs: &FairnessSpec,
    spec: &Spec,
    lift_bound: usize,
) -> Result<bool, LtlError> {
    Ok(progressing(path, spec)
        && admitted_by(path, fs)?
        && just_def1(path, spec, lift_bound).just)
}
