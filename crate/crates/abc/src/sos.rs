//! Structural operational semantics, kept at the level of derivations.
//!
//! A [`Derivation`] is the proof tree that infers one transition, with one
//! constructor per inference rule. Keeping proofs rather than bare
//! `(source, label, target)` triples is what later lets concurrency between
//! transitions be decided by comparing proof shapes.
//!
//! Two rule sets share the constructors. Under [`Semantics::Original`],
//! broadcast actions carry a negative premise: a send or receive may pass a
//! parallel component only if that component cannot receive the broadcast.
//! Under [`Semantics::Discard`] the negative premise is replaced by explicit
//! discard transitions `b:`, stationary self-loops that witness "cannot
//! receive `b`" positively, and every broadcast action must synchronise with
//! a receive or a discard on the other side. Restricted to action labels the
//! two rule sets generate the same transitions.

use std::sync::Arc;

use crate::syntax::{Action, BroadcastKind, Env, Label, Name, Process, Relabelling, Spec};

/// Which rule set to derive transitions under.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Semantics {
    /// Negative premises on the broadcast rules; no discard labels.
    Original,
    /// Positive discard transitions; broadcasts always pair across `|`.
    Discard,
}

impl std::fmt::Display for Semantics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Semantics::Original => f.write_str("original"),
            Semantics::Discard => f.write_str("discard"),
        }
    }
}

/// A proof tree for one transition.
///
/// `src`, `label` and `target` are computed from the shape, so equal
/// derivations always prove equal transitions; distinct derivations may
/// still prove the same transition.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Derivation {
    /// `α.P` fires its prefix.
    Act { action: Action, target: Arc<Process> },
    /// The left branch of a sum moves and the sum is resolved.
    SumL { inner: Arc<Derivation>, right: Arc<Process> },
    /// The right branch of a sum moves and the sum is resolved.
    SumR { left: Arc<Process>, inner: Arc<Derivation> },
    /// The left component moves alone; the right stands still.
    ParL { inner: Arc<Derivation>, right: Arc<Process> },
    /// The right component moves alone; the left stands still.
    ParR { left: Arc<Process>, inner: Arc<Derivation> },
    /// Both components move together: complementary handshakes become `tau`,
    /// broadcast labels on one name combine by [`sync_label`].
    Sync { left: Arc<Derivation>, right: Arc<Derivation> },
    /// The move survives a restriction (its label is not the restricted
    /// handshake in either polarity).
    Res { inner: Arc<Derivation>, name: Name },
    /// The move is relabelled.
    Rel { inner: Arc<Derivation>, relabelling: Arc<Relabelling> },
    /// An agent identifier moves by unfolding its defining equation.
    Rec { agent: Name, inner: Arc<Derivation> },
    /// `0` discards a broadcast.
    Dis0 { name: Name },
    /// `α.P` discards broadcast `b` when `α` is not the receive `b?`.
    Dis1 { name: Name, action: Action, body: Arc<Process> },
    /// A sum discards a broadcast because both branches do.
    Dis2 { left: Arc<Derivation>, right: Arc<Derivation> },
}

impl Derivation {
    /// The process this derivation steps from.
    pub fn src(&self) -> Process {
        match self {
            Derivation::Act { action, target } => {
                Process::Prefix(action.clone(), target.clone())
            }
            Derivation::SumL { inner, right } => {
                Process::Choice(Arc::new(inner.src()), right.clone())
            }
            Derivation::SumR { left, inner } => {
                Process::Choice(left.clone(), Arc::new(inner.src()))
            }
            Derivation::ParL { inner, right } => {
                Process::Par(Arc::new(inner.src()), right.clone())
            }
            Derivation::ParR { left, inner } => {
                Process::Par(left.clone(), Arc::new(inner.src()))
            }
            Derivation::Sync { left, right } => {
                Process::Par(Arc::new(left.src()), Arc::new(right.src()))
            }
            Derivation::Res { inner, name } => {
                Process::Restrict(Arc::new(inner.src()), name.clone())
            }
            Derivation::Rel { inner, relabelling } => {
                Process::Relabel(Arc::new(inner.src()), relabelling.clone())
            }
            Derivation::Rec { agent, .. } => Process::Agent(agent.clone()),
            Derivation::Dis0 { .. } => Process::Nil,
            Derivation::Dis1 { action, body, .. } => {
                Process::Prefix(action.clone(), body.clone())
            }
            Derivation::Dis2 { left, right } => {
                Process::Choice(Arc::new(left.src()), Arc::new(right.src()))
            }
        }
    }

    /// The process this derivation steps to. Discard derivations are
    /// stationary: their target equals their source. In particular an
    /// unfolded discard keeps the agent identifier as its target rather
    /// than the defining body, so the self-loop stays a self-loop.
    pub fn target(&self) -> Process {
        match self {
            Derivation::Act { target, .. } => (**target).clone(),
            Derivation::SumL { inner, .. } | Derivation::SumR { inner, .. } => inner.target(),
            Derivation::ParL { inner, right } => {
                Process::Par(Arc::new(inner.target()), right.clone())
            }
            Derivation::ParR { left, inner } => {
                Process::Par(left.clone(), Arc::new(inner.target()))
            }
            Derivation::Sync { left, right } => {
                Process::Par(Arc::new(left.target()), Arc::new(right.target()))
            }
            Derivation::Res { inner, name } => {
                Process::Restrict(Arc::new(inner.target()), name.clone())
            }
            Derivation::Rel { inner, relabelling } => {
                Process::Relabel(Arc::new(inner.target()), relabelling.clone())
            }
            Derivation::Rec { agent, inner } => {
                if inner.label().is_discard() {
                    Process::Agent(agent.clone())
                } else {
                    inner.target()
                }
            }
            Derivation::Dis0 { .. } => Process::Nil,
            Derivation::Dis1 { action, body, .. } => {
                Process::Prefix(action.clone(), body.clone())
            }
            Derivation::Dis2 { left, right } => {
                Process::Choice(Arc::new(left.target()), Arc::new(right.target()))
            }
        }
    }

    /// The transition label this derivation proves.
    ///
    /// # Panics
    ///
    /// Panics on a hand-built `Sync` whose component labels do not combine.
    /// Derivations produced by [`step`] always combine.
    pub fn label(&self) -> Label {
        match self {
            Derivation::Act { action, .. } => Label::Act(action.clone()),
            Derivation::SumL { inner, .. }
            | Derivation::SumR { inner, .. }
            | Derivation::ParL { inner, .. }
            | Derivation::ParR { inner, .. }
            | Derivation::Res { inner, .. }
            | Derivation::Rec { inner, .. } => inner.label(),
            Derivation::Sync { left, right } => sync_label(&left.label(), &right.label())
                .expect("synchronisation of incompatible labels"),
            Derivation::Rel { inner, relabelling } => relabelling.apply_label(&inner.label()),
            Derivation::Dis0 { name } | Derivation::Dis1 { name, .. } => {
                Label::Discard(name.clone())
            }
            Derivation::Dis2 { left, .. } => left.label(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Send,
    Receive,
    Discard,
}

fn broadcast_role(l: &Label) -> Option<(&Name, Role)> {
    match l {
        Label::Act(Action::Broadcast { name, kind: BroadcastKind::Send }) => {
            Some((name, Role::Send))
        }
        Label::Act(Action::Broadcast { name, kind: BroadcastKind::Receive }) => {
            Some((name, Role::Receive))
        }
        Label::Discard(name) => Some((name, Role::Discard)),
        _ => None,
    }
}

/// The label two sides of a parallel composition produce when they move
/// together, if they can.
///
/// Complementary handshakes combine to `tau`. Broadcast labels combine only
/// on the same name, by joining roles: a send absorbs a receive or a discard
/// and stays a send, a receive absorbs a discard, two receives stay a
/// receive, two discards stay a discard. Two sends never combine.
pub fn sync_label(l: &Label, r: &Label) -> Option<Label> {
    if let (
        Label::Act(Action::Handshake { name: n1, barred: b1 }),
        Label::Act(Action::Handshake { name: n2, barred: b2 }),
    ) = (l, r)
    {
        if n1 == n2 && b1 != b2 {
            return Some(Label::Act(Action::Tau));
        }
        return None;
    }
    let (n1, r1) = broadcast_role(l)?;
    let (n2, r2) = broadcast_role(r)?;
    if n1 != n2 {
        return None;
    }
    let role = match (r1, r2) {
        (Role::Send, Role::Send) => return None,
        (Role::Send, _) | (_, Role::Send) => Role::Send,
        (Role::Receive, _) | (_, Role::Receive) => Role::Receive,
        (Role::Discard, Role::Discard) => Role::Discard,
    };
    Some(match role {
        Role::Send => Label::Act(Action::send(n1.clone())),
        Role::Receive => Label::Act(Action::receive(n1.clone())),
        Role::Discard => Label::Discard(n1.clone()),
    })
}

/// Whether `p` has a receive transition for broadcast name `b`. This is the
/// premise the broadcast rules negate, decided structurally; guarded
/// defining equations keep the recursion finite.
pub fn can_receive(p: &Process, env: &Env, b: &Name) -> bool {
    match p {
        Process::Nil => false,
        Process::Prefix(a, _) => a.receive_name() == Some(b),
        Process::Choice(l, r) | Process::Par(l, r) => {
            can_receive(l, env, b) || can_receive(r, env, b)
        }
        Process::Restrict(q, _) => can_receive(q, env, b),
        Process::Relabel(q, f) => {
            // q[f] receives b exactly when q receives some preimage of b.
            let identity = f.broadcast_pairs().all(|(old, _)| old != b);
            (identity && can_receive(q, env, b))
                || f.broadcast_pairs()
                    .any(|(old, new)| new == b && can_receive(q, env, old))
        }
        Process::Agent(x) => env.body(x).is_some_and(|body| can_receive(body, env, b)),
    }
}

/// Whether a label interleaves through `|` on its own: handshakes and `tau`
/// do, broadcast actions and discards never move one-sided under the
/// discard rules (and only past a deaf component under the original ones).
fn interleaves(l: &Label) -> bool {
    matches!(l, Label::Act(Action::Tau) | Label::Act(Action::Handshake { .. }))
}

fn blocked_by_restriction(l: &Label, c: &Name) -> bool {
    matches!(l, Label::Act(Action::Handshake { name, .. }) if name == c)
}

/// All derivations of `p` under the given rule set, sorted and deduplicated.
pub fn step(p: &Process, spec: &Spec, sem: Semantics) -> Vec<Derivation> {
    let mut out = step_in(p, spec, sem);
    out.sort();
    out.dedup();
    out
}

/// All derivations under the negative-premise rules.
pub fn step_original(p: &Process, spec: &Spec) -> Vec<Derivation> {
    step(p, spec, Semantics::Original)
}

/// All derivations under the discard rules.
pub fn step_discard(p: &Process, spec: &Spec) -> Vec<Derivation> {
    step(p, spec, Semantics::Discard)
}

/// Whether `p` has any transition labelled `l` under the given rule set.
pub fn admits(p: &Process, spec: &Spec, sem: Semantics, l: &Label) -> bool {
    step_in(p, spec, sem).iter().any(|d| d.label() == *l)
}

fn step_in(p: &Process, spec: &Spec, sem: Semantics) -> Vec<Derivation> {
    match p {
        Process::Nil => match sem {
            Semantics::Original => Vec::new(),
            Semantics::Discard => spec
                .broadcast_names()
                .iter()
                .map(|b| Derivation::Dis0 { name: b.clone() })
                .collect(),
        },
        Process::Prefix(a, q) => {
            let mut out = vec![Derivation::Act { action: a.clone(), target: q.clone() }];
            if sem == Semantics::Discard {
                for b in spec.broadcast_names() {
                    if a.receive_name() != Some(b) {
                        out.push(Derivation::Dis1 {
                            name: b.clone(),
                            action: a.clone(),
                            body: q.clone(),
                        });
                    }
                }
            }
            out
        }
        Process::Choice(l, r) => {
            let ls = step_in(l, spec, sem);
            let rs = step_in(r, spec, sem);
            let mut out = Vec::new();
            for x in &ls {
                if !x.label().is_discard() {
                    out.push(Derivation::SumL { inner: Arc::new(x.clone()), right: r.clone() });
                }
            }
            for z in &rs {
                if !z.label().is_discard() {
                    out.push(Derivation::SumR { left: l.clone(), inner: Arc::new(z.clone()) });
                }
            }
            // A sum discards only when both branches discard the same name.
            for x in &ls {
                let Label::Discard(b) = x.label() else { continue };
                for z in &rs {
                    if z.label() == Label::Discard(b.clone()) {
                        out.push(Derivation::Dis2 {
                            left: Arc::new(x.clone()),
                            right: Arc::new(z.clone()),
                        });
                    }
                }
            }
            out
        }
        Process::Par(l, r) => {
            let ls = step_in(l, spec, sem);
            let rs = step_in(r, spec, sem);
            let mut out = Vec::new();
            for x in &ls {
                if interleaves(&x.label()) {
                    out.push(Derivation::ParL { inner: Arc::new(x.clone()), right: r.clone() });
                }
            }
            for z in &rs {
                if interleaves(&z.label()) {
                    out.push(Derivation::ParR { left: l.clone(), inner: Arc::new(z.clone()) });
                }
            }
            if sem == Semantics::Original {
                // A broadcast action passes a component one-sided only if
                // that component cannot receive the broadcast.
                for x in &ls {
                    let lab = x.label();
                    if let Some((b, _)) = broadcast_role(&lab) {
                        if !can_receive(r, spec.env(), b) {
                            out.push(Derivation::ParL {
                                inner: Arc::new(x.clone()),
                                right: r.clone(),
                            });
                        }
                    }
                }
                for z in &rs {
                    let lab = z.label();
                    if let Some((b, _)) = broadcast_role(&lab) {
                        if !can_receive(l, spec.env(), b) {
                            out.push(Derivation::ParR {
                                left: l.clone(),
                                inner: Arc::new(z.clone()),
                            });
                        }
                    }
                }
            }
            for x in &ls {
                for z in &rs {
                    if sync_label(&x.label(), &z.label()).is_some() {
                        out.push(Derivation::Sync {
                            left: Arc::new(x.clone()),
                            right: Arc::new(z.clone()),
                        });
                    }
                }
            }
            out
        }
        Process::Restrict(q, c) => step_in(q, spec, sem)
            .into_iter()
            .filter(|d| !blocked_by_restriction(&d.label(), c))
            .map(|d| Derivation::Res { inner: Arc::new(d), name: c.clone() })
            .collect(),
        Process::Relabel(q, f) => step_in(q, spec, sem)
            .into_iter()
            .map(|d| Derivation::Rel { inner: Arc::new(d), relabelling: f.clone() })
            .collect(),
        Process::Agent(x) => {
            let body = spec.env().body(x).expect("agent bodies are checked at assembly");
            step_in(body, spec, sem)
                .into_iter()
                .map(|d| Derivation::Rec { agent: x.clone(), inner: Arc::new(d) })
                .collect()
        }
    }
}
