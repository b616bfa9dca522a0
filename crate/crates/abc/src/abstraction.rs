//! Abstract transitions: derivations quotiented by what the rest of the
//! system is doing.
//!
//! A move of one side of a parallel composition is the same abstract
//! transition regardless of the state of the other side, and a broadcast
//! send is the same abstract transition regardless of which receivers pick
//! it up: sends are under the sender's sole control. Sums and agent
//! unfoldings are erased as well, so an abstract transition survives both
//! the resolution of a choice it did not take part in and the unfolding of
//! a defining equation. Transitions labelled with a broadcast receive or a
//! discard have no abstract form.
//!
//! [`AbstractTransition`] is the canonical representation of one
//! equivalence class: passive parallel sides become `_`, sums and
//! unfoldings disappear, and only restrictions, relabellings and genuine
//! handshake synchronisations keep structure. Two derivations are
//! equivalent exactly when they canonicalize to the same value.

use std::sync::Arc;

use crate::conc::concurrent_oneway;
use crate::sos::{step_original, Derivation};
use crate::syntax::{Action, Label, Name, Process, Relabelling, Spec};

/// Canonical form of an equivalence class of derivations. Its label is an
/// [`Action`], never a discard, and never a broadcast receive.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AbstractTransition {
    /// `<α>P`: a prefix fires; the continuation is part of the identity.
    Act { action: Action, target: Arc<Process> },
    /// `ν | _`: the left side moves; whatever sits right of it is ignored.
    /// A broadcast send also absorbs any receivers on its right.
    ParL(Arc<AbstractTransition>),
    /// `_ | ν`: mirror image of `ParL`.
    ParR(Arc<AbstractTransition>),
    /// `ν1 | ν2`: a handshake synchronisation; both halves matter.
    Sync(Arc<AbstractTransition>, Arc<AbstractTransition>),
    Res(Arc<AbstractTransition>, Name),
    Rel(Arc<AbstractTransition>, Arc<Relabelling>),
}

impl AbstractTransition {
    pub fn label(&self) -> Action {
        match self {
            AbstractTransition::Act { action, .. } => action.clone(),
            AbstractTransition::ParL(v) | AbstractTransition::ParR(v) => v.label(),
            AbstractTransition::Sync(..) => Action::Tau,
            AbstractTransition::Res(v, _) => v.label(),
            AbstractTransition::Rel(v, f) => f.apply_action(&v.label()),
        }
    }
}

fn abstractable(l: &Label) -> bool {
    match l {
        Label::Act(a) => !a.is_broadcast_receive(),
        Label::Discard(_) => false,
    }
}

/// The abstract transition a derivation belongs to, or `None` for receive-
/// and discard-labelled derivations, which have no abstract form.
pub fn abstract_of(d: &Derivation) -> Option<AbstractTransition> {
    if !abstractable(&d.label()) {
        return None;
    }
    Some(match d {
        Derivation::Act { action, target } => {
            AbstractTransition::Act { action: action.clone(), target: target.clone() }
        }
        Derivation::SumL { inner, .. }
        | Derivation::SumR { inner, .. }
        | Derivation::Rec { inner, .. } => abstract_of(inner)?,
        Derivation::ParL { inner, .. } => {
            AbstractTransition::ParL(Arc::new(abstract_of(inner)?))
        }
        Derivation::ParR { inner, .. } => {
            AbstractTransition::ParR(Arc::new(abstract_of(inner)?))
        }
        Derivation::Sync { left, right } => {
            // A broadcast synchronisation is owned by its send half; the
            // receivers (or their absence) are part of the `_`.
            if left.label().action().is_some_and(Action::is_broadcast_send) {
                AbstractTransition::ParL(Arc::new(abstract_of(left)?))
            } else if right.label().action().is_some_and(Action::is_broadcast_send) {
                AbstractTransition::ParR(Arc::new(abstract_of(right)?))
            } else {
                AbstractTransition::Sync(
                    Arc::new(abstract_of(left)?),
                    Arc::new(abstract_of(right)?),
                )
            }
        }
        Derivation::Res { inner, name } => {
            AbstractTransition::Res(Arc::new(abstract_of(inner)?), name.clone())
        }
        Derivation::Rel { inner, relabelling } => {
            AbstractTransition::Rel(Arc::new(abstract_of(inner)?), relabelling.clone())
        }
        Derivation::Dis0 { .. } | Derivation::Dis1 { .. } | Derivation::Dis2 { .. } => {
            return None
        }
    })
}

/// Whether two derivations belong to the same abstract transition. `None`
/// when either has no abstract form.
pub fn equiv(chi: &Derivation, zeta: &Derivation) -> Option<bool> {
    Some(abstract_of(chi)? == abstract_of(zeta)?)
}

/// The derivations of `p` representing `nu`.
pub fn representatives(nu: &AbstractTransition, p: &Process, spec: &Spec) -> Vec<Derivation> {
    step_original(p, spec)
        .into_iter()
        .filter(|d| abstract_of(d).as_ref() == Some(nu))
        .collect()
}

/// Whether `nu` is enabled in process `p`: some derivation of `p`
/// represents it.
pub fn enabled_in_process(nu: &AbstractTransition, p: &Process, spec: &Spec) -> bool {
    step_original(p, spec)
        .iter()
        .any(|d| abstract_of(d).as_ref() == Some(nu))
}

/// Whether `nu` stays enabled during an occurrence of `zeta`: some
/// representative co-initial with `zeta` is concurrent with it.
pub fn enabled_during(nu: &AbstractTransition, zeta: &Derivation, spec: &Spec) -> bool {
    step_original(&zeta.src(), spec)
        .iter()
        .any(|d| abstract_of(d).as_ref() == Some(nu) && concurrent_oneway(d, zeta))
}

/// All abstract transitions enabled in `p`, deduplicated and sorted.
pub fn abstract_transitions_of(p: &Process, spec: &Spec) -> Vec<AbstractTransition> {
    let mut out: Vec<AbstractTransition> =
        step_original(p, spec).iter().filter_map(abstract_of).collect();
    out.sort();
    out.dedup();
    out
}
