//! Concurrency between co-initial derivations.
//!
//! `concurrent_oneway(chi, zeta)` says that `chi` stays enabled while `zeta`
//! occurs: the two proofs use disjoint parts of the term, except that the
//! receive half of a broadcast synchronisation in `chi` is soft. A send is
//! entirely under the sender's control, so whatever the listeners do
//! instead, the send (possibly with other listeners) survives; the converse
//! does not hold, which is why the relation is asymmetric. [`concurrent`]
//! is its symmetric closure by conjunction.
//!
//! The relation is inductive on proof shape and total on co-initial pairs;
//! derivations with different sources are never related, and discard
//! derivations are not related to anything (stationary transitions need no
//! concurrency analysis).

use crate::sos::Derivation;
use crate::syntax::{Action, BroadcastKind, Label};

fn receives(d: &Derivation) -> bool {
    matches!(
        d.label(),
        Label::Act(Action::Broadcast { kind: BroadcastKind::Receive, .. })
    )
}

/// Whether `chi` remains enabled during an occurrence of `zeta`. Both must
/// be derivations of the same source process.
pub fn concurrent_oneway(chi: &Derivation, zeta: &Derivation) -> bool {
    debug_assert_eq!(chi.src(), zeta.src(), "concurrency relates co-initial derivations");
    use Derivation::*;
    match (chi, zeta) {
        // Moves of opposite components never touch each other.
        (ParL { .. }, ParR { .. }) | (ParR { .. }, ParL { .. }) => true,
        // Moves of the same component: decided inside that component.
        (ParL { inner: i1, .. }, ParL { inner: i2, .. })
        | (ParR { inner: i1, .. }, ParR { inner: i2, .. })
        | (SumL { inner: i1, .. }, SumL { inner: i2, .. })
        | (SumR { inner: i1, .. }, SumR { inner: i2, .. })
        | (Res { inner: i1, .. }, Res { inner: i2, .. })
        | (Rel { inner: i1, .. }, Rel { inner: i2, .. })
        | (Rec { inner: i1, .. }, Rec { inner: i2, .. }) => concurrent_oneway(i1, i2),
        // A one-sided move versus a synchronisation: the move must survive
        // the synchronisation's half on its own side.
        (ParL { inner: i1, .. }, Sync { left: l2, .. }) => concurrent_oneway(i1, l2),
        (ParR { inner: i1, .. }, Sync { right: r2, .. }) => concurrent_oneway(i1, r2),
        // A synchronisation versus a one-sided move: the half sharing the
        // mover's side must survive it, or be a soft broadcast receive.
        (Sync { left: l1, .. }, ParL { inner: i2, .. }) => {
            receives(l1) || concurrent_oneway(l1, i2)
        }
        (Sync { right: r1, .. }, ParR { inner: i2, .. }) => {
            receives(r1) || concurrent_oneway(r1, i2)
        }
        // Two synchronisations: halves survive pairwise, where a soft
        // receive half of `chi` excuses its side entirely.
        (Sync { left: l1, right: r1 }, Sync { left: l2, right: r2 }) => {
            (receives(r1) && concurrent_oneway(l1, l2))
                || (receives(l1) && concurrent_oneway(r1, r2))
                || (concurrent_oneway(l1, l2) && concurrent_oneway(r1, r2))
        }
        _ => false,
    }
}

/// Symmetric concurrency: each derivation survives the other.
pub fn concurrent(chi: &Derivation, zeta: &Derivation) -> bool {
    concurrent_oneway(chi, zeta) && concurrent_oneway(zeta, chi)
}
