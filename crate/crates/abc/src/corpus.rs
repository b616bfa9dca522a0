//! Built-in example systems, shipped as source text so the command line,
//! the guide, and the tests all exercise the same specs.

pub const DIRECT_SEND: &str = include_str!("../corpus/direct-send.abc");
pub const PROCRASTINATOR: &str = include_str!("../corpus/procrastinator.abc");
pub const PROCRASTINATOR_SIGNALS: &str = include_str!("../corpus/procrastinator-signals.abc");
pub const PROCRASTINATOR_SIGNALS_FAIR: &str =
    include_str!("../corpus/procrastinator-signals.fair");
pub const BYSTANDER_LOOP: &str = include_str!("../corpus/bystander-loop.abc");
pub const LOOP_OR_SEND: &str = include_str!("../corpus/loop-or-send.abc");
pub const IDLE_SENDER: &str = include_str!("../corpus/idle-sender.abc");
pub const SHARED_CHANNEL: &str = include_str!("../corpus/shared-channel.abc");
pub const RECEPTIVE_LOOP: &str = include_str!("../corpus/receptive-loop.abc");
pub const TWO_SENDS: &str = include_str!("../corpus/two-sends.abc");
pub const NIL: &str = include_str!("../corpus/nil.abc");
pub const TWO_TAUS: &str = include_str!("../corpus/two-taus.abc");
pub const SEND_VS_CHOICE: &str = include_str!("../corpus/send-vs-choice.abc");
pub const CROSS_PAIRS: &str = include_str!("../corpus/cross-pairs.abc");
pub const SCHEDULER: &str = include_str!("../corpus/scheduler.abc");

/// Every corpus spec with its name, in a stable order.
pub fn all() -> Vec<(&'static str, &'static str)> {
    vec![
        ("direct-send", DIRECT_SEND),
        ("procrastinator", PROCRASTINATOR),
        ("procrastinator-signals", PROCRASTINATOR_SIGNALS),
        ("bystander-loop", BYSTANDER_LOOP),
        ("loop-or-send", LOOP_OR_SEND),
        ("idle-sender", IDLE_SENDER),
        ("shared-channel", SHARED_CHANNEL),
        ("receptive-loop", RECEPTIVE_LOOP),
        ("two-sends", TWO_SENDS),
        ("nil", NIL),
        ("two-taus", TWO_TAUS),
        ("send-vs-choice", SEND_VS_CHOICE),
        ("cross-pairs", CROSS_PAIRS),
        ("scheduler", SCHEDULER),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lts::reachable;
    use crate::parse::parse_spec;
    use crate::sos::Semantics;

    #[test]
    fn every_corpus_spec_parses_and_explores() {
        for (name, text) in all() {
            let spec = parse_spec(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            let g = reachable(&spec, Semantics::Original, 500)
                .unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(!g.states().is_empty(), "{name}");
        }
    }

    #[test]
    fn the_scheduler_is_finite_and_busy() {
        let spec = parse_spec(SCHEDULER).unwrap();
        let g = reachable(&spec, Semantics::Original, 500).unwrap();
        assert!(g.states().len() > 10);
        let labels: std::collections::BTreeSet<String> =
            g.edges().iter().map(|e| e.label.to_string()).collect();
        for l in ["r1", "r2", "c1!", "c2!", "t1!", "t2!", "e!"] {
            assert!(labels.contains(l), "missing {l}; saw {labels:?}");
        }
    }

    /// The broadcast wires of the scheduler cannot be restricted, so the
    /// guard is open to c_i? injections from outside. The request-to-task
    /// count is a law of the receive-free paths only, and that boundary
    /// is pinned here from both sides.
    #[test]
    fn unrequested_tasks_need_an_injected_receive() {
        use crate::syntax::{Action, BroadcastKind, Label};

        let spec = parse_spec(SCHEDULER).unwrap();
        let g = reachable(&spec, Semantics::Original, 500).unwrap();
        let is_receive = |l: &Label| {
            matches!(
                l.action(),
                Some(Action::Broadcast { kind: BroadcastKind::Receive, .. })
            )
        };
        let overdrawn = |edges: &[&crate::lts::Edge], task: &str, request: &str| {
            let tasks = edges.iter().filter(|e| e.label.to_string() == task).count();
            let requests = edges.iter().filter(|e| e.label.to_string() == request).count();
            tasks > requests
        };
        let mut injected_violation = false;
        crate::analysis::visit_finite_paths(&g, 9, &mut |_, edges| {
            let Some(last) = edges.last() else { return };
            let ends_in_task = ["t1!", "t2!"].contains(&last.label.to_string().as_str());
            if !ends_in_task {
                return;
            }
            let clean = !edges.iter().any(|e| is_receive(&e.label));
            let violates =
                overdrawn(edges, "t1!", "r1") || overdrawn(edges, "t2!", "r2");
            if clean {
                assert!(
                    !violates,
                    "a receive-free path started a task without a request: {:?}",
                    edges.iter().map(|e| e.label.to_string()).collect::<Vec<_>>()
                );
            } else if violates {
                injected_violation = true;
            }
        });
        assert!(
            injected_violation,
            "expected some injected c_i? to trigger a task with no matching request"
        );
    }
}
