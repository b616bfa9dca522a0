//! Core syntax: names, actions, labels, relabellings, process terms and specs.
//!
//! Names live in three disjoint namespaces: broadcast names (`b!` sends,
//! `b?` receives), handshake names (`c` and its co-name `'c`), and agent
//! identifiers bound by defining equations. A [`Spec`] bundles the declared
//! or inferred alphabets with an agent environment and an initial process;
//! assembling one performs all well-formedness checks, so every `Spec` in
//! circulation is valid.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Interned name. Cheap to clone; ordered and hashed by its text.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: impl AsRef<str>) -> Name {
        Name(Arc::from(s.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Name {
        Name::new(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BroadcastKind {
    Send,
    Receive,
}

/// An action: the silent step, a handshake name or co-name, or a broadcast
/// send/receive. Discards are not actions; see [`Label`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Tau,
    Handshake { name: Name, barred: bool },
    Broadcast { name: Name, kind: BroadcastKind },
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("complement is defined on handshake actions only, got {0}")]
pub struct NotHandshake(pub String);

impl Action {
    pub fn handshake(name: impl Into<Name>) -> Action {
        Action::Handshake { name: name.into(), barred: false }
    }

    pub fn coname(name: impl Into<Name>) -> Action {
        Action::Handshake { name: name.into(), barred: true }
    }

    pub fn send(name: impl Into<Name>) -> Action {
        Action::Broadcast { name: name.into(), kind: BroadcastKind::Send }
    }

    pub fn receive(name: impl Into<Name>) -> Action {
        Action::Broadcast { name: name.into(), kind: BroadcastKind::Receive }
    }

    pub fn is_handshake(&self) -> bool {
        matches!(self, Action::Handshake { .. })
    }

    pub fn is_broadcast_send(&self) -> bool {
        matches!(self, Action::Broadcast { kind: BroadcastKind::Send, .. })
    }

    pub fn is_broadcast_receive(&self) -> bool {
        matches!(self, Action::Broadcast { kind: BroadcastKind::Receive, .. })
    }

    /// The broadcast name this action receives, if it is a receive.
    pub fn receive_name(&self) -> Option<&Name> {
        match self {
            Action::Broadcast { name, kind: BroadcastKind::Receive } => Some(name),
            _ => None,
        }
    }

    /// Swaps a handshake name with its co-name. An involution on handshakes;
    /// rejects `tau` and broadcast actions.
    pub fn complement(&self) -> Result<Action, NotHandshake> {
        match self {
            Action::Handshake { name, barred } => {
                Ok(Action::Handshake { name: name.clone(), barred: !barred })
            }
            other => Err(NotHandshake(format!("{other:?}"))),
        }
    }
}

/// A transition label: an action, or the discard `b:` of the modified
/// semantics recording that a process lets broadcast `b` pass it by.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Act(Action),
    Discard(Name),
}

impl Label {
    pub fn action(&self) -> Option<&Action> {
        match self {
            Label::Act(a) => Some(a),
            Label::Discard(_) => None,
        }
    }

    pub fn is_discard(&self) -> bool {
        matches!(self, Label::Discard(_))
    }
}

impl From<Action> for Label {
    fn from(a: Action) -> Label {
        Label::Act(a)
    }
}

/// A kind-preserving renaming: one finite map on broadcast names, one on
/// handshake names; identity elsewhere. Extends to co-names by
/// `f('c) = '(f c)`, keeps send/receive annotations, and fixes `tau`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Relabelling {
    broadcast_map: BTreeMap<Name, Name>,
    handshake_map: BTreeMap<Name, Name>,
}

impl Relabelling {
    pub fn new(broadcast_map: BTreeMap<Name, Name>, handshake_map: BTreeMap<Name, Name>) -> Relabelling {
        Relabelling { broadcast_map, handshake_map }
    }

    pub fn broadcast_pairs(&self) -> impl Iterator<Item = (&Name, &Name)> {
        self.broadcast_map.iter()
    }

    pub fn handshake_pairs(&self) -> impl Iterator<Item = (&Name, &Name)> {
        self.handshake_map.iter()
    }

    pub fn apply_broadcast(&self, n: &Name) -> Name {
        self.broadcast_map.get(n).cloned().unwrap_or_else(|| n.clone())
    }

    pub fn apply_handshake(&self, n: &Name) -> Name {
        self.handshake_map.get(n).cloned().unwrap_or_else(|| n.clone())
    }

    pub fn apply_action(&self, a: &Action) -> Action {
        match a {
            Action::Tau => Action::Tau,
            Action::Handshake { name, barred } => {
                Action::Handshake { name: self.apply_handshake(name), barred: *barred }
            }
            Action::Broadcast { name, kind } => {
                Action::Broadcast { name: self.apply_broadcast(name), kind: *kind }
            }
        }
    }

    pub fn apply_label(&self, l: &Label) -> Label {
        match l {
            Label::Act(a) => Label::Act(self.apply_action(a)),
            Label::Discard(b) => Label::Discard(self.apply_broadcast(b)),
        }
    }

    /// True when the map, extended by the identity, is injective on the given
    /// broadcast alphabet. Required of every relabelling in a well-formed
    /// spec: a non-injective broadcast map lets a relabelled process both
    /// receive and discard the same name, which breaks the discard laws.
    pub fn broadcast_injective_on(&self, alphabet: &BTreeSet<Name>) -> bool {
        let mut seen = BTreeSet::new();
        alphabet.iter().all(|b| seen.insert(self.apply_broadcast(b)))
    }
}

/// Process terms. Binary operators stay binary; the parser builds
/// left-associated trees for `+` and `|` chains.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Process {
    Nil,
    Prefix(Action, Arc<Process>),
    Choice(Arc<Process>, Arc<Process>),
    Par(Arc<Process>, Arc<Process>),
    Restrict(Arc<Process>, Name),
    Relabel(Arc<Process>, Arc<Relabelling>),
    Agent(Name),
}

impl Process {
    pub fn prefix(a: Action, p: Process) -> Process {
        Process::Prefix(a, Arc::new(p))
    }

    pub fn choice(l: Process, r: Process) -> Process {
        Process::Choice(Arc::new(l), Arc::new(r))
    }

    pub fn par(l: Process, r: Process) -> Process {
        Process::Par(Arc::new(l), Arc::new(r))
    }

    pub fn restrict(p: Process, c: impl Into<Name>) -> Process {
        Process::Restrict(Arc::new(p), c.into())
    }

    pub fn relabel(p: Process, f: Relabelling) -> Process {
        Process::Relabel(Arc::new(p), Arc::new(f))
    }

    pub fn agent(n: impl Into<Name>) -> Process {
        Process::Agent(n.into())
    }

    /// True when every agent identifier in `self` occurs under a prefix.
    /// Defining equations must have guarded bodies so that unfolding during
    /// a step terminates.
    pub fn is_guarded(&self) -> bool {
        match self {
            Process::Nil | Process::Prefix(..) => true,
            Process::Choice(l, r) | Process::Par(l, r) => l.is_guarded() && r.is_guarded(),
            Process::Restrict(p, _) | Process::Relabel(p, _) => p.is_guarded(),
            Process::Agent(_) => false,
        }
    }
}

/// Agent environment: one defining equation per agent identifier.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Env {
    defs: BTreeMap<Name, Process>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    /// Returns the previous body if the agent was already defined.
    pub fn define(&mut self, name: Name, body: Process) -> Option<Process> {
        self.defs.insert(name, body)
    }

    pub fn body(&self, name: &Name) -> Option<&Process> {
        self.defs.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Process)> {
        self.defs.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }
}

/// Broadcast and handshake names syntactically reachable from `p`: prefixes,
/// restrictions, relabelling domains and ranges, and the bodies of every
/// agent reachable through `env`.
pub fn sort(p: &Process, env: &Env) -> (BTreeSet<Name>, BTreeSet<Name>) {
    let mut broadcast = BTreeSet::new();
    let mut handshake = BTreeSet::new();
    let mut seen_agents = BTreeSet::new();
    walk_sort(p, env, &mut broadcast, &mut handshake, &mut seen_agents);
    (broadcast, handshake)
}

fn walk_sort(
    p: &Process,
    env: &Env,
    broadcast: &mut BTreeSet<Name>,
    handshake: &mut BTreeSet<Name>,
    seen_agents: &mut BTreeSet<Name>,
) {
    match p {
        Process::Nil => {}
        Process::Prefix(a, q) => {
            match a {
                Action::Tau => {}
                Action::Handshake { name, .. } => {
                    handshake.insert(name.clone());
                }
                Action::Broadcast { name, .. } => {
                    broadcast.insert(name.clone());
                }
            }
            walk_sort(q, env, broadcast, handshake, seen_agents);
        }
        Process::Choice(l, r) | Process::Par(l, r) => {
            walk_sort(l, env, broadcast, handshake, seen_agents);
            walk_sort(r, env, broadcast, handshake, seen_agents);
        }
        Process::Restrict(q, c) => {
            handshake.insert(c.clone());
            walk_sort(q, env, broadcast, handshake, seen_agents);
        }
        Process::Relabel(q, f) => {
            for (old, new) in f.broadcast_pairs() {
                broadcast.insert(old.clone());
                broadcast.insert(new.clone());
            }
            for (old, new) in f.handshake_pairs() {
                handshake.insert(old.clone());
                handshake.insert(new.clone());
            }
            walk_sort(q, env, broadcast, handshake, seen_agents);
        }
        Process::Agent(n) => {
            if seen_agents.insert(n.clone()) {
                if let Some(body) = env.body(n) {
                    walk_sort(body, env, broadcast, handshake, seen_agents);
                }
            }
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpecError {
    #[error("name {name} is used as both {role_a} and {role_b}")]
    NamespaceClash { name: Name, role_a: &'static str, role_b: &'static str },
    #[error("unknown agent {0}")]
    UnknownAgent(Name),
    #[error("duplicate defining equation for agent {0}")]
    DuplicateAgent(Name),
    #[error("unguarded defining equation for agent {0}: every agent identifier in a body must occur under a prefix")]
    Unguarded(Name),
    #[error("broadcast relabelling [{0}] is not injective on the broadcast alphabet")]
    NonInjectiveRelabelling(String),
}

/// A complete specification: alphabets, defining equations, initial process.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spec {
    broadcast: BTreeSet<Name>,
    handshake: BTreeSet<Name>,
    env: Env,
    init: Process,
}

impl Spec {
    /// Validates and assembles a spec. `declared_*` come from declaration
    /// lines and may be empty; names used by the processes are inferred and
    /// unioned in. Rejects namespace clashes, unknown or duplicate agents,
    /// unguarded bodies, and non-injective broadcast relabellings.
    pub fn assemble(
        declared_broadcast: BTreeSet<Name>,
        declared_handshake: BTreeSet<Name>,
        env: Env,
        init: Process,
    ) -> Result<Spec, SpecError> {
        let mut broadcast = declared_broadcast;
        let mut handshake = declared_handshake;
        let (ib, ih) = sort(&init, &env);
        broadcast.extend(ib);
        handshake.extend(ih);
        for (_, body) in env.iter() {
            let (bb, bh) = sort(body, &env);
            broadcast.extend(bb);
            handshake.extend(bh);
        }

        if let Some(n) = broadcast.intersection(&handshake).next() {
            return Err(SpecError::NamespaceClash {
                name: n.clone(),
                role_a: "a broadcast name",
                role_b: "a handshake name",
            });
        }
        for (agent, _) in env.iter() {
            if broadcast.contains(agent) {
                return Err(SpecError::NamespaceClash {
                    name: agent.clone(),
                    role_a: "an agent",
                    role_b: "a broadcast name",
                });
            }
            if handshake.contains(agent) {
                return Err(SpecError::NamespaceClash {
                    name: agent.clone(),
                    role_a: "an agent",
                    role_b: "a handshake name",
                });
            }
        }

        for (agent, body) in env.iter() {
            if !body.is_guarded() {
                return Err(SpecError::Unguarded(agent.clone()));
            }
        }

        let spec = Spec { broadcast, handshake, env, init };
        spec.check_agents(&spec.init)?;
        for (_, body) in spec.env.iter() {
            spec.check_agents(body)?;
        }
        spec.check_relabellings(&spec.init)?;
        for (_, body) in spec.env.iter() {
            spec.check_relabellings(body)?;
        }
        Ok(spec)
    }

    fn check_agents(&self, p: &Process) -> Result<(), SpecError> {
        match p {
            Process::Nil => Ok(()),
            Process::Prefix(_, q) | Process::Restrict(q, _) | Process::Relabel(q, _) => {
                self.check_agents(q)
            }
            Process::Choice(l, r) | Process::Par(l, r) => {
                self.check_agents(l)?;
                self.check_agents(r)
            }
            Process::Agent(n) => {
                if self.env.body(n).is_some() {
                    Ok(())
                } else {
                    Err(SpecError::UnknownAgent(n.clone()))
                }
            }
        }
    }

    fn check_relabellings(&self, p: &Process) -> Result<(), SpecError> {
        match p {
            Process::Nil | Process::Agent(_) => Ok(()),
            Process::Prefix(_, q) | Process::Restrict(q, _) => self.check_relabellings(q),
            Process::Choice(l, r) | Process::Par(l, r) => {
                self.check_relabellings(l)?;
                self.check_relabellings(r)
            }
            Process::Relabel(q, f) => {
                if !f.broadcast_injective_on(&self.broadcast) {
                    let rendered = f
                        .broadcast_pairs()
                        .map(|(old, new)| format!("{new}/{old}"))
                        .collect::<Vec<_>>()
                        .join(", ");
                    return Err(SpecError::NonInjectiveRelabelling(rendered));
                }
                self.check_relabellings(q)
            }
        }
    }

    pub fn broadcast_names(&self) -> &BTreeSet<Name> {
        &self.broadcast
    }

    pub fn handshake_names(&self) -> &BTreeSet<Name> {
        &self.handshake
    }

    pub fn env(&self) -> &Env {
        &self.env
    }

    pub fn init(&self) -> &Process {
        &self.init
    }

    /// All handshake actions over the spec's alphabet: each name and its
    /// co-name. This is the universe that blockable-action sets range over.
    pub fn handshake_actions(&self) -> BTreeSet<Action> {
        self.handshake
            .iter()
            .flat_map(|n| {
                [
                    Action::Handshake { name: n.clone(), barred: false },
                    Action::Handshake { name: n.clone(), barred: true },
                ]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> Name {
        Name::new(s)
    }

    #[test]
    fn complement_is_an_involution_on_handshakes() {
        let c = Action::handshake("c");
        let cbar = c.complement().unwrap();
        assert_eq!(cbar, Action::coname("c"));
        assert_eq!(cbar.complement().unwrap(), c);
        assert!(Action::Tau.complement().is_err());
        assert!(Action::send("b").complement().is_err());
    }

    #[test]
    fn relabelling_extends_to_conames_broadcasts_and_tau() {
        let f = Relabelling::new(
            BTreeMap::from([(n("b"), n("d"))]),
            BTreeMap::from([(n("c"), n("e"))]),
        );
        assert_eq!(f.apply_action(&Action::coname("c")), Action::coname("e"));
        assert_eq!(f.apply_action(&Action::send("b")), Action::send("d"));
        assert_eq!(f.apply_action(&Action::receive("b")), Action::receive("d"));
        assert_eq!(f.apply_action(&Action::Tau), Action::Tau);
        assert_eq!(f.apply_label(&Label::Discard(n("b"))), Label::Discard(n("d")));
        assert_eq!(f.apply_action(&Action::handshake("x")), Action::handshake("x"));
    }

    #[test]
    fn sort_collects_names_through_parallel_and_choice() {
        // b!.0 | (b?.0 + c.0)
        let p = Process::par(
            Process::prefix(Action::send("b"), Process::Nil),
            Process::choice(
                Process::prefix(Action::receive("b"), Process::Nil),
                Process::prefix(Action::handshake("c"), Process::Nil),
            ),
        );
        let (b, h) = sort(&p, &Env::new());
        assert_eq!(b, BTreeSet::from([n("b")]));
        assert_eq!(h, BTreeSet::from([n("c")]));
    }

    #[test]
    fn sort_follows_agent_bodies_once() {
        // A = a.A + c.A
        let mut env = Env::new();
        env.define(
            n("A"),
            Process::choice(
                Process::prefix(Action::handshake("a"), Process::agent("A")),
                Process::prefix(Action::handshake("c"), Process::agent("A")),
            ),
        );
        let (b, h) = sort(&Process::agent("A"), &env);
        assert!(b.is_empty());
        assert_eq!(h, BTreeSet::from([n("a"), n("c")]));
    }

    #[test]
    fn guardedness_rejects_bare_recursion() {
        assert!(!Process::agent("A").is_guarded());
        assert!(Process::prefix(Action::handshake("a"), Process::agent("A")).is_guarded());
        assert!(!Process::choice(
            Process::prefix(Action::Tau, Process::agent("A")),
            Process::agent("B"),
        )
        .is_guarded());
    }

    #[test]
    fn assemble_rejects_unguarded_and_unknown_agents() {
        let mut env = Env::new();
        env.define(n("A"), Process::agent("A"));
        let err = Spec::assemble(BTreeSet::new(), BTreeSet::new(), env, Process::agent("A"));
        assert_eq!(err.unwrap_err(), SpecError::Unguarded(n("A")));

        let err = Spec::assemble(
            BTreeSet::new(),
            BTreeSet::new(),
            Env::new(),
            Process::agent("Ghost"),
        );
        assert_eq!(err.unwrap_err(), SpecError::UnknownAgent(n("Ghost")));
    }

    #[test]
    fn assemble_rejects_cross_namespace_names() {
        // `b` as both broadcast and handshake.
        let p = Process::par(
            Process::prefix(Action::send("b"), Process::Nil),
            Process::prefix(Action::handshake("b"), Process::Nil),
        );
        let err = Spec::assemble(BTreeSet::new(), BTreeSet::new(), Env::new(), p);
        assert!(matches!(err.unwrap_err(), SpecError::NamespaceClash { .. }));
    }

    #[test]
    fn assemble_rejects_non_injective_broadcast_relabelling() {
        // (b1?.0)[b2/b1] with b2 also in the alphabet: f(b1) = f(b2) = b2.
        let f = Relabelling::new(BTreeMap::from([(n("b1"), n("b2"))]), BTreeMap::new());
        let p = Process::relabel(Process::prefix(Action::receive("b1"), Process::Nil), f);
        let err = Spec::assemble(
            BTreeSet::from([n("b2")]),
            BTreeSet::new(),
            Env::new(),
            p,
        );
        assert!(matches!(err.unwrap_err(), SpecError::NonInjectiveRelabelling(_)));

        // A swap is injective and accepted.
        let swap = Relabelling::new(
            BTreeMap::from([(n("b1"), n("b2")), (n("b2"), n("b1"))]),
            BTreeMap::new(),
        );
        let p = Process::relabel(Process::prefix(Action::receive("b1"), Process::Nil), swap);
        assert!(Spec::assemble(BTreeSet::new(), BTreeSet::new(), Env::new(), p).is_ok());
    }
}
