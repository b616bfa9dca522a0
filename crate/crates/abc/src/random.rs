//! Seeded random generation of well-formed specs, process terms, and
//! one-hole contexts. Everything is driven by a fixed-algorithm generator,
//! so a seed pins down the system exactly and failures replay.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::syntax::{Action, Env, Name, Process, Relabelling, Spec};

/// The agent identifier standing for the hole of a context.
pub const HOLE: &str = "HOLE";

pub struct Generator {
    rng: ChaCha8Rng,
    broadcasts: Vec<Name>,
    handshakes: Vec<Name>,
}

impl Generator {
    /// Draws alphabets of one to three broadcast and handshake names each.
    pub fn new(seed: u64) -> Generator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nb = rng.gen_range(1..=3);
        let nh = rng.gen_range(1..=3);
        Generator {
            rng,
            broadcasts: (0..nb).map(|i| Name::new(format!("b{i}"))).collect(),
            handshakes: (0..nh).map(|i| Name::new(format!("c{i}"))).collect(),
        }
    }

    fn broadcast_name(&mut self) -> Name {
        let i = self.rng.gen_range(0..self.broadcasts.len());
        self.broadcasts[i].clone()
    }

    fn handshake_name(&mut self) -> Name {
        let i = self.rng.gen_range(0..self.handshakes.len());
        self.handshakes[i].clone()
    }

    fn action(&mut self) -> Action {
        match self.rng.gen_range(0..5) {
            0 => Action::Tau,
            1 => Action::handshake(self.handshake_name()),
            2 => Action::coname(self.handshake_name()),
            3 => Action::send(self.broadcast_name()),
            _ => Action::receive(self.broadcast_name()),
        }
    }

    /// Broadcast side: a permutation of the whole broadcast alphabet, so the
    /// map is injective by construction. Handshake side: any map at all.
    fn relabelling(&mut self) -> Relabelling {
        let mut perm = self.broadcasts.clone();
        perm.shuffle(&mut self.rng);
        let bmap: BTreeMap<Name, Name> = self
            .broadcasts
            .clone()
            .into_iter()
            .zip(perm)
            .filter(|(old, new)| old != new)
            .collect();
        let mut hmap = BTreeMap::new();
        for old in self.handshakes.clone() {
            if self.rng.gen_bool(0.4) {
                let new = self.handshake_name();
                hmap.insert(old, new);
            }
        }
        Relabelling::new(bmap, hmap)
    }

    /// Agent references appear only when `under_prefix` is set, so bodies
    /// grown with it initially unset come out guarded.
    fn term(&mut self, depth: usize, agents: &[Name], under_prefix: bool) -> Process {
        let agent_ok = under_prefix && !agents.is_empty();
        if depth == 0 {
            return match self.rng.gen_range(0..4) {
                0 if agent_ok => {
                    let i = self.rng.gen_range(0..agents.len());
                    Process::Agent(agents[i].clone())
                }
                1 => Process::prefix(self.action(), Process::Nil),
                _ => Process::Nil,
            };
        }
        match self.rng.gen_range(0..12) {
            0 => Process::Nil,
            1 if agent_ok => {
                let i = self.rng.gen_range(0..agents.len());
                Process::Agent(agents[i].clone())
            }
            1..=4 | 11 => Process::prefix(self.action(), self.term(depth - 1, agents, true)),
            5 | 6 => Process::choice(
                self.term(depth - 1, agents, under_prefix),
                self.term(depth - 1, agents, under_prefix),
            ),
            7 | 8 => Process::par(
                self.term(depth - 1, agents, under_prefix),
                self.term(depth - 1, agents, under_prefix),
            ),
            9 => {
                let c = self.handshake_name();
                Process::restrict(self.term(depth - 1, agents, under_prefix), c)
            }
            _ => {
                let f = self.relabelling();
                Process::relabel(self.term(depth - 1, agents, under_prefix), f)
            }
        }
    }

    /// A term over the alphabets alone, without agent references.
    pub fn closed_term(&mut self, depth: usize) -> Process {
        self.term(depth, &[], true)
    }

    /// A whole spec: up to two defined agents with guarded bodies, plus an
    /// initial process that may reference them.
    pub fn spec(&mut self, depth: usize) -> Spec {
        let n = self.rng.gen_range(0..=2);
        let agents: Vec<Name> = (0..n).map(|i| Name::new(format!("K{i}"))).collect();
        let mut env = Env::new();
        for k in &agents {
            let body = self.term(depth, &agents, false);
            env.define(k.clone(), body);
        }
        let init = self.term(depth, &agents, true);
        Spec::assemble(
            self.broadcasts.iter().cloned().collect(),
            self.handshakes.iter().cloned().collect(),
            env,
            init,
        )
        .expect("generated specs are well-formed by construction")
    }

    /// A spec carrying only this generator's alphabets, for stepping terms
    /// made by [`Generator::closed_term`].
    pub fn ambient_spec(&self) -> Spec {
        Spec::assemble(
            self.broadcasts.iter().cloned().collect(),
            self.handshakes.iter().cloned().collect(),
            Env::new(),
            Process::Nil,
        )
        .expect("bare alphabets are well-formed")
    }

    /// A one-hole context; the hole is the agent identifier [`HOLE`] and is
    /// filled with [`plug`].
    pub fn context(&mut self, depth: usize) -> Process {
        if depth == 0 {
            return Process::agent(HOLE);
        }
        match self.rng.gen_range(0..8) {
            0 => Process::agent(HOLE),
            1 | 2 | 3 => Process::prefix(self.action(), self.context(depth - 1)),
            4 | 5 => {
                let other = self.closed_term(depth - 1);
                let inner = self.context(depth - 1);
                let (l, r) = if self.rng.gen_bool(0.5) { (inner, other) } else { (other, inner) };
                if self.rng.gen_bool(0.5) {
                    Process::choice(l, r)
                } else {
                    Process::par(l, r)
                }
            }
            6 => {
                let c = self.handshake_name();
                Process::restrict(self.context(depth - 1), c)
            }
            _ => {
                let f = self.relabelling();
                Process::relabel(self.context(depth - 1), f)
            }
        }
    }
}

/// Replaces every occurrence of the hole in `context` by `filler`.
pub fn plug(context: &Process, filler: &Process) -> Process {
    match context {
        Process::Agent(n) if n.as_str() == HOLE => filler.clone(),
        Process::Nil | Process::Agent(_) => context.clone(),
        Process::Prefix(a, q) => Process::prefix(a.clone(), plug(q, filler)),
        Process::Choice(l, r) => Process::choice(plug(l, filler), plug(r, filler)),
        Process::Par(l, r) => Process::par(plug(l, filler), plug(r, filler)),
        Process::Restrict(q, c) => Process::restrict(plug(q, filler), c.clone()),
        Process::Relabel(q, f) => Process::Relabel(Arc::new(plug(q, filler)), f.clone()),
    }
}
