//! Recursive-descent parser for spec files.
//!
//! ```text
//! spec      := decl* agentdef* "init" procexpr
//! decl      := ("broadcast" | "handshake") name+ ";"
//! agentdef  := "agent" NAME "=" procexpr
//! procexpr  := choice
//! choice    := par ("+" par)*
//! par       := postfix ("|" postfix)*
//! postfix   := primary ("\" NAME | "[" ren ("," ren)* "]")*
//! primary   := "0" | action "." postfix | NAME | "(" procexpr ")"
//! action    := "tau" | NAME | "'" NAME | NAME "!" | NAME "?"
//! ren       := NAME "/" NAME          # [x/y] renames y to x
//! ```
//!
//! `#` starts a line comment. Name kinds are taken from declarations when
//! present and inferred from use otherwise; a relabelling pair whose names
//! occur nowhere else cannot be kinded and is rejected.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::syntax::{Action, Env, Name, Process, Relabelling, Spec, SpecError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("relabelling pair {new}/{old} mixes broadcast and handshake names")]
    RelabelKindMismatch { new: Name, old: Name },
    #[error("relabelling pair {new}/{old}: name kind cannot be inferred; declare the names")]
    RelabelKindUnknown { new: Name, old: Name },
    #[error("relabelling maps {0} twice")]
    RelabelDuplicateOld(Name),
    #[error(transparent)]
    Spec(#[from] SpecError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    KwBroadcast,
    KwHandshake,
    KwAgent,
    KwInit,
    KwTau,
    Zero,
    Tick,
    Bang,
    Quest,
    Dot,
    Plus,
    Pipe,
    Backslash,
    LBrack,
    RBrack,
    LParen,
    RParen,
    Comma,
    Slash,
    Semi,
    Eq,
    Eof,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "name `{s}`"),
            Tok::KwBroadcast => "`broadcast`",
            Tok::KwHandshake => "`handshake`",
            Tok::KwAgent => "`agent`",
            Tok::KwInit => "`init`",
            Tok::KwTau => "`tau`",
            Tok::Zero => "`0`",
            Tok::Tick => "`'`",
            Tok::Bang => "`!`",
            Tok::Quest => "`?`",
            Tok::Dot => "`.`",
            Tok::Plus => "`+`",
            Tok::Pipe => "`|`",
            Tok::Backslash => "`\\`",
            Tok::LBrack => "`[`",
            Tok::RBrack => "`]`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::Comma => "`,`",
            Tok::Slash => "`/`",
            Tok::Semi => "`;`",
            Tok::Eq => "`=`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

struct Lexed {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Lexed>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&ch) = chars.peek() {
        let (tline, tcol) = (line, col);
        let bump = |c: char, line: &mut usize, col: &mut usize| {
            if c == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
        };
        if ch.is_whitespace() {
            chars.next();
            bump(ch, &mut line, &mut col);
            continue;
        }
        if ch == '#' {
            while let Some(&c) = chars.peek() {
                chars.next();
                bump(c, &mut line, &mut col);
                if c == '\n' {
                    break;
                }
            }
            continue;
        }
        if ch.is_ascii_alphabetic() {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    s.push(c);
                    chars.next();
                    bump(c, &mut line, &mut col);
                } else {
                    break;
                }
            }
            let tok = match s.as_str() {
                "broadcast" => Tok::KwBroadcast,
                "handshake" => Tok::KwHandshake,
                "agent" => Tok::KwAgent,
                "init" => Tok::KwInit,
                "tau" => Tok::KwTau,
                _ => Tok::Ident(s),
            };
            out.push(Lexed { tok, line: tline, col: tcol });
            continue;
        }
        let tok = match ch {
            '0' => Tok::Zero,
            '\'' => Tok::Tick,
            '!' => Tok::Bang,
            '?' => Tok::Quest,
            '.' => Tok::Dot,
            '+' => Tok::Plus,
            '|' => Tok::Pipe,
            '\\' => Tok::Backslash,
            '[' => Tok::LBrack,
            ']' => Tok::RBrack,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '/' => Tok::Slash,
            ';' => Tok::Semi,
            '=' => Tok::Eq,
            other => {
                return Err(ParseError::Syntax {
                    line: tline,
                    col: tcol,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        };
        chars.next();
        bump(ch, &mut line, &mut col);
        out.push(Lexed { tok, line: tline, col: tcol });
    }
    out.push(Lexed { tok: Tok::Eof, line, col });
    Ok(out)
}

// Parser-internal term shape: relabellings are kept as raw new/old pairs
// until name kinds are known.
#[derive(Debug, Clone)]
enum Raw {
    Nil,
    Prefix(RawAction, Box<Raw>),
    Choice(Box<Raw>, Box<Raw>),
    Par(Box<Raw>, Box<Raw>),
    Restrict(Box<Raw>, Name),
    Relabel(Box<Raw>, Vec<(Name, Name)>),
    Ref(Name),
}

#[derive(Debug, Clone)]
enum RawAction {
    Tau,
    Bare(Name),
    Barred(Name),
    Send(Name),
    Receive(Name),
}

struct Parser {
    toks: Vec<Lexed>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        let here = &self.toks[self.pos];
        ParseError::Syntax { line: here.line, col: here.col, msg: msg.into() }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.advance();
            Ok(())
        } else {
            Err(self.err(format!("expected {want}, found {}", self.peek())))
        }
    }

    fn name(&mut self) -> Result<Name, ParseError> {
        match self.peek() {
            Tok::Ident(s) => {
                let n = Name::new(s);
                self.advance();
                Ok(n)
            }
            other => Err(self.err(format!("expected a name, found {other}"))),
        }
    }

    fn choice(&mut self) -> Result<Raw, ParseError> {
        let mut acc = self.par()?;
        while *self.peek() == Tok::Plus {
            self.advance();
            let rhs = self.par()?;
            acc = Raw::Choice(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn par(&mut self) -> Result<Raw, ParseError> {
        let mut acc = self.postfix()?;
        while *self.peek() == Tok::Pipe {
            self.advance();
            let rhs = self.postfix()?;
            acc = Raw::Par(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn postfix(&mut self) -> Result<Raw, ParseError> {
        let mut acc = self.primary()?;
        loop {
            match self.peek() {
                Tok::Backslash => {
                    self.advance();
                    let c = self.name()?;
                    acc = Raw::Restrict(Box::new(acc), c);
                }
                Tok::LBrack => {
                    self.advance();
                    let mut pairs = Vec::new();
                    loop {
                        let new = self.name()?;
                        self.expect(Tok::Slash)?;
                        let old = self.name()?;
                        pairs.push((new, old));
                        if *self.peek() == Tok::Comma {
                            self.advance();
                        } else {
                            break;
                        }
                    }
                    self.expect(Tok::RBrack)?;
                    acc = Raw::Relabel(Box::new(acc), pairs);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn primary(&mut self) -> Result<Raw, ParseError> {
        match self.peek().clone() {
            Tok::Zero => {
                self.advance();
                Ok(Raw::Nil)
            }
            Tok::KwTau => {
                self.advance();
                self.expect(Tok::Dot)?;
                Ok(Raw::Prefix(RawAction::Tau, Box::new(self.postfix()?)))
            }
            Tok::Tick => {
                self.advance();
                let n = self.name()?;
                self.expect(Tok::Dot)?;
                Ok(Raw::Prefix(RawAction::Barred(n), Box::new(self.postfix()?)))
            }
            Tok::Ident(s) => {
                let n = Name::new(&s);
                match self.peek2() {
                    Tok::Bang => {
                        self.advance();
                        self.advance();
                        self.expect(Tok::Dot)?;
                        Ok(Raw::Prefix(RawAction::Send(n), Box::new(self.postfix()?)))
                    }
                    Tok::Quest => {
                        self.advance();
                        self.advance();
                        self.expect(Tok::Dot)?;
                        Ok(Raw::Prefix(RawAction::Receive(n), Box::new(self.postfix()?)))
                    }
                    Tok::Dot => {
                        self.advance();
                        self.advance();
                        Ok(Raw::Prefix(RawAction::Bare(n), Box::new(self.postfix()?)))
                    }
                    _ => {
                        self.advance();
                        Ok(Raw::Ref(n))
                    }
                }
            }
            Tok::LParen => {
                self.advance();
                let inner = self.choice()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            other => Err(self.err(format!("expected a process, found {other}"))),
        }
    }
}

// Name-kind inference state: names known broadcast, known handshake.
struct Kinds {
    broadcast: BTreeSet<Name>,
    handshake: BTreeSet<Name>,
}

fn scan_uses(raw: &Raw, kinds: &mut Kinds, pairs: &mut Vec<(Name, Name)>) {
    match raw {
        Raw::Nil | Raw::Ref(_) => {}
        Raw::Prefix(a, q) => {
            match a {
                RawAction::Tau => {}
                RawAction::Bare(n) | RawAction::Barred(n) => {
                    kinds.handshake.insert(n.clone());
                }
                RawAction::Send(n) | RawAction::Receive(n) => {
                    kinds.broadcast.insert(n.clone());
                }
            }
            scan_uses(q, kinds, pairs);
        }
        Raw::Choice(l, r) | Raw::Par(l, r) => {
            scan_uses(l, kinds, pairs);
            scan_uses(r, kinds, pairs);
        }
        Raw::Restrict(q, c) => {
            kinds.handshake.insert(c.clone());
            scan_uses(q, kinds, pairs);
        }
        Raw::Relabel(q, ps) => {
            pairs.extend(ps.iter().cloned());
            scan_uses(q, kinds, pairs);
        }
    }
}

// Decides, for every relabelling pair, whether it renames broadcast or
// handshake names. Pairs propagate kinds to their names, so chained pairs
// resolve over several passes.
fn resolve_pairs(kinds: &mut Kinds, pairs: &[(Name, Name)]) -> Result<BTreeMap<(Name, Name), bool>, ParseError> {
    let mut kind_of_pair: BTreeMap<(Name, Name), bool> = BTreeMap::new(); // true = broadcast
    let mut pending: Vec<&(Name, Name)> = pairs.iter().collect();
    loop {
        let mut progressed = false;
        let mut still = Vec::new();
        for pair in pending {
            let (new, old) = pair;
            let nb = kinds.broadcast.contains(new) || kinds.broadcast.contains(old);
            let nh = kinds.handshake.contains(new) || kinds.handshake.contains(old);
            if nb && nh {
                return Err(ParseError::RelabelKindMismatch { new: new.clone(), old: old.clone() });
            }
            if nb || nh {
                kind_of_pair.insert(pair.clone(), nb);
                let set = if nb { &mut kinds.broadcast } else { &mut kinds.handshake };
                set.insert(new.clone());
                set.insert(old.clone());
                progressed = true;
            } else {
                still.push(pair);
            }
        }
        if still.is_empty() {
            return Ok(kind_of_pair);
        }
        if !progressed {
            let (new, old) = still[0];
            return Err(ParseError::RelabelKindUnknown { new: new.clone(), old: old.clone() });
        }
        pending = still;
    }
}

fn lower(raw: &Raw, pair_kinds: &BTreeMap<(Name, Name), bool>) -> Result<Process, ParseError> {
    Ok(match raw {
        Raw::Nil => Process::Nil,
        Raw::Prefix(a, q) => {
            let action = match a {
                RawAction::Tau => Action::Tau,
                RawAction::Bare(n) => Action::handshake(n.clone()),
                RawAction::Barred(n) => Action::coname(n.clone()),
                RawAction::Send(n) => Action::send(n.clone()),
                RawAction::Receive(n) => Action::receive(n.clone()),
            };
            Process::prefix(action, lower(q, pair_kinds)?)
        }
        Raw::Choice(l, r) => Process::choice(lower(l, pair_kinds)?, lower(r, pair_kinds)?),
        Raw::Par(l, r) => Process::par(lower(l, pair_kinds)?, lower(r, pair_kinds)?),
        Raw::Restrict(q, c) => Process::restrict(lower(q, pair_kinds)?, c.clone()),
        Raw::Relabel(q, ps) => {
            let mut bmap = BTreeMap::new();
            let mut hmap = BTreeMap::new();
            for (new, old) in ps {
                let is_broadcast = pair_kinds[&(new.clone(), old.clone())];
                let map = if is_broadcast { &mut bmap } else { &mut hmap };
                if map.insert(old.clone(), new.clone()).is_some() {
                    return Err(ParseError::RelabelDuplicateOld(old.clone()));
                }
            }
            Process::relabel(lower(q, pair_kinds)?, Relabelling::new(bmap, hmap))
        }
        Raw::Ref(n) => Process::agent(n.clone()),
    })
}

/// Parses a complete spec file and runs every well-formedness check.
pub fn parse_spec(text: &str) -> Result<Spec, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };

    let mut declared_b = BTreeSet::new();
    let mut declared_h = BTreeSet::new();
    loop {
        let target = match p.peek() {
            Tok::KwBroadcast => &mut declared_b,
            Tok::KwHandshake => &mut declared_h,
            _ => break,
        };
        p.advance();
        let first = p.name()?;
        target.insert(first);
        while matches!(p.peek(), Tok::Ident(_)) {
            let n = p.name()?;
            target.insert(n);
        }
        p.expect(Tok::Semi)?;
    }

    let mut raw_defs: Vec<(Name, Raw)> = Vec::new();
    while *p.peek() == Tok::KwAgent {
        p.advance();
        let name = p.name()?;
        p.expect(Tok::Eq)?;
        let body = p.choice()?;
        raw_defs.push((name, body));
    }

    p.expect(Tok::KwInit)?;
    let raw_init = p.choice()?;
    if *p.peek() != Tok::Eof {
        return Err(p.err(format!("expected end of input, found {}", p.peek())));
    }

    let mut kinds = Kinds { broadcast: declared_b.clone(), handshake: declared_h.clone() };
    let mut pairs = Vec::new();
    for (_, body) in &raw_defs {
        scan_uses(body, &mut kinds, &mut pairs);
    }
    scan_uses(&raw_init, &mut kinds, &mut pairs);
    let pair_kinds = resolve_pairs(&mut kinds, &pairs)?;

    let mut env = Env::new();
    for (name, body) in &raw_defs {
        let lowered = lower(body, &pair_kinds)?;
        if env.define(name.clone(), lowered).is_some() {
            return Err(SpecError::DuplicateAgent(name.clone()).into());
        }
    }
    let init = lower(&raw_init, &pair_kinds)?;
    Ok(Spec::assemble(declared_b, declared_h, env, init)?)
}

/// Parses a standalone process term against an existing spec. Agent
/// references resolve in the spec's environment, name kinds are seeded
/// from its alphabets, and the term passes the same well-formedness checks
/// an initial process would.
pub fn parse_process(text: &str, spec: &Spec) -> Result<Process, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let raw = p.choice()?;
    if *p.peek() != Tok::Eof {
        return Err(p.err(format!("expected end of input, found {}", p.peek())));
    }
    let mut kinds = Kinds {
        broadcast: spec.broadcast_names().clone(),
        handshake: spec.handshake_names().clone(),
    };
    let mut pairs = Vec::new();
    scan_uses(&raw, &mut kinds, &mut pairs);
    let pair_kinds = resolve_pairs(&mut kinds, &pairs)?;
    let lowered = lower(&raw, &pair_kinds)?;
    Spec::assemble(
        spec.broadcast_names().clone(),
        spec.handshake_names().clone(),
        spec.env().clone(),
        lowered.clone(),
    )?;
    Ok(lowered)
}
