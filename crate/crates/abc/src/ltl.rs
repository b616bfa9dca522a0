//! Linear-time temporal logic over paths. Label atoms hold exactly at the
//! midway states carrying that label, so `G(<a> => F <b!>)` reads "every
//! a-transition is eventually followed by a b!-transition". Two further
//! atom forms are evaluated on `U`-paths only: occurrence of an abstract
//! transition and its enabledness.
//!
//! Formulas are evaluated on finite paths and on lassos. A finite path has
//! no successor past its last state, so `X` is false there; on a lasso the
//! cycle wraps. `U` is a least fixpoint and `G` a greatest one, which
//! keeps the usual dualities exact.

use std::fmt;
use std::sync::Arc;

use crate::abstraction::{enabled_during, enabled_in_process, AbstractTransition};
use crate::paths::{Path, SState, State, UState};
use crate::syntax::{Action, Label, Spec};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LtlFormula {
    True,
    /// Holds at midway states carrying this transition label.
    AtomLabel(Label),
    /// Holds at derivation states denoting this abstract transition.
    AtomNu(AbstractTransition),
    /// Holds at `U`-states where this abstract transition is enabled.
    AtomEn(AbstractTransition),
    Not(Arc<LtlFormula>),
    And(Arc<LtlFormula>, Arc<LtlFormula>),
    Or(Arc<LtlFormula>, Arc<LtlFormula>),
    Implies(Arc<LtlFormula>, Arc<LtlFormula>),
    X(Arc<LtlFormula>),
    U(Arc<LtlFormula>, Arc<LtlFormula>),
    G(Arc<LtlFormula>),
    F(Arc<LtlFormula>),
}

impl LtlFormula {
    pub fn not(f: LtlFormula) -> LtlFormula {
        LtlFormula::Not(Arc::new(f))
    }

    pub fn implies(a: LtlFormula, b: LtlFormula) -> LtlFormula {
        LtlFormula::Implies(Arc::new(a), Arc::new(b))
    }

    pub fn globally(f: LtlFormula) -> LtlFormula {
        LtlFormula::G(Arc::new(f))
    }

    pub fn finally(f: LtlFormula) -> LtlFormula {
        LtlFormula::F(Arc::new(f))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LtlError {
    #[error("formula syntax error at byte {at}: {msg}")]
    Syntax { at: usize, msg: String },
    #[error("unknown atom `<{0}>`: not a label of the declared alphabet")]
    UnknownAtom(String),
    #[error("abstract-transition atoms can only be evaluated on derivation-level paths")]
    LevelMismatch,
    #[error("fairness assumptions may use label atoms only")]
    FairnessAtom,
}

/// Operator precedence, loosest first: `=>`, `|`, `&`, `U`, then the unary
/// prefixes `!` `X` `G` `F`, then atoms. `=>` and `U` associate to the
/// right, `|` and `&` to the left.
struct Parser<'a> {
    src: &'a str,
    pos: usize,
    spec: &'a Spec,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, LtlError> {
        Err(LtlError::Syntax { at: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(|c: char| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn parse_implies(&mut self) -> Result<LtlFormula, LtlError> {
        let lhs = self.parse_or()?;
        if self.eat("=>") {
            let rhs = self.parse_implies()?;
            Ok(LtlFormula::Implies(Arc::new(lhs), Arc::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn parse_or(&mut self) -> Result<LtlFormula, LtlError> {
        let mut lhs = self.parse_and()?;
        loop {
            self.skip_ws();
            // `|` but not `|...` of some longer operator; there is none.
            if self.eat("|") {
                let rhs = self.parse_and()?;
                lhs = LtlFormula::Or(Arc::new(lhs), Arc::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn parse_and(&mut self) -> Result<LtlFormula, LtlError> {
        let mut lhs = self.parse_until()?;
        while self.eat("&") {
            let rhs = self.parse_until()?;
            lhs = LtlFormula::And(Arc::new(lhs), Arc::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_until(&mut self) -> Result<LtlFormula, LtlError> {
        let lhs = self.parse_unary()?;
        if self.eat("U") {
            let rhs = self.parse_until()?;
            Ok(LtlFormula::U(Arc::new(lhs), Arc::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn parse_unary(&mut self) -> Result<LtlFormula, LtlError> {
        self.skip_ws();
        if self.eat("!") {
            return Ok(LtlFormula::Not(Arc::new(self.parse_unary()?)));
        }
        if self.eat("X") {
            return Ok(LtlFormula::X(Arc::new(self.parse_unary()?)));
        }
        if self.eat("G") {
            return Ok(LtlFormula::G(Arc::new(self.parse_unary()?)));
        }
        if self.eat("F") {
            return Ok(LtlFormula::F(Arc::new(self.parse_unary()?)));
        }
        self.parse_primary()
    }

    fn parse_primary(&mut self) -> Result<LtlFormula, LtlError> {
        self.skip_ws();
        if self.eat("(") {
            let inner = self.parse_implies()?;
            if !self.eat(")") {
                return self.err("expected `)`");
            }
            return Ok(inner);
        }
        if self.eat("true") {
            return Ok(LtlFormula::True);
        }
        if self.eat("<") {
            let rest = &self.src[self.pos..];
            let Some(end) = rest.find('>') else {
                return self.err("unterminated atom, expected `>`");
            };
            let text = rest[..end].trim().to_string();
            self.pos += end + 1;
            let label = parse_label_atom(&text, self.spec)?;
            return Ok(LtlFormula::AtomLabel(label));
        }
        self.err("expected an atom `<label>`, `true`, `(`, or a prefix operator")
    }
}

/// Resolves the text between `<` and `>` against the declared alphabet.
fn parse_label_atom(text: &str, spec: &Spec) -> Result<Label, LtlError> {
    if text == "tau" {
        return Ok(Label::Act(Action::Tau));
    }
    if let Some(name) = text.strip_prefix('\'') {
        if spec.handshake_names().iter().any(|n| n.as_str() == name) {
            return Ok(Label::Act(Action::coname(name)));
        }
        return Err(LtlError::UnknownAtom(text.to_string()));
    }
    if let Some(name) = text.strip_suffix('!') {
        if spec.broadcast_names().iter().any(|n| n.as_str() == name) {
            return Ok(Label::Act(Action::send(name)));
        }
        return Err(LtlError::UnknownAtom(text.to_string()));
    }
    if let Some(name) = text.strip_suffix('?') {
        if spec.broadcast_names().iter().any(|n| n.as_str() == name) {
            return Ok(Label::Act(Action::receive(name)));
        }
        return Err(LtlError::UnknownAtom(text.to_string()));
    }
    if let Some(name) = text.strip_suffix(':') {
        if spec.broadcast_names().iter().any(|n| n.as_str() == name) {
            return Ok(Label::Discard(crate::syntax::Name::from(name)));
        }
        return Err(LtlError::UnknownAtom(text.to_string()));
    }
    if spec.handshake_names().iter().any(|n| n.as_str() == text) {
        return Ok(Label::Act(Action::handshake(text)));
    }
    Err(LtlError::UnknownAtom(text.to_string()))
}

/// Parses a formula, resolving every atom against the spec's alphabet.
pub fn parse_ltl(text: &str, spec: &Spec) -> Result<LtlFormula, LtlError> {
    let mut p = Parser { src: text, pos: 0, spec };
    let f = p.parse_implies()?;
    p.skip_ws();
    if p.pos != text.len() {
        return p.err("trailing input after formula");
    }
    Ok(f)
}

/// A set of fairness assumptions, each a formula over label atoms. A path
/// is admitted by the set when it satisfies every formula.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FairnessSpec {
    pub formulas: Vec<LtlFormula>,
}

impl FairnessSpec {
    pub fn empty() -> Self {
        FairnessSpec::default()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }
}

pub(crate) fn label_atoms_only(f: &LtlFormula) -> bool {
    match f {
        LtlFormula::True | LtlFormula::AtomLabel(_) => true,
        LtlFormula::AtomNu(_) | LtlFormula::AtomEn(_) => false,
        LtlFormula::Not(a) | LtlFormula::X(a) | LtlFormula::G(a) | LtlFormula::F(a) => {
            label_atoms_only(a)
        }
        LtlFormula::And(a, b)
        | LtlFormula::Or(a, b)
        | LtlFormula::Implies(a, b)
        | LtlFormula::U(a, b) => label_atoms_only(a) && label_atoms_only(b),
    }
}

/// Parses a fairness file: one formula per line, blank lines and lines
/// starting with `#` ignored.
pub fn parse_fairness(text: &str, spec: &Spec) -> Result<FairnessSpec, LtlError> {
    let mut formulas = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f = parse_ltl(line, spec)?;
        if !label_atoms_only(&f) {
            return Err(LtlError::FairnessAtom);
        }
        formulas.push(f);
    }
    Ok(FairnessSpec { formulas })
}

fn level(f: &LtlFormula) -> u8 {
    match f {
        LtlFormula::Implies(..) => 0,
        LtlFormula::Or(..) => 1,
        LtlFormula::And(..) => 2,
        LtlFormula::U(..) => 3,
        LtlFormula::Not(_) | LtlFormula::X(_) | LtlFormula::G(_) | LtlFormula::F(_) => 4,
        LtlFormula::True
        | LtlFormula::AtomLabel(_)
        | LtlFormula::AtomNu(_)
        | LtlFormula::AtomEn(_) => 5,
    }
}

fn write_at(f: &LtlFormula, min: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    let lv = level(f);
    if lv < min {
        out.write_str("(")?;
        write_at(f, 0, out)?;
        return out.write_str(")");
    }
    match f {
        LtlFormula::True => out.write_str("true"),
        LtlFormula::AtomLabel(l) => write!(out, "<{l}>"),
        LtlFormula::AtomNu(nu) => write!(out, "<<{nu}>>"),
        LtlFormula::AtomEn(nu) => write!(out, "en(<<{nu}>>)"),
        LtlFormula::Not(a) => {
            out.write_str("!")?;
            write_at(a, 4, out)
        }
        LtlFormula::X(a) => {
            out.write_str("X ")?;
            write_at(a, 4, out)
        }
        LtlFormula::G(a) => {
            out.write_str("G ")?;
            write_at(a, 4, out)
        }
        LtlFormula::F(a) => {
            out.write_str("F ")?;
            write_at(a, 4, out)
        }
        LtlFormula::And(a, b) => {
            write_at(a, 2, out)?;
            out.write_str(" & ")?;
            write_at(b, 3, out)
        }
        LtlFormula::Or(a, b) => {
            write_at(a, 1, out)?;
            out.write_str(" | ")?;
            write_at(b, 2, out)
        }
        LtlFormula::Implies(a, b) => {
            write_at(a, 1, out)?;
            out.write_str(" => ")?;
            write_at(b, 0, out)
        }
        LtlFormula::U(a, b) => {
            write_at(a, 4, out)?;
            out.write_str(" U ")?;
            write_at(b, 3, out)
        }
    }
}

impl fmt::Display for LtlFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_at(self, 0, f)
    }
}

/// The shape an evaluator needs from a path: a finite or wrapping
/// position sequence.
struct Positions<'a, S> {
    states: Vec<&'a S>,
    /// Successor of the last position; `None` for finite paths.
    wrap_to: Option<usize>,
}

impl<'a, S: State> Positions<'a, S> {
    fn of(path: &'a Path<S>) -> Self {
        match path {
            Path::Finite(p) => {
                Positions { states: p.states().iter().collect(), wrap_to: None }
            }
            Path::Lasso(l) => Positions {
                states: l.stem().iter().chain(l.cycle().iter()).collect(),
                wrap_to: Some(l.stem().len()),
            },
        }
    }

    fn succ(&self, i: usize) -> Option<usize> {
        if i + 1 < self.states.len() {
            Some(i + 1)
        } else {
            self.wrap_to
        }
    }
}

fn eval_vec<S: State>(
    f: &LtlFormula,
    pos: &Positions<'_, S>,
    atom: &impl Fn(&LtlFormula, &S) -> Result<bool, LtlError>,
) -> Result<Vec<bool>, LtlError> {
    let n = pos.states.len();
    Ok(match f {
        LtlFormula::True => vec![true; n],
        LtlFormula::AtomLabel(_) | LtlFormula::AtomNu(_) | LtlFormula::AtomEn(_) => {
            let mut v = Vec::with_capacity(n);
            for s in &pos.states {
                v.push(atom(f, s)?);
            }
            v
        }
        LtlFormula::Not(a) => {
            let mut v = eval_vec(a, pos, atom)?;
            v.iter_mut().for_each(|b| *b = !*b);
            v
        }
        LtlFormula::And(a, b) => {
            let va = eval_vec(a, pos, atom)?;
            let vb = eval_vec(b, pos, atom)?;
            va.into_iter().zip(vb).map(|(x, y)| x && y).collect()
        }
        LtlFormula::Or(a, b) => {
            let va = eval_vec(a, pos, atom)?;
            let vb = eval_vec(b, pos, atom)?;
            va.into_iter().zip(vb).map(|(x, y)| x || y).collect()
        }
        LtlFormula::Implies(a, b) => {
            let va = eval_vec(a, pos, atom)?;
            let vb = eval_vec(b, pos, atom)?;
            va.into_iter().zip(vb).map(|(x, y)| !x || y).collect()
        }
        LtlFormula::X(a) => {
            let va = eval_vec(a, pos, atom)?;
            (0..n).map(|i| pos.succ(i).map(|j| va[j]).unwrap_or(false)).collect()
        }
        LtlFormula::U(a, b) => {
            let va = eval_vec(a, pos, atom)?;
            let vb = eval_vec(b, pos, atom)?;
            fixpoint(pos, false, |v, i| {
                vb[i] || (va[i] && pos.succ(i).map(|j| v[j]).unwrap_or(false))
            })
        }
        LtlFormula::G(a) => {
            let va = eval_vec(a, pos, atom)?;
            fixpoint(pos, true, |v, i| {
                va[i] && pos.succ(i).map(|j| v[j]).unwrap_or(true)
            })
        }
        LtlFormula::F(a) => {
            let va = eval_vec(a, pos, atom)?;
            fixpoint(pos, false, |v, i| {
                va[i] || pos.succ(i).map(|j| v[j]).unwrap_or(false)
            })
        }
    })
}

/// Iterates a monotone position recurrence to its fixpoint: least when
/// seeded with `false`, greatest when seeded with `true`. Backward sweeps
/// converge within one pass per cycle state.
fn fixpoint<S>(
    pos: &Positions<'_, S>,
    seed: bool,
    step: impl Fn(&[bool], usize) -> bool,
) -> Vec<bool> {
    let n = pos.states.len();
    let mut v = vec![seed; n];
    loop {
        let mut changed = false;
        for i in (0..n).rev() {
            let next = step(&v, i);
            if next != v[i] {
                v[i] = next;
                changed = true;
            }
        }
        if !changed {
            return v;
        }
    }
}

/// Evaluates a formula over label atoms on an `S`-path. Abstract-transition
/// atoms are rejected: `S` forgets which derivation was taken.
pub fn eval_s(f: &LtlFormula, path: &Path<SState>) -> Result<bool, LtlError> {
    let pos = Positions::of(path);
    let atom = |f: &LtlFormula, s: &SState| match f {
        LtlFormula::AtomLabel(l) => Ok(s.label().as_ref() == Some(l)),
        LtlFormula::AtomNu(_) | LtlFormula::AtomEn(_) => Err(LtlError::LevelMismatch),
        _ => unreachable!("eval_vec only consults atoms here"),
    };
    let v = eval_vec(f, &pos, &atom)?;
    Ok(v[0])
}

/// Evaluates a formula on a `U`-path, where abstract-transition occurrence
/// and enabledness atoms are meaningful.
pub fn eval_u(f: &LtlFormula, path: &Path<UState>, spec: &Spec) -> Result<bool, LtlError> {
    let pos = Positions::of(path);
    let atom = |f: &LtlFormula, s: &UState| match f {
        LtlFormula::AtomLabel(l) => Ok(s.label().as_ref() == Some(l)),
        LtlFormula::AtomNu(nu) => Ok(match s {
            UState::Proc(_) => false,
            UState::Deriv(d) => {
                crate::abstraction::abstract_of(d).as_ref() == Some(nu)
            }
        }),
        LtlFormula::AtomEn(nu) => Ok(match s {
            UState::Proc(p) => enabled_in_process(nu, p, spec),
            UState::Deriv(d) => enabled_during(nu, d, spec),
        }),
        _ => unreachable!("eval_vec only consults atoms here"),
    };
    let v = eval_vec(f, &pos, &atom)?;
    Ok(v[0])
}

/// Whether the path satisfies every fairness assumption.
pub fn admitted_by(path: &Path<SState>, fs: &FairnessSpec) -> Result<bool, LtlError> {
    for f in &fs.formulas {
        if !eval_s(f, path)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_spec;
    use crate::paths::{FinitePath, Lasso};
    use crate::sos::step_original;

    fn spec_cb() -> Spec {
        parse_spec("broadcast b; handshake c;\nagent C = c.C\ninit C | b!.0").unwrap()
    }

    fn shows(f: &LtlFormula) -> String {
        f.to_string()
    }

    #[test]
    fn precedence_binds_until_over_and_over_or_over_implies() {
        let spec = parse_spec("broadcast b; handshake a c;\ninit a.c.b!.0").unwrap();
        let f = parse_ltl("<a> U <c> | <b!> & ! <tau> => X <c>", &spec).unwrap();
        assert_eq!(shows(&f), "<a> U <c> | <b!> & !<tau> => X <c>");
        assert!(matches!(f, LtlFormula::Implies(..)));
        let LtlFormula::Implies(lhs, _) = &f else { unreachable!() };
        assert!(matches!(**lhs, LtlFormula::Or(..)));

        let nested = parse_ltl("<a> U <c> U <b!>", &spec).unwrap();
        let LtlFormula::U(_, rhs) = &nested else { panic!("U parses as until") };
        assert!(matches!(**rhs, LtlFormula::U(..)), "U associates to the right");

        let gf = parse_ltl("GF <c>", &spec).unwrap();
        assert_eq!(shows(&gf), "G F <c>");

        // Parenthesized rendering survives a round trip.
        let round = parse_ltl(&shows(&f), &spec).unwrap();
        assert_eq!(round, f);
    }

    #[test]
    fn atoms_resolve_against_the_declared_alphabet() {
        let spec = spec_cb();
        assert!(parse_ltl("<c>", &spec).is_ok());
        assert!(parse_ltl("<'c>", &spec).is_ok());
        assert!(parse_ltl("<b!>", &spec).is_ok());
        assert!(parse_ltl("<b?>", &spec).is_ok());
        assert!(parse_ltl("<tau>", &spec).is_ok());
        assert_eq!(
            parse_ltl("<d!>", &spec).unwrap_err(),
            LtlError::UnknownAtom("d!".to_string())
        );
        assert_eq!(
            parse_ltl("<c!>", &spec).unwrap_err(),
            LtlError::UnknownAtom("c!".to_string()),
            "a handshake name cannot be used as a broadcast"
        );
        assert!(matches!(parse_ltl("<a", &spec), Err(LtlError::Syntax { .. })));
        assert!(matches!(parse_ltl("<c> <c>", &spec), Err(LtlError::Syntax { .. })));
    }

    fn c_cycle(spec: &Spec) -> Path<SState> {
        let p = spec.init().clone();
        Path::Lasso(
            Lasso::new(
                Vec::new(),
                vec![
                    SState::Proc(p.clone()),
                    SState::Mid {
                        src: p.clone(),
                        label: Label::Act(Action::handshake("c")),
                        tgt: p.clone(),
                    },
                ],
            )
            .unwrap(),
        )
    }

    #[test]
    fn labels_hold_midway_and_temporal_operators_see_the_cycle() {
        let spec = spec_cb();
        let pi = c_cycle(&spec);
        assert!(!eval_s(&parse_ltl("<c>", &spec).unwrap(), &pi).unwrap());
        assert!(eval_s(&parse_ltl("X <c>", &spec).unwrap(), &pi).unwrap());
        assert!(eval_s(&parse_ltl("GF <c>", &spec).unwrap(), &pi).unwrap());
        assert!(eval_s(&parse_ltl("F <b!>", &spec).unwrap(), &pi).unwrap() == false);
        assert!(eval_s(&parse_ltl("G ! <b!>", &spec).unwrap(), &pi).unwrap());
    }

    #[test]
    fn eventuality_holds_on_the_finite_run_and_fails_on_the_procrastinating_loop() {
        let spec = parse_spec("broadcast d; handshake a;\ninit a.tau.d!.0").unwrap();
        let phi = parse_ltl("G (<a> => F <d!>)", &spec).unwrap();
        let mut states = vec![SState::Proc(spec.init().clone())];
        let mut cur = spec.init().clone();
        for _ in 0..3 {
            let steps = step_original(&cur, &spec);
            let d = &steps[0];
            states.push(SState::Mid { src: d.src(), label: d.label(), tgt: d.target() });
            states.push(SState::Proc(d.target()));
            cur = d.target();
        }
        let pi = Path::Finite(FinitePath::new(states).unwrap());
        assert!(eval_s(&phi, &pi).unwrap());

        let spec2 =
            parse_spec("broadcast d; handshake a;\nagent Q = tau.Q + tau.d!.0\ninit a.Q")
                .unwrap();
        let phi2 = parse_ltl("G (<a> => F <d!>)", &spec2).unwrap();
        let p0 = spec2.init().clone();
        let first_steps = step_original(&p0, &spec2);
        let a = &first_steps[0];
        let q = a.target();
        let tau_loop = step_original(&q, &spec2)
            .into_iter()
            .find(|d| d.target() == q)
            .expect("the procrastinating branch loops");
        let pi2 = Path::Lasso(
            Lasso::new(
                vec![
                    SState::Proc(p0.clone()),
                    SState::Mid { src: a.src(), label: a.label(), tgt: a.target() },
                ],
                vec![
                    SState::Proc(q.clone()),
                    SState::Mid {
                        src: q.clone(),
                        label: tau_loop.label(),
                        tgt: q.clone(),
                    },
                ],
            )
            .unwrap(),
        );
        assert!(!eval_s(&phi2, &pi2).unwrap());
    }

    #[test]
    fn x_is_false_at_the_end_of_a_finite_path() {
        let spec = spec_cb();
        let single =
            Path::Finite(FinitePath::new(vec![SState::Proc(spec.init().clone())]).unwrap());
        assert!(!eval_s(&parse_ltl("X true", &spec).unwrap(), &single).unwrap());
        assert!(eval_s(&parse_ltl("true", &spec).unwrap(), &single).unwrap());
        // FG phi on a finite path means phi at the last state.
        assert!(eval_s(&parse_ltl("FG ! <c>", &spec).unwrap(), &single).unwrap());
    }

    #[test]
    fn dualities_hold_under_the_evaluator() {
        let spec = spec_cb();
        let pi = c_cycle(&spec);
        let single =
            Path::Finite(FinitePath::new(vec![SState::Proc(spec.init().clone())]).unwrap());
        let bodies = ["<c>", "<b!>", "X <c>", "<c> U <b!>", "true", "! <c>"];
        for b in bodies {
            for path in [&pi, &single] {
                let g = parse_ltl(&format!("G ({b})"), &spec).unwrap();
                let not_f_not = parse_ltl(&format!("! F ! ({b})"), &spec).unwrap();
                assert_eq!(
                    eval_s(&g, path).unwrap(),
                    eval_s(&not_f_not, path).unwrap(),
                    "G/F duality for {b}"
                );
                let f = parse_ltl(&format!("F ({b})"), &spec).unwrap();
                let true_u = parse_ltl(&format!("true U ({b})"), &spec).unwrap();
                assert_eq!(
                    eval_s(&f, path).unwrap(),
                    eval_s(&true_u, path).unwrap(),
                    "F as until for {b}"
                );
            }
        }
    }

    #[test]
    fn derivation_level_atoms_track_occurrence_and_enabledness() {
        let spec = spec_cb();
        let p = spec.init().clone();
        let c_left = step_original(&p, &spec)
            .into_iter()
            .find(|d| d.label().to_string() == "c")
            .unwrap();
        let send = step_original(&p, &spec)
            .into_iter()
            .find(|d| d.label().to_string() == "b!")
            .unwrap();
        let nu = crate::abstraction::abstract_of(&send).unwrap();
        let pi = Path::Lasso(
            Lasso::new(
                Vec::new(),
                vec![UState::Proc(p.clone()), UState::Deriv(c_left)],
            )
            .unwrap(),
        );
        assert!(eval_u(&LtlFormula::globally(LtlFormula::AtomEn(nu.clone())), &pi, &spec)
            .unwrap());
        assert!(!eval_u(
            &LtlFormula::finally(LtlFormula::AtomNu(nu.clone())),
            &pi,
            &spec
        )
        .unwrap());
        // The same atoms are rejected at the coarser level.
        let s_pi = c_cycle(&spec);
        assert_eq!(
            eval_s(&LtlFormula::AtomNu(nu), &s_pi).unwrap_err(),
            LtlError::LevelMismatch
        );
    }

    #[test]
    fn fairness_files_take_one_formula_per_line() {
        let spec = parse_spec("broadcast i j d; handshake a;\ninit a.i!.j!.d!.0").unwrap();
        let fs =
            parse_fairness("# assumptions\nGF <i!> => GF <j!>\n\nG F <d!>\n", &spec).unwrap();
        assert_eq!(fs.formulas.len(), 2);
        assert_eq!(shows(&fs.formulas[0]), "G F <i!> => G F <j!>");
        assert!(parse_fairness("<nope>", &spec).is_err());
    }
}
