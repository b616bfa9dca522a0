//! Rendering of actions, labels, processes and whole specs back to the
//! concrete syntax. `parse_spec` composed with `Display` is the identity on
//! the parse tree, so printed terms are always re-parseable.

use std::fmt;

use crate::abstraction::AbstractTransition;
use crate::sos::Derivation;
use crate::syntax::{Action, Label, Process, Relabelling, Spec};

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Tau => f.write_str("tau"),
            Action::Handshake { name, barred: false } => write!(f, "{name}"),
            Action::Handshake { name, barred: true } => write!(f, "'{name}"),
            Action::Broadcast { name, kind } => match kind {
                crate::syntax::BroadcastKind::Send => write!(f, "{name}!"),
                crate::syntax::BroadcastKind::Receive => write!(f, "{name}?"),
            },
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Act(a) => a.fmt(f),
            Label::Discard(b) => write!(f, "{b}:"),
        }
    }
}

impl fmt::Display for Relabelling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        let mut first = true;
        for (old, new) in self.broadcast_pairs().chain(self.handshake_pairs()) {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{new}/{old}")?;
        }
        f.write_str("]")
    }
}

// Precedence levels mirror the grammar: 0 choice, 1 parallel, 2 postfix,
// 3 primary. A subterm is parenthesized when its own level is below the
// level its position requires.
fn level(p: &Process) -> u8 {
    match p {
        Process::Choice(..) => 0,
        Process::Par(..) => 1,
        Process::Restrict(..) | Process::Relabel(..) => 2,
        Process::Nil | Process::Prefix(..) | Process::Agent(_) => 3,
    }
}

fn write_proc(p: &Process, min_level: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let parens = level(p) < min_level;
    if parens {
        f.write_str("(")?;
    }
    match p {
        Process::Nil => f.write_str("0")?,
        Process::Prefix(a, q) => {
            write!(f, "{a}.")?;
            write_proc(q, 2, f)?;
        }
        Process::Choice(l, r) => {
            write_proc(l, 0, f)?;
            f.write_str(" + ")?;
            write_proc(r, 1, f)?;
        }
        Process::Par(l, r) => {
            write_proc(l, 1, f)?;
            f.write_str(" | ")?;
            write_proc(r, 2, f)?;
        }
        Process::Restrict(q, c) => {
            write_postfix_operand(q, f)?;
            write!(f, "\\{c}")?;
        }
        Process::Relabel(q, ren) => {
            write_postfix_operand(q, f)?;
            write!(f, "{ren}")?;
        }
        Process::Agent(n) => write!(f, "{n}")?,
    }
    if parens {
        f.write_str(")")?;
    }
    Ok(())
}

/// Operand of a restriction or relabelling. Prefixes need parentheses here
/// even though they bind tightest: a prefix body extends through trailing
/// postfix operators, so `'c.0\c` reparses as `'c.(0\c)`, not `('c.0)\c`.
fn write_postfix_operand(p: &Process, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if matches!(p, Process::Prefix(..)) {
        f.write_str("(")?;
        write_proc(p, 0, f)?;
        f.write_str(")")
    } else {
        write_proc(p, 2, f)
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_proc(self, 0, f)
    }
}

// Derivations render as the source term with the moving prefix replaced by
// `<label>continuation`, e.g. `A:<c>A | B` for the left component of A | B
// unfolding A and firing c. Discard axioms render as `<b:>` before the
// stationary term. Precedence mirrors the process printer.
fn deriv_level(d: &Derivation) -> u8 {
    match d {
        Derivation::SumL { .. } | Derivation::SumR { .. } | Derivation::Dis2 { .. } => 0,
        Derivation::ParL { .. } | Derivation::ParR { .. } | Derivation::Sync { .. } => 1,
        Derivation::Res { .. } | Derivation::Rel { .. } => 2,
        Derivation::Act { .. }
        | Derivation::Rec { .. }
        | Derivation::Dis0 { .. }
        | Derivation::Dis1 { .. } => 3,
    }
}

fn write_axiom_subject(p: &Process, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match p {
        Process::Nil | Process::Agent(_) => write_proc(p, 0, f),
        other => {
            f.write_str("(")?;
            write_proc(other, 0, f)?;
            f.write_str(")")
        }
    }
}

fn write_deriv(d: &Derivation, min_level: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let parens = deriv_level(d) < min_level;
    if parens {
        f.write_str("(")?;
    }
    match d {
        Derivation::Act { action, target } => {
            write!(f, "<{action}>")?;
            write_axiom_subject(target, f)?;
        }
        Derivation::Dis0 { name } => write!(f, "<{name}:>0")?,
        Derivation::Dis1 { name, action, body } => {
            write!(f, "<{name}:>")?;
            write_axiom_subject(&Process::Prefix(action.clone(), body.clone()), f)?;
        }
        Derivation::SumL { inner, right } => {
            write_deriv(inner, 0, f)?;
            f.write_str(" + ")?;
            write_proc(right, 1, f)?;
        }
        Derivation::SumR { left, inner } => {
            write_proc(left, 0, f)?;
            f.write_str(" + ")?;
            write_deriv(inner, 1, f)?;
        }
        Derivation::Dis2 { left, right } => {
            write_deriv(left, 0, f)?;
            f.write_str(" + ")?;
            write_deriv(right, 1, f)?;
        }
        Derivation::ParL { inner, right } => {
            write_deriv(inner, 1, f)?;
            f.write_str(" | ")?;
            write_proc(right, 2, f)?;
        }
        Derivation::ParR { left, inner } => {
            write_proc(left, 1, f)?;
            f.write_str(" | ")?;
            write_deriv(inner, 2, f)?;
        }
        Derivation::Sync { left, right } => {
            write_deriv(left, 1, f)?;
            f.write_str(" | ")?;
            write_deriv(right, 2, f)?;
        }
        Derivation::Res { inner, name } => {
            write_deriv_postfix_operand(inner, f)?;
            write!(f, "\\{name}")?;
        }
        Derivation::Rel { inner, relabelling } => {
            write_deriv_postfix_operand(inner, f)?;
            write!(f, "{relabelling}")?;
        }
        Derivation::Rec { agent, inner } => {
            write!(f, "{agent}:")?;
            write_deriv(inner, 2, f)?;
        }
    }
    if parens {
        f.write_str(")")?;
    }
    Ok(())
}

fn write_deriv_postfix_operand(d: &Derivation, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if deriv_level(d) == 2 {
        write_deriv(d, 0, f)
    } else {
        f.write_str("(")?;
        write_deriv(d, 0, f)?;
        f.write_str(")")
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_deriv(self, 0, f)
    }
}

// Abstract transitions print like derivations with passive sides replaced
// by `_`; the grammar levels coincide.
fn abs_level(v: &AbstractTransition) -> u8 {
    match v {
        AbstractTransition::ParL(_)
        | AbstractTransition::ParR(_)
        | AbstractTransition::Sync(..) => 1,
        AbstractTransition::Res(..) | AbstractTransition::Rel(..) => 2,
        AbstractTransition::Act { .. } => 3,
    }
}

fn write_abs(v: &AbstractTransition, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let level = abs_level(v);
    if level < min {
        f.write_str("(")?;
        write_abs(v, 0, f)?;
        return f.write_str(")");
    }
    match v {
        AbstractTransition::Act { action, target } => {
            write!(f, "<{action}>")?;
            write_axiom_subject(target, f)
        }
        AbstractTransition::ParL(inner) => {
            // Nesting is always parenthesized: _|(v|_) and (_|v)|_ are
            // different abstract transitions and must read differently.
            write_abs(inner, 2, f)?;
            f.write_str(" | _")
        }
        AbstractTransition::ParR(inner) => {
            f.write_str("_ | ")?;
            write_abs(inner, 2, f)
        }
        AbstractTransition::Sync(l, r) => {
            write_abs(l, 2, f)?;
            f.write_str(" | ")?;
            write_abs(r, 2, f)
        }
        AbstractTransition::Res(inner, name) => {
            write_abs_postfix_operand(inner, f)?;
            write!(f, "\\{name}")
        }
        AbstractTransition::Rel(inner, relabelling) => {
            write_abs_postfix_operand(inner, f)?;
            write!(f, "{relabelling}")
        }
    }
}

fn write_abs_postfix_operand(v: &AbstractTransition, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if abs_level(v) == 2 {
        write_abs(v, 0, f)
    } else {
        f.write_str("(")?;
        write_abs(v, 0, f)?;
        f.write_str(")")
    }
}

impl fmt::Display for AbstractTransition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_abs(self, 0, f)
    }
}

impl fmt::Display for Spec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.broadcast_names().is_empty() {
            f.write_str("broadcast")?;
            for n in self.broadcast_names() {
                write!(f, " {n}")?;
            }
            f.write_str(";\n")?;
        }
        if !self.handshake_names().is_empty() {
            f.write_str("handshake")?;
            for n in self.handshake_names() {
                write!(f, " {n}")?;
            }
            f.write_str(";\n")?;
        }
        for (name, body) in self.env().iter() {
            writeln!(f, "agent {name} = {body}")?;
        }
        writeln!(f, "init {}", self.init())
    }
}

#[cfg(test)]
mod tests {
    use crate::syntax::{Action, Process};

    #[test]
    fn parenthesizes_by_grammar_level() {
        let a = || Process::prefix(Action::handshake("a"), Process::Nil);
        let c = || Process::prefix(Action::handshake("c"), Process::Nil);

        // Left-associated chains print flat; right nesting keeps parens.
        let left = Process::choice(Process::choice(a(), c()), a());
        assert_eq!(left.to_string(), "a.0 + c.0 + a.0");
        let right = Process::choice(a(), Process::choice(c(), a()));
        assert_eq!(right.to_string(), "a.0 + (c.0 + a.0)");

        let mix = Process::choice(a(), Process::par(c(), a()));
        assert_eq!(mix.to_string(), "a.0 + c.0 | a.0");
        let par_of_choice = Process::par(Process::choice(a(), c()), a());
        assert_eq!(par_of_choice.to_string(), "(a.0 + c.0) | a.0");

        // A restricted prefix keeps its parentheses: without them the
        // restriction would reattach to the prefix body on reparse.
        let under_prefix = Process::prefix(
            Action::handshake("a"),
            Process::restrict(c(), "c"),
        );
        assert_eq!(under_prefix.to_string(), "a.(c.0)\\c");
        let par_under_prefix = Process::prefix(Action::handshake("a"), Process::par(c(), a()));
        assert_eq!(par_under_prefix.to_string(), "a.(c.0 | a.0)");

        let restricted_par = Process::restrict(Process::par(a(), c()), "x");
        assert_eq!(restricted_par.to_string(), "(a.0 | c.0)\\x");
    }

    #[test]
    fn derivations_render_as_marked_source_terms() {
        use crate::parse::parse_spec;
        use crate::sos::step_original;

        let spec = parse_spec(
            "broadcast b; handshake c;\nagent A = c.A\nagent B = 'c.B + (tau.B + b!.0)\ninit A | B",
        )
        .unwrap();
        let rendered: Vec<String> =
            step_original(spec.init(), &spec).iter().map(|d| d.to_string()).collect();
        assert!(rendered.contains(&"A:<c>A | B".to_string()), "{rendered:?}");
        assert!(
            rendered.contains(&"A:<c>A | B:(<'c>B + (tau.B + b!.0))".to_string()),
            "{rendered:?}"
        );

        let spec = parse_spec("broadcast b; handshake c;\ninit b!.0 | (b?.0 + c.0)").unwrap();
        let rendered: Vec<String> =
            step_original(spec.init(), &spec).iter().map(|d| d.to_string()).collect();
        assert!(rendered.contains(&"<b!>0 | (<b?>0 + c.0)".to_string()), "{rendered:?}");

        let spec = parse_spec("handshake c;\ninit (c.0 | 'c.0)\\c").unwrap();
        let rendered: Vec<String> =
            step_original(spec.init(), &spec).iter().map(|d| d.to_string()).collect();
        assert_eq!(rendered, ["(<c>0 | <'c>0)\\c"]);

        let spec = parse_spec("broadcast b; handshake a;\ninit a.0").unwrap();
        let rendered: Vec<String> = crate::sos::step_discard(spec.init(), &spec)
            .iter()
            .map(|d| d.to_string())
            .collect();
        assert_eq!(rendered, ["<a>0", "<b:>(a.0)"]);
    }

    #[test]
    fn actions_render_in_concrete_syntax() {
        assert_eq!(Action::Tau.to_string(), "tau");
        assert_eq!(Action::handshake("c").to_string(), "c");
        assert_eq!(Action::coname("c").to_string(), "'c");
        assert_eq!(Action::send("b").to_string(), "b!");
        assert_eq!(Action::receive("b").to_string(), "b?");
        assert_eq!(crate::syntax::Label::Discard("b".into()).to_string(), "b:");
    }
}
