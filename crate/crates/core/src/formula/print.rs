//! Printing formulas in the concrete syntax accepted by [`super::parse`].

use std::fmt::{self, Write};

use super::parse::{infix_level, is_symbolic};
use super::{Formula, Term};

// Binding strength of each formula level; a subformula is parenthesized
// when its own level is below what the context requires.
const QUANT: u8 = 0;
const IMPLIES: u8 = 1;
const OR: u8 = 2;
const AND: u8 = 3;
const ATOM: u8 = 4;

/// Render `f` with ASCII connectives. Shared subformulas are printed in
/// full at every occurrence.
pub fn print(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(&mut out, f, QUANT).expect("writing to a String cannot fail");
    out
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self, QUANT)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, 1)
    }
}

fn level(f: &Formula) -> u8 {
    match f {
        Formula::Forall(..) | Formula::Exists(..) => QUANT,
        Formula::Implies(..) => IMPLIES,
        Formula::Or(fs) if fs.len() > 1 => OR,
        Formula::And(fs) if fs.len() > 1 => AND,
        Formula::Or(fs) | Formula::And(fs) if fs.len() == 1 => level(&fs[0]),
        _ => ATOM,
    }
}

fn write_formula(out: &mut impl Write, f: &Formula, ctx: u8) -> fmt::Result {
    if level(f) < ctx {
        out.write_char('(')?;
        write_formula(out, f, QUANT)?;
        return out.write_char(')');
    }
    match f {
        Formula::True => out.write_str("true"),
        Formula::False => out.write_str("false"),
        Formula::Eq(a, b) => {
            write_term(out, a, 1)?;
            out.write_str(" = ")?;
            write_term(out, b, 1)
        }
        Formula::Rel(r, args) if args.len() == 2 && is_symbolic(r) => {
            write_term(out, &args[0], 1)?;
            write!(out, " {r} ")?;
            write_term(out, &args[1], 1)
        }
        Formula::Rel(r, args) => {
            out.write_str(r)?;
            write_args(out, args)
        }
        Formula::Pred(p, t) => {
            write!(out, "{p}(")?;
            write_term(out, t, 1)?;
            out.write_char(')')
        }
        Formula::Not(g) => {
            out.write_char('~')?;
            write_formula(out, g, ATOM)
        }
        Formula::And(fs) | Formula::Or(fs) if fs.is_empty() => {
            out.write_str(if matches!(f, Formula::And(_)) { "true" } else { "false" })
        }
        Formula::And(fs) | Formula::Or(fs) if fs.len() == 1 => write_formula(out, &fs[0], ctx),
        Formula::And(fs) => write_joined(out, fs, " & ", ATOM),
        Formula::Or(fs) => write_joined(out, fs, " | ", AND),
        Formula::Implies(a, b) => {
            write_formula(out, a, OR)?;
            out.write_str(" -> ")?;
            write_formula(out, b, IMPLIES)
        }
        Formula::Forall(v, body) => {
            write!(out, "forall {v}. ")?;
            write_formula(out, body, QUANT)
        }
        Formula::Exists(v, body) => {
            write!(out, "exists {v}. ")?;
            write_formula(out, body, QUANT)
        }
    }
}

fn write_joined(out: &mut impl Write, fs: &[Formula], sep: &str, ctx: u8) -> fmt::Result {
    for (i, g) in fs.iter().enumerate() {
        if i > 0 {
            out.write_str(sep)?;
        }
        write_formula(out, g, ctx)?;
    }
    Ok(())
}

fn write_args(out: &mut impl Write, args: &[Term]) -> fmt::Result {
    out.write_char('(')?;
    for (i, t) in args.iter().enumerate() {
        if i > 0 {
            out.write_str(", ")?;
        }
        write_term(out, t, 1)?;
    }
    out.write_char(')')
}

fn write_term(out: &mut impl Write, t: &Term, min_level: u8) -> fmt::Result {
    match t {
        Term::Var(v) | Term::Const(v) => out.write_str(v),
        Term::Param(i) => write!(out, "@{i}"),
        Term::App(f, args) if args.len() == 2 && is_symbolic(f) => {
            let lvl = infix_level(f);
            if lvl < min_level {
                out.write_char('(')?;
            }
            write_term(out, &args[0], lvl)?;
            write!(out, " {f} ")?;
            write_term(out, &args[1], lvl + 1)?;
            if lvl < min_level {
                out.write_char(')')?;
            }
            Ok(())
        }
        Term::App(f, args) => {
            out.write_str(f)?;
            write_args(out, args)
        }
    }
}
