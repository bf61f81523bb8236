//! Printing with minimal parentheses.
//!
//! Source types and expressions print in the concrete syntax accepted by
//! [`crate::parser`], so `parse(print(x)) == x`. Target terms use a similar
//! notation (`\x:Int. t`, `fst t`, `(a, b)`, `()`) that is for humans only.

use std::fmt;

use crate::syntax::{Expr, TType, Term, Type};

// Precedence levels for types: 0 = arrow, 1 = intersection, 2 = atom.
fn write_type(f: &mut fmt::Formatter<'_>, t: &Type, level: u8) -> fmt::Result {
    match t {
        Type::Int => f.write_str("Int"),
        Type::Bool => f.write_str("Bool"),
        Type::Top => f.write_str("Top"),
        Type::Arrow(d, c) => {
            if level > 0 {
                f.write_str("(")?;
            }
            write_type(f, d, 1)?;
            f.write_str(" -> ")?;
            write_type(f, c, 0)?;
            if level > 0 {
                f.write_str(")")?;
            }
            Ok(())
        }
        Type::And(l, r) => {
            if level > 1 {
                f.write_str("(")?;
            }
            write_type(f, l, 1)?;
            f.write_str(" & ")?;
            write_type(f, r, 2)?;
            if level > 1 {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_type(f, self, 0)
    }
}

// Expression levels: 0 = annotation, 1 = merge, 2 = application, 3 = atom.
// A lambda body extends as far right as possible, so a bare lambda is only
// allowed when nothing follows it.
fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, level: u8, rightmost: bool) -> fmt::Result {
    let needs = |min: u8| level > min;
    match e {
        Expr::Var(x) => f.write_str(x),
        Expr::Int(n) => write!(f, "{n}"),
        Expr::Bool(b) => write!(f, "{b}"),
        Expr::Top => f.write_str("top"),
        Expr::Lam(x, body) => {
            let paren = !rightmost;
            if paren {
                f.write_str("(")?;
            }
            write!(f, "\\{x} . ")?;
            write_expr(f, body, 0, true)?;
            if paren {
                f.write_str(")")?;
            }
            Ok(())
        }
        Expr::App(fun, arg) => {
            let paren = needs(2);
            if paren {
                f.write_str("(")?;
            }
            write_expr(f, fun, 2, false)?;
            f.write_str(" ")?;
            write_expr(f, arg, 3, rightmost || paren)?;
            if paren {
                f.write_str(")")?;
            }
            Ok(())
        }
        Expr::Merge(l, r) => {
            let paren = needs(1);
            if paren {
                f.write_str("(")?;
            }
            write_expr(f, l, 1, false)?;
            f.write_str(" ,, ")?;
            write_expr(f, r, 2, rightmost || paren)?;
            if paren {
                f.write_str(")")?;
            }
            Ok(())
        }
        Expr::Anno(inner, ty) => {
            let paren = needs(0);
            if paren {
                f.write_str("(")?;
            }
            write_expr(f, inner, 1, false)?;
            write!(f, " : {ty}")?;
            if paren {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, 0, true)
    }
}

fn write_ttype(f: &mut fmt::Formatter<'_>, t: &TType, level: u8) -> fmt::Result {
    match t {
        TType::Int => f.write_str("Int"),
        TType::Bool => f.write_str("Bool"),
        TType::Unit => f.write_str("Unit"),
        TType::Arrow(d, c) => {
            if level > 0 {
                f.write_str("(")?;
            }
            write_ttype(f, d, 1)?;
            f.write_str(" -> ")?;
            write_ttype(f, c, 0)?;
            if level > 0 {
                f.write_str(")")?;
            }
            Ok(())
        }
        TType::Prod(l, r) => {
            if level > 1 {
                f.write_str("(")?;
            }
            write_ttype(f, l, 1)?;
            f.write_str(" * ")?;
            write_ttype(f, r, 2)?;
            if level > 1 {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for TType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_ttype(f, self, 0)
    }
}

// Term levels: 0 = lambda, 1 = application, 2 = atom.
fn write_term(f: &mut fmt::Formatter<'_>, t: &Term, level: u8, rightmost: bool) -> fmt::Result {
    match t {
        Term::Var(x) => f.write_str(x),
        Term::Int(n) => write!(f, "{n}"),
        Term::Bool(b) => write!(f, "{b}"),
        Term::Unit => f.write_str("()"),
        Term::Pair(l, r) => {
            f.write_str("(")?;
            write_term(f, l, 0, true)?;
            f.write_str(", ")?;
            write_term(f, r, 0, true)?;
            f.write_str(")")
        }
        Term::Lam(x, ty, body) => {
            let paren = !rightmost;
            if paren {
                f.write_str("(")?;
            }
            write!(f, "\\{x}:")?;
            write_ttype(f, ty, 2)?;
            f.write_str(". ")?;
            write_term(f, body, 0, true)?;
            if paren {
                f.write_str(")")?;
            }
            Ok(())
        }
        Term::App(fun, arg) => {
            let paren = level > 1;
            if paren {
                f.write_str("(")?;
            }
            let fun_level = if matches!(**fun, Term::Fst(_) | Term::Snd(_)) {
                2
            } else {
                1
            };
            write_term(f, fun, fun_level, false)?;
            f.write_str(" ")?;
            write_term(f, arg, 2, rightmost || paren)?;
            if paren {
                f.write_str(")")?;
            }
            Ok(())
        }
        Term::Fst(p) | Term::Snd(p) => {
            let paren = level > 1;
            if paren {
                f.write_str("(")?;
            }
            f.write_str(if matches!(t, Term::Fst(_)) {
                "fst "
            } else {
                "snd "
            })?;
            write_term(f, p, 2, rightmost || paren)?;
            if paren {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, 0, true)
    }
}
