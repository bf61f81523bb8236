//! Abstract syntax of the source calculus and of the elaboration target.
//!
//! Source types are binary trees over `Int`, `Bool` and `Top` built with
//! arrows and intersections. Intersections are kept exactly as written:
//! `A & B` and `B & A` are different values, and no flattening happens here.
//! All normalisation is the business of the subtyping algorithm.

use std::fmt;

/// Types of the source language.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Int,
    Bool,
    Top,
    Arrow(Box<Type>, Box<Type>),
    And(Box<Type>, Box<Type>),
}

impl Type {
    pub fn arrow(domain: Type, codomain: Type) -> Type {
        Type::Arrow(Box::new(domain), Box::new(codomain))
    }

    pub fn and(left: Type, right: Type) -> Type {
        Type::And(Box::new(left), Box::new(right))
    }

    /// Number of constructors in the tree.
    pub fn size(&self) -> usize {
        match self {
            Type::Int | Type::Bool | Type::Top => 1,
            Type::Arrow(a, b) | Type::And(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn is_base(&self) -> bool {
        matches!(self, Type::Int | Type::Bool)
    }

    /// All distinct subterms, including `self`, in pre-order of first occurrence.
    pub fn subterms(&self) -> Vec<Type> {
        let mut out = Vec::new();
        self.collect_subterms(&mut out);
        out
    }

    pub(crate) fn collect_subterms(&self, out: &mut Vec<Type>) {
        if !out.contains(self) {
            out.push(self.clone());
        }
        if let Type::Arrow(a, b) | Type::And(a, b) = self {
            a.collect_subterms(out);
            b.collect_subterms(out);
        }
    }

    /// Nesting depth of arrows along codomain/intersection positions.
    pub fn arrow_depth(&self) -> usize {
        match self {
            Type::Arrow(_, b) => 1 + b.arrow_depth(),
            Type::And(a, b) => a.arrow_depth().max(b.arrow_depth()),
            _ => 0,
        }
    }
}

/// Structural equality; `Int & Bool` and `Bool & Int` are not equal.
pub fn type_eq(a: &Type, b: &Type) -> bool {
    a == b
}

pub fn type_size(a: &Type) -> usize {
    a.size()
}

/// Source expressions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(String),
    Int(i64),
    Bool(bool),
    Top,
    Lam(String, Box<Expr>),
    App(Box<Expr>, Box<Expr>),
    Merge(Box<Expr>, Box<Expr>),
    Anno(Box<Expr>, Type),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn lam(param: &str, body: Expr) -> Expr {
        Expr::Lam(param.to_string(), Box::new(body))
    }

    pub fn app(fun: Expr, arg: Expr) -> Expr {
        Expr::App(Box::new(fun), Box::new(arg))
    }

    pub fn merge(left: Expr, right: Expr) -> Expr {
        Expr::Merge(Box::new(left), Box::new(right))
    }

    pub fn anno(expr: Expr, ty: Type) -> Expr {
        Expr::Anno(Box::new(expr), ty)
    }
}

/// Types of the target calculus.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TType {
    Int,
    Bool,
    Unit,
    Arrow(Box<TType>, Box<TType>),
    Prod(Box<TType>, Box<TType>),
}

impl TType {
    pub fn arrow(domain: TType, codomain: TType) -> TType {
        TType::Arrow(Box::new(domain), Box::new(codomain))
    }

    pub fn prod(left: TType, right: TType) -> TType {
        TType::Prod(Box::new(left), Box::new(right))
    }

    pub fn size(&self) -> usize {
        match self {
            TType::Int | TType::Bool | TType::Unit => 1,
            TType::Arrow(a, b) | TType::Prod(a, b) => 1 + a.size() + b.size(),
        }
    }
}

/// Terms of the target calculus. Lambdas carry their parameter type, so
/// target type checking never has to guess.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Int(i64),
    Bool(bool),
    Unit,
    Lam(String, TType, Box<Term>),
    App(Box<Term>, Box<Term>),
    Pair(Box<Term>, Box<Term>),
    Fst(Box<Term>),
    Snd(Box<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn lam(param: &str, ty: TType, body: Term) -> Term {
        Term::Lam(param.to_string(), ty, Box::new(body))
    }

    pub fn app(fun: Term, arg: Term) -> Term {
        Term::App(Box::new(fun), Box::new(arg))
    }

    pub fn pair(left: Term, right: Term) -> Term {
        Term::Pair(Box::new(left), Box::new(right))
    }

    pub fn fst(pair: Term) -> Term {
        Term::Fst(Box::new(pair))
    }

    pub fn snd(pair: Term) -> Term {
        Term::Snd(Box::new(pair))
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Int(_) | Term::Bool(_) | Term::Unit => 1,
            Term::Lam(_, _, b) | Term::Fst(b) | Term::Snd(b) => 1 + b.size(),
            Term::App(a, b) | Term::Pair(a, b) => 1 + a.size() + b.size(),
        }
    }
}

/// A target function witnessing a subtyping judgment `A <: B`.
///
/// For a coercion produced for `A <: B`, the wrapped term has type
/// `erase(A) -> erase(B)` in the empty target context.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Coercion(pub Term);

impl Coercion {
    pub fn term(&self) -> &Term {
        &self.0
    }

    pub fn into_term(self) -> Term {
        self.0
    }

    /// Applies the coercion to a target term.
    pub fn apply(&self, arg: Term) -> Term {
        Term::app(self.0.clone(), arg)
    }
}

impl fmt::Display for Coercion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Source typing context; the innermost binding is last.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Context {
    bindings: Vec<(String, Type)>,
}

impl Context {
    pub fn new() -> Context {
        Context::default()
    }

    pub fn extend(&self, name: &str, ty: Type) -> Context {
        let mut bindings = self.bindings.clone();
        bindings.push((name.to_string(), ty));
        Context { bindings }
    }

    pub fn lookup(&self, name: &str) -> Option<&Type> {
        self.bindings
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
    }

    pub fn bindings(&self) -> &[(String, Type)] {
        &self.bindings
    }

    /// Pointwise erasure into a target context.
    pub fn erase(&self) -> Vec<(String, TType)> {
        self.bindings
            .iter()
            .map(|(n, t)| (n.clone(), erase_type(t)))
            .collect()
    }
}

/// Intersections become products and `Top` becomes unit.
pub fn erase_type(a: &Type) -> TType {
    match a {
        Type::Int => TType::Int,
        Type::Bool => TType::Bool,
        Type::Top => TType::Unit,
        Type::Arrow(d, c) => TType::arrow(erase_type(d), erase_type(c)),
        Type::And(l, r) => TType::prod(erase_type(l), erase_type(r)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Type::*;

    #[test]
    fn equality_is_syntactic() {
        assert!(type_eq(&Int, &Int));
        assert!(!type_eq(&Type::and(Int, Bool), &Type::and(Bool, Int)));
        assert!(type_eq(&Type::arrow(Int, Top), &Type::arrow(Int, Top)));
    }

    #[test]
    fn sizes() {
        assert_eq!(type_size(&Int), 1);
        assert_eq!(type_size(&Type::arrow(Int, Bool)), 3);
        assert_eq!(type_size(&Type::arrow(Type::and(Int, Bool), Top)), 5);
    }

    #[test]
    fn erasure() {
        assert_eq!(
            erase_type(&Type::and(Int, Bool)),
            TType::prod(TType::Int, TType::Bool)
        );
        assert_eq!(erase_type(&Top), TType::Unit);
        assert_eq!(
            erase_type(&Type::arrow(Int, Top)),
            TType::arrow(TType::Int, TType::Unit)
        );
    }

    #[test]
    fn innermost_binding_wins() {
        let ctx = Context::new()
            .extend("x", Int)
            .extend("y", Top)
            .extend("x", Bool);
        assert_eq!(ctx.lookup("x"), Some(&Bool));
        assert_eq!(ctx.lookup("y"), Some(&Top));
        assert_eq!(ctx.lookup("z"), None);
    }

    #[test]
    fn subterms_are_deduplicated() {
        let t = Type::and(Type::arrow(Int, Int), Int);
        assert_eq!(t.subterms(), vec![t.clone(), Type::arrow(Int, Int), Int]);
    }
}
