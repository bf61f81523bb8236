//! Bidirectional typing with elaboration into the target calculus.
//!
//! ```text
//!  infer   top : Top ~> ()        n : Int ~> n        b : Bool ~> b
//!          x : A ~> x                                    (x : A in ctx)
//!          e1 e2 : B ~> t1 t2      e1 => A -> B ~> t1,  e2 <= A ~> t2
//!          e : A ~> t              e <= A ~> t
//!          e1 ,, e2 : A & B ~> (t1, t2)
//!                                  e1 => A ~> t1,  e2 => B ~> t2,  A * B
//!  check   \x . e <= A -> B ~> \x:|A|. t      e <= B ~> t under x : A
//!          e <= B ~> c t           e => A ~> t,  A <: B ~> c
//! ```
//!
//! Merges have no checking rule of their own; they are checked by
//! subsumption. Errors record the child-index path of the offending node,
//! which [`elaborate_program`] resolves to a source span.

use thiserror::Error;

use crate::disjoint::{alg_disjoint, DisjointVerdict};
use crate::parser::{Program, Span};
use crate::subtype::{alg_subtype, SubtypeError};
use crate::syntax::{erase_type, Context, Expr, Term, Type};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeErrorKind {
    #[error("unbound variable {name}")]
    UnboundVariable { name: String },
    #[error("cannot infer a type for {expr}; add an annotation")]
    CannotInfer { expr: String },
    #[error("{found} is not a function type")]
    NotAFunction { found: Type },
    #[error("{found} is not a subtype of {expected}")]
    NotASubtype { found: Type, expected: Type },
    #[error("cannot merge {left} with {right}: both are subtypes of {witness}")]
    MergeNotDisjoint {
        left: Type,
        right: Type,
        witness: Type,
    },
    #[error("program has type {found} but its pragma expects {expected}")]
    PragmaMismatch { expected: Type, found: Type },
    #[error("subtyping fault: {0}")]
    Fault(Box<SubtypeError>),
}

impl TypeErrorKind {
    pub fn name(&self) -> &'static str {
        match self {
            TypeErrorKind::UnboundVariable { .. } => "UnboundVariable",
            TypeErrorKind::CannotInfer { .. } => "CannotInfer",
            TypeErrorKind::NotAFunction { .. } => "NotAFunction",
            TypeErrorKind::NotASubtype { .. } => "NotASubtype",
            TypeErrorKind::MergeNotDisjoint { .. } => "MergeNotDisjoint",
            TypeErrorKind::PragmaMismatch { .. } => "PragmaMismatch",
            TypeErrorKind::Fault(_) => "Fault",
        }
    }

    /// The rule premise that failed.
    pub fn premise(&self) -> &'static str {
        match self {
            TypeErrorKind::UnboundVariable { .. } => "x : A in the context (variable)",
            TypeErrorKind::CannotInfer { .. } => "an inference rule for the expression",
            TypeErrorKind::NotAFunction { .. } => "function type A -> B (application or lambda)",
            TypeErrorKind::NotASubtype { .. } => "A <: B (subsumption)",
            TypeErrorKind::MergeNotDisjoint { .. } => "A * B (merge)",
            TypeErrorKind::PragmaMismatch { .. } => "inferred type equals the expected type",
            TypeErrorKind::Fault(_) => "A <: B (subsumption)",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind}")]
pub struct TypeError {
    pub kind: Box<TypeErrorKind>,
    /// Child indices from the root expression to the failing node.
    pub path: Vec<usize>,
    pub span: Option<Span>,
}

impl TypeError {
    fn new(kind: TypeErrorKind, path: &[usize]) -> TypeError {
        TypeError {
            kind: Box::new(kind),
            path: path.to_vec(),
            span: None,
        }
    }

    /// Internal faults are not the program's fault.
    pub fn is_fault(&self) -> bool {
        matches!(*self.kind, TypeErrorKind::Fault(_))
    }
}

fn describe(e: &Expr) -> String {
    match e {
        Expr::Lam(..) => format!("the lambda {e}"),
        _ => e.to_string(),
    }
}

struct Elab {
    path: Vec<usize>,
}

impl Elab {
    fn err(&self, kind: TypeErrorKind) -> TypeError {
        TypeError::new(kind, &self.path)
    }

    fn child<T>(&mut self, i: usize, f: impl FnOnce(&mut Self) -> T) -> T {
        self.path.push(i);
        let r = f(self);
        self.path.pop();
        r
    }

    fn infer(&mut self, ctx: &Context, e: &Expr) -> Result<(Type, Term), TypeError> {
        match e {
            Expr::Top => Ok((Type::Top, Term::Unit)),
            Expr::Int(n) => Ok((Type::Int, Term::Int(*n))),
            Expr::Bool(b) => Ok((Type::Bool, Term::Bool(*b))),
            Expr::Var(x) => match ctx.lookup(x) {
                Some(a) => Ok((a.clone(), Term::var(x))),
                None => Err(self.err(TypeErrorKind::UnboundVariable { name: x.clone() })),
            },
            Expr::App(fun, arg) => {
                let (ft, t1) = self.child(0, |s| s.infer(ctx, fun))?;
                let Type::Arrow(dom, cod) = ft else {
                    return Err(self.child(0, |s| s.err(TypeErrorKind::NotAFunction { found: ft })));
                };
                let t2 = self.child(1, |s| s.check(ctx, arg, &dom))?;
                Ok((*cod, Term::app(t1, t2)))
            }
            Expr::Anno(inner, a) => {
                let t = self.child(0, |s| s.check(ctx, inner, a))?;
                Ok((a.clone(), t))
            }
            Expr::Merge(l, r) => {
                let (a, t1) = self.child(0, |s| s.infer(ctx, l))?;
                let (b, t2) = self.child(1, |s| s.infer(ctx, r))?;
                match alg_disjoint(&a, &b) {
                    DisjointVerdict::Disjoint => Ok((Type::and(a, b), Term::pair(t1, t2))),
                    DisjointVerdict::NotDisjoint { witness } => {
                        Err(self.err(TypeErrorKind::MergeNotDisjoint {
                            left: a,
                            right: b,
                            witness,
                        }))
                    }
                }
            }
            Expr::Lam(..) => Err(self.err(TypeErrorKind::CannotInfer { expr: describe(e) })),
        }
    }

    fn check(&mut self, ctx: &Context, e: &Expr, expected: &Type) -> Result<Term, TypeError> {
        if let Expr::Lam(x, body) = e {
            let Type::Arrow(dom, cod) = expected else {
                return Err(self.err(TypeErrorKind::NotAFunction {
                    found: expected.clone(),
                }));
            };
            let inner = ctx.extend(x, (**dom).clone());
            let t = self.child(0, |s| s.check(&inner, body, cod))?;
            return Ok(Term::lam(x, erase_type(dom), t));
        }
        let (found, t) = self.infer(ctx, e)?;
        if found == *expected {
            return Ok(t);
        }
        match alg_subtype(&found, expected) {
            Ok(c) => Ok(c.apply(t)),
            Err(SubtypeError::NotSubtype { .. }) => Err(self.err(TypeErrorKind::NotASubtype {
                found,
                expected: expected.clone(),
            })),
            Err(fault) => Err(self.err(TypeErrorKind::Fault(Box::new(fault)))),
        }
    }
}

pub fn infer(ctx: &Context, e: &Expr) -> Result<(Type, Term), TypeError> {
    Elab { path: Vec::new() }.infer(ctx, e)
}

pub fn check(ctx: &Context, e: &Expr, a: &Type) -> Result<Term, TypeError> {
    Elab { path: Vec::new() }.check(ctx, e, a)
}

/// Infers the main expression, checks the `expect` pragma and attaches a
/// source span to any error.
pub fn elaborate_program(p: &Program) -> Result<(Type, Term), TypeError> {
    let (ty, term) = infer(&Context::new(), &p.main).map_err(|mut e| {
        e.span = Some(p.spans.locate(&e.path));
        e
    })?;
    if let Some(expected) = &p.expected_type {
        if *expected != ty {
            return Err(TypeError {
                kind: Box::new(TypeErrorKind::PragmaMismatch {
                    expected: expected.clone(),
                    found: ty,
                }),
                path: Vec::new(),
                span: Some(p.spans.span),
            });
        }
    }
    Ok((ty, term))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_expr, parse_program, Pos};
    use crate::syntax::TType;
    use crate::target::{eval, typecheck, Value};

    fn infer_str(s: &str) -> Result<(Type, Term), TypeError> {
        infer(&Context::new(), &parse_expr(s).unwrap())
    }

    fn kind(s: &str) -> TypeErrorKind {
        *infer_str(s).unwrap_err().kind
    }

    #[test]
    fn literals_and_merges() {
        assert_eq!(infer_str("1").unwrap(), (Type::Int, Term::Int(1)));
        assert_eq!(
            infer_str("1 ,, true").unwrap(),
            (
                Type::and(Type::Int, Type::Bool),
                Term::pair(Term::Int(1), Term::Bool(true))
            )
        );
        assert_eq!(
            kind("1 ,, 2"),
            TypeErrorKind::MergeNotDisjoint {
                left: Type::Int,
                right: Type::Int,
                witness: Type::Int
            }
        );
        assert!(matches!(kind("\\x . x"), TypeErrorKind::CannotInfer { .. }));
        assert!(matches!(kind("y"), TypeErrorKind::UnboundVariable { .. }));
        assert!(matches!(kind("1 2"), TypeErrorKind::NotAFunction { .. }));
    }

    #[test]
    fn checking() {
        let id = parse_expr("\\x . x").unwrap();
        assert_eq!(
            check(&Context::new(), &id, &Type::arrow(Type::Int, Type::Int)).unwrap(),
            Term::lam("x", TType::Int, Term::var("x"))
        );
        let t = check(&Context::new(), &Expr::Int(1), &Type::Top).unwrap();
        assert_eq!(eval(&t).unwrap(), Value::Unit);
        assert_eq!(
            check(&Context::new(), &Expr::Bool(true), &Type::Int)
                .unwrap_err()
                .kind
                .as_ref(),
            &TypeErrorKind::NotASubtype {
                found: Type::Bool,
                expected: Type::Int
            }
        );
        assert!(matches!(
            check(&Context::new(), &id, &Type::Int)
                .unwrap_err()
                .kind
                .as_ref(),
            TypeErrorKind::NotAFunction { .. }
        ));
    }

    #[test]
    fn resolution_demo() {
        let p = parse_program("(1 ,, ((\\x . true) : Int -> Bool)) : Bool").unwrap();
        let (ty, t) = elaborate_program(&p).unwrap();
        assert_eq!(ty, Type::Bool);
        assert_eq!(typecheck(&[], &t), Ok(TType::Bool));
        assert_eq!(eval(&t).unwrap(), Value::Bool(true));
    }

    #[test]
    fn pragma_mismatch() {
        let p = parse_program("-- expect: Int\ntrue").unwrap();
        assert!(matches!(
            elaborate_program(&p).unwrap_err().kind.as_ref(),
            TypeErrorKind::PragmaMismatch { .. }
        ));
    }

    #[test]
    fn errors_carry_spans() {
        let p = parse_program("(\\x . x) (true : Int)").unwrap();
        let err = elaborate_program(&p).unwrap_err();
        assert_eq!(err.kind.name(), "CannotInfer");
        assert_eq!(err.path, vec![0]);
        let p = parse_program("1 ,, (true : Int)").unwrap();
        let err = elaborate_program(&p).unwrap_err();
        assert_eq!(err.kind.name(), "NotASubtype");
        let span = err.span.unwrap();
        assert_eq!(span.start, Pos { line: 1, column: 7 });
    }
}
