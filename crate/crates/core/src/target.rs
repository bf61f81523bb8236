//! The target calculus: simply typed lambda terms with unit and products.
//!
//! Type checking is syntax-directed. Evaluation is call-by-value,
//! left-to-right, over closures and environments, and carries a step budget
//! so a bug can never hang a test run.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::syntax::{TType, Term, Type};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TargetTypeError {
    #[error("unbound target variable `{0}`")]
    Unbound(String),
    #[error("type mismatch: expected {expected}, found {found}")]
    Mismatch { expected: TType, found: TType },
    #[error("not a function: {0}")]
    NotAFunction(TType),
    #[error("not a pair: {0}")]
    NotAPair(TType),
}

/// Syntax-directed typing; the context is searched innermost-last.
pub fn typecheck(ctx: &[(String, TType)], t: &Term) -> Result<TType, TargetTypeError> {
    let mut env: Vec<(String, TType)> = ctx.to_vec();
    check_in(&mut env, t)
}

fn check_in(env: &mut Vec<(String, TType)>, t: &Term) -> Result<TType, TargetTypeError> {
    match t {
        Term::Var(x) => env
            .iter()
            .rev()
            .find(|(n, _)| n == x)
            .map(|(_, ty)| ty.clone())
            .ok_or_else(|| TargetTypeError::Unbound(x.clone())),
        Term::Int(_) => Ok(TType::Int),
        Term::Bool(_) => Ok(TType::Bool),
        Term::Unit => Ok(TType::Unit),
        Term::Lam(x, ty, body) => {
            env.push((x.clone(), ty.clone()));
            let result = check_in(env, body);
            env.pop();
            Ok(TType::arrow(ty.clone(), result?))
        }
        Term::App(f, a) => {
            let fty = check_in(env, f)?;
            let aty = check_in(env, a)?;
            match fty {
                TType::Arrow(d, c) => {
                    if *d == aty {
                        Ok(*c)
                    } else {
                        Err(TargetTypeError::Mismatch {
                            expected: *d,
                            found: aty,
                        })
                    }
                }
                other => Err(TargetTypeError::NotAFunction(other)),
            }
        }
        Term::Pair(l, r) => Ok(TType::prod(check_in(env, l)?, check_in(env, r)?)),
        Term::Fst(p) => match check_in(env, p)? {
            TType::Prod(l, _) => Ok(*l),
            other => Err(TargetTypeError::NotAPair(other)),
        },
        Term::Snd(p) => match check_in(env, p)? {
            TType::Prod(_, r) => Ok(*r),
            other => Err(TargetTypeError::NotAPair(other)),
        },
    }
}

pub type Env = Vec<(String, Value)>;

/// Runtime values.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Unit,
    Pair(Box<Value>, Box<Value>),
    Closure(String, Arc<Term>, Arc<Env>),
}

impl Value {
    pub fn pair(l: Value, r: Value) -> Value {
        Value::Pair(Box::new(l), Box::new(r))
    }

    pub fn is_ground(&self) -> bool {
        matches!(self, Value::Int(_) | Value::Bool(_) | Value::Unit)
    }

    /// Whether the value has the shape of the given target type.
    pub fn matches(&self, ty: &TType) -> bool {
        match (self, ty) {
            (Value::Int(_), TType::Int) | (Value::Bool(_), TType::Bool) => true,
            (Value::Unit, TType::Unit) => true,
            (Value::Pair(l, r), TType::Prod(lt, rt)) => l.matches(lt) && r.matches(rt),
            (Value::Closure(..), TType::Arrow(..)) => true,
            _ => false,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Unit => f.write_str("()"),
            Value::Pair(l, r) => write!(f, "({l}, {r})"),
            Value::Closure(..) => f.write_str("<fun>"),
        }
    }
}

/// Evaluation of a well-typed term never faults; a fault is a bug.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuntimeFault {
    #[error("runtime fault: unbound variable `{0}`")]
    Unbound(String),
    #[error("runtime fault: applied a non-function")]
    NotAFunction,
    #[error("runtime fault: projected from a non-pair")]
    NotAPair,
    #[error("runtime fault: step budget of {0} exhausted")]
    OutOfSteps(u64),
}

pub const STEP_BUDGET: u64 = 1_000_000;

struct Machine {
    steps: u64,
    budget: u64,
}

impl Machine {
    fn tick(&mut self) -> Result<(), RuntimeFault> {
        self.steps += 1;
        if self.steps > self.budget {
            Err(RuntimeFault::OutOfSteps(self.budget))
        } else {
            Ok(())
        }
    }

    fn eval(&mut self, env: &Arc<Env>, t: &Term) -> Result<Value, RuntimeFault> {
        self.tick()?;
        match t {
            Term::Var(x) => env
                .iter()
                .rev()
                .find(|(n, _)| n == x)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| RuntimeFault::Unbound(x.clone())),
            Term::Int(n) => Ok(Value::Int(*n)),
            Term::Bool(b) => Ok(Value::Bool(*b)),
            Term::Unit => Ok(Value::Unit),
            Term::Lam(x, _, body) => Ok(Value::Closure(
                x.clone(),
                Arc::new((**body).clone()),
                env.clone(),
            )),
            Term::App(f, a) => {
                let fv = self.eval(env, f)?;
                let av = self.eval(env, a)?;
                self.apply(fv, av)
            }
            Term::Pair(l, r) => {
                let lv = self.eval(env, l)?;
                let rv = self.eval(env, r)?;
                Ok(Value::pair(lv, rv))
            }
            Term::Fst(p) => match self.eval(env, p)? {
                Value::Pair(l, _) => Ok(*l),
                _ => Err(RuntimeFault::NotAPair),
            },
            Term::Snd(p) => match self.eval(env, p)? {
                Value::Pair(_, r) => Ok(*r),
                _ => Err(RuntimeFault::NotAPair),
            },
        }
    }

    fn apply(&mut self, f: Value, arg: Value) -> Result<Value, RuntimeFault> {
        match f {
            Value::Closure(x, body, cenv) => {
                let mut env = (*cenv).clone();
                env.push((x, arg));
                self.eval(&Arc::new(env), &body)
            }
            _ => Err(RuntimeFault::NotAFunction),
        }
    }
}

/// Evaluates a closed term.
pub fn eval(t: &Term) -> Result<Value, RuntimeFault> {
    eval_in(&Vec::new(), t)
}

pub fn eval_in(env: &Env, t: &Term) -> Result<Value, RuntimeFault> {
    let mut m = Machine {
        steps: 0,
        budget: STEP_BUDGET,
    };
    m.eval(&Arc::new(env.clone()), t)
}

/// Applies a function value to an argument value.
pub fn apply_value(f: &Value, arg: Value) -> Result<Value, RuntimeFault> {
    let mut m = Machine {
        steps: 0,
        budget: STEP_BUDGET,
    };
    m.apply(f.clone(), arg)
}

/// One step of an observation path into a value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PathStep {
    First,
    Second,
    ApplyCanonical(Type),
}

pub type ObservationPath = Vec<PathStep>;

pub fn path_to_string(path: &[PathStep]) -> String {
    if path.is_empty() {
        return "ε".to_string();
    }
    path.iter()
        .map(|s| match s {
            PathStep::First => "fst".to_string(),
            PathStep::Second => "snd".to_string(),
            PathStep::ApplyCanonical(t) => format!("@{t}"),
        })
        .collect::<Vec<_>>()
        .join(".")
}

/// A closed term for the canonical inhabitant of a type: `Int` is 1, `Bool`
/// is true, `Top` is unit, intersections pair their components and arrows
/// are constant functions returning the canonical codomain.
pub fn canonical_term(a: &Type) -> Term {
    match a {
        Type::Int => Term::Int(1),
        Type::Bool => Term::Bool(true),
        Type::Top => Term::Unit,
        Type::And(l, r) => Term::pair(canonical_term(l), canonical_term(r)),
        Type::Arrow(d, c) => Term::lam("_", crate::syntax::erase_type(d), canonical_term(c)),
    }
}

pub fn canonical_value(a: &Type) -> Value {
    eval(&canonical_term(a)).expect("canonical terms are closed and well typed")
}

/// Like [`canonical_term`] but every ground leaf gets a distinct integer or
/// alternating boolean, so projections out of different components can be
/// told apart. Such values are not elaborations of well-typed programs in
/// general (`Int & Int` has no merge), so they are only used for diagnostics.
pub fn distinguishing_term(a: &Type) -> Term {
    fn go(a: &Type, counter: &mut i64) -> Term {
        match a {
            Type::Int => {
                *counter += 1;
                Term::Int(*counter)
            }
            Type::Bool => {
                *counter += 1;
                Term::Bool(*counter % 2 == 1)
            }
            Type::Top => Term::Unit,
            Type::And(l, r) => {
                let l = go(l, counter);
                Term::pair(l, go(r, counter))
            }
            Type::Arrow(d, c) => Term::lam("_", crate::syntax::erase_type(d), go(c, counter)),
        }
    }
    go(a, &mut 0)
}

/// Enumerates ground observations of a value inhabiting `erase(ty)`: every
/// path through products, applying functions to the canonical argument of
/// their domain.
pub fn observe(v: &Value, ty: &Type) -> Result<Vec<(ObservationPath, Value)>, RuntimeFault> {
    let mut out = Vec::new();
    observe_into(v, ty, &mut Vec::new(), &mut out)?;
    Ok(out)
}

fn observe_into(
    v: &Value,
    ty: &Type,
    path: &mut ObservationPath,
    out: &mut Vec<(ObservationPath, Value)>,
) -> Result<(), RuntimeFault> {
    match (ty, v) {
        (Type::And(lt, rt), Value::Pair(l, r)) => {
            path.push(PathStep::First);
            observe_into(l, lt, path, out)?;
            path.pop();
            path.push(PathStep::Second);
            observe_into(r, rt, path, out)?;
            path.pop();
            Ok(())
        }
        (Type::Arrow(d, c), f @ Value::Closure(..)) => {
            let result = apply_value(f, canonical_value(d))?;
            path.push(PathStep::ApplyCanonical((**d).clone()));
            observe_into(&result, c, path, out)?;
            path.pop();
            Ok(())
        }
        (Type::And(..), _) => Err(RuntimeFault::NotAPair),
        (Type::Arrow(..), _) => Err(RuntimeFault::NotAFunction),
        (_, ground) => {
            out.push((path.clone(), ground.clone()));
            Ok(())
        }
    }
}

/// Beta-normalises a term, reducing projections of pairs as well. Bound
/// variables are renamed `v0, v1, ...` in binding order, so alpha-equivalent
/// terms normalise to identical terms. Only meant for well-typed terms.
pub fn normalize(t: &Term) -> Term {
    let mut n = Normalizer { fresh: 0 };
    let nf = n.norm(t, &HashMap::new());
    rename_canonically(&nf)
}

struct Normalizer {
    fresh: usize,
}

impl Normalizer {
    fn fresh(&mut self) -> String {
        self.fresh += 1;
        format!("#{}", self.fresh)
    }

    // Normal form of `t` under the substitution `sub`. Results never mention
    // a name bound inside `t` in a way that could capture, because every
    // binder is renamed to a fresh name on the way in.
    fn norm(&mut self, t: &Term, sub: &HashMap<String, Term>) -> Term {
        match t {
            Term::Var(x) => sub.get(x).cloned().unwrap_or_else(|| t.clone()),
            Term::Int(_) | Term::Bool(_) | Term::Unit => t.clone(),
            Term::Lam(x, ty, body) => {
                let y = self.fresh();
                let mut inner = sub.clone();
                inner.insert(x.clone(), Term::Var(y.clone()));
                Term::lam(&y, ty.clone(), self.norm(body, &inner))
            }
            Term::App(f, a) => {
                let f = self.norm(f, sub);
                let a = self.norm(a, sub);
                self.apply(f, a)
            }
            Term::Pair(l, r) => Term::pair(self.norm(l, sub), self.norm(r, sub)),
            Term::Fst(p) => match self.norm(p, sub) {
                Term::Pair(l, _) => *l,
                other => Term::fst(other),
            },
            Term::Snd(p) => match self.norm(p, sub) {
                Term::Pair(_, r) => *r,
                other => Term::snd(other),
            },
        }
    }

    fn apply(&mut self, f: Term, a: Term) -> Term {
        match f {
            Term::Lam(x, _, body) => {
                let mut sub = HashMap::new();
                sub.insert(x, a);
                self.norm(&body, &sub)
            }
            other => Term::app(other, a),
        }
    }
}

fn rename_canonically(t: &Term) -> Term {
    fn go(t: &Term, names: &mut Vec<(String, String)>, next: &mut usize) -> Term {
        match t {
            Term::Var(x) => match names.iter().rev().find(|(from, _)| from == x) {
                Some((_, to)) => Term::Var(to.clone()),
                None => t.clone(),
            },
            Term::Int(_) | Term::Bool(_) | Term::Unit => t.clone(),
            Term::Lam(x, ty, body) => {
                let y = format!("v{next}");
                *next += 1;
                names.push((x.clone(), y.clone()));
                let body = go(body, names, next);
                names.pop();
                Term::lam(&y, ty.clone(), body)
            }
            Term::App(f, a) => Term::app(go(f, names, next), go(a, names, next)),
            Term::Pair(l, r) => Term::pair(go(l, names, next), go(r, names, next)),
            Term::Fst(p) => Term::fst(go(p, names, next)),
            Term::Snd(p) => Term::snd(go(p, names, next)),
        }
    }
    go(t, &mut Vec::new(), &mut 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(n: i64) -> Term {
        Term::Int(n)
    }

    #[test]
    fn typing_examples() {
        assert_eq!(
            typecheck(&[], &Term::pair(int(1), Term::Bool(true))),
            Ok(TType::prod(TType::Int, TType::Bool))
        );
        assert_eq!(
            typecheck(&[], &Term::app(int(1), int(2))),
            Err(TargetTypeError::NotAFunction(TType::Int))
        );
        assert_eq!(
            typecheck(&[], &Term::fst(Term::pair(int(1), Term::Bool(true)))),
            Ok(TType::Int)
        );
        assert_eq!(
            typecheck(&[], &Term::var("x")),
            Err(TargetTypeError::Unbound("x".into()))
        );
        assert!(matches!(
            typecheck(&[], &Term::snd(int(1))),
            Err(TargetTypeError::NotAPair(TType::Int))
        ));
        let bad = Term::app(Term::lam("x", TType::Int, Term::var("x")), Term::Bool(true));
        assert!(matches!(
            typecheck(&[], &bad),
            Err(TargetTypeError::Mismatch { .. })
        ));
    }

    #[test]
    fn evaluation_examples() {
        let id = Term::lam("x", TType::Int, Term::var("x"));
        assert_eq!(eval(&Term::app(id, int(3))), Ok(Value::Int(3)));
        assert_eq!(
            eval(&Term::snd(Term::pair(int(1), Term::Bool(true)))),
            Ok(Value::Bool(true))
        );
        assert_eq!(
            eval(&Term::app(int(1), int(1))),
            Err(RuntimeFault::NotAFunction)
        );
    }

    #[test]
    fn closures_capture_their_environment() {
        // (\x. \y. x) 1 2 == 1
        let k = Term::lam("x", TType::Int, Term::lam("y", TType::Int, Term::var("x")));
        let t = Term::app(Term::app(k, int(1)), int(2));
        assert_eq!(eval(&t), Ok(Value::Int(1)));
    }

    #[test]
    fn canonical_values() {
        assert_eq!(
            canonical_value(&Type::and(Type::Int, Type::Bool)),
            Value::pair(Value::Int(1), Value::Bool(true))
        );
        assert_eq!(canonical_value(&Type::Top), Value::Unit);
        let f = canonical_value(&Type::arrow(Type::Int, Type::Int));
        assert_eq!(apply_value(&f, Value::Int(7)), Ok(Value::Int(1)));
    }

    #[test]
    fn observation_examples() {
        let v = Value::pair(Value::Int(1), Value::Bool(true));
        assert_eq!(
            observe(&v, &Type::and(Type::Int, Type::Bool)).unwrap(),
            vec![
                (vec![PathStep::First], Value::Int(1)),
                (vec![PathStep::Second], Value::Bool(true)),
            ]
        );
        assert_eq!(
            observe(&Value::Unit, &Type::Top).unwrap(),
            vec![(vec![], Value::Unit)]
        );
        let f = eval(&Term::lam("x", TType::Int, Term::Bool(true))).unwrap();
        assert_eq!(
            observe(&f, &Type::arrow(Type::Int, Type::Bool)).unwrap(),
            vec![(vec![PathStep::ApplyCanonical(Type::Int)], Value::Bool(true))]
        );
    }

    #[test]
    fn normalisation_is_alpha_insensitive() {
        let a = Term::lam("x", TType::Int, Term::var("x"));
        let b = Term::lam("y", TType::Int, Term::var("y"));
        assert_eq!(normalize(&a), normalize(&b));
        // \p. (\x. x) (fst (p, 1))  ~>  \p. fst (p, 1) ~> \p. p
        let t = Term::lam(
            "p",
            TType::Int,
            Term::app(a, Term::fst(Term::pair(Term::var("p"), int(1)))),
        );
        assert_eq!(normalize(&t), Term::lam("v0", TType::Int, Term::var("v0")));
    }

    #[test]
    fn normalisation_avoids_capture() {
        // (\x. \y. x) y  under a binder for y must not capture.
        let k = Term::lam("x", TType::Int, Term::lam("y", TType::Int, Term::var("x")));
        let t = Term::lam("y", TType::Int, Term::app(k, Term::var("y")));
        let nf = normalize(&t);
        assert_eq!(
            nf,
            Term::lam(
                "v0",
                TType::Int,
                Term::lam("v1", TType::Int, Term::var("v0"))
            )
        );
    }
}
