#![allow(dead_code)]

use limp::disjoint::alg_disjoint;
use limp::subtype::is_subtype;
use limp::{Expr, Type};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// A random type of exactly `size` (odd) constructors.
pub fn random_type(rng: &mut ChaCha8Rng, size: usize) -> Type {
    if size <= 1 {
        return [Type::Int, Type::Bool, Type::Top]
            .choose(rng)
            .unwrap()
            .clone();
    }
    let half = (size - 1) / 2;
    let l = 1 + 2 * rng.gen_range(0..half);
    let r = size - 1 - l;
    let left = random_type(rng, l);
    let right = random_type(rng, r);
    if rng.gen_bool(0.5) {
        Type::arrow(left, right)
    } else {
        Type::and(left, right)
    }
}

/// A random type with odd size in `1..=max`.
pub fn random_type_upto(rng: &mut ChaCha8Rng, max: usize) -> Type {
    let size = 1 + 2 * rng.gen_range(0..max.div_ceil(2));
    random_type(rng, size)
}

/// Type-directed generator of programs that should check against a type.
pub struct ExprGen<'a> {
    pub rng: &'a mut ChaCha8Rng,
    fresh: usize,
}

impl<'a> ExprGen<'a> {
    pub fn new(rng: &'a mut ChaCha8Rng) -> Self {
        ExprGen { rng, fresh: 0 }
    }

    fn fresh(&mut self) -> String {
        self.fresh += 1;
        format!("v{}", self.fresh)
    }

    /// An expression whose inferred type is exactly `ty`.
    pub fn infer(&mut self, ctx: &[(String, Type)], ty: &Type, fuel: u32) -> Expr {
        if let Some((x, _)) = ctx
            .iter()
            .rev()
            .find(|(_, t)| t == ty)
            .filter(|_| self.rng.gen_bool(0.4))
        {
            return Expr::var(x);
        }
        match ty {
            Type::Int if fuel == 0 || self.rng.gen_bool(0.4) => {
                Expr::Int(self.rng.gen_range(-5..50))
            }
            Type::Bool if fuel == 0 || self.rng.gen_bool(0.4) => Expr::Bool(self.rng.gen()),
            Type::Top if fuel == 0 || self.rng.gen_bool(0.5) => Expr::Top,
            Type::And(a, b) if alg_disjoint(a, b).is_disjoint() && self.rng.gen_bool(0.7) => {
                let l = self.infer(ctx, a, fuel.saturating_sub(1));
                let r = self.infer(ctx, b, fuel.saturating_sub(1));
                Expr::merge(l, r)
            }
            _ if fuel > 0 && self.rng.gen_bool(0.3) => {
                // an application of an annotated lambda
                let arg_ty = random_type_upto(self.rng, 3);
                let x = self.fresh();
                let mut inner = ctx.to_vec();
                inner.push((x.clone(), arg_ty.clone()));
                let body = self.check(&inner, ty, fuel - 1);
                let fun = Expr::anno(Expr::lam(&x, body), Type::arrow(arg_ty.clone(), ty.clone()));
                let arg = self.check(ctx, &arg_ty, fuel - 1);
                Expr::app(fun, arg)
            }
            _ => Expr::anno(self.check(ctx, ty, fuel.saturating_sub(1)), ty.clone()),
        }
    }

    /// An expression that checks against `ty`.
    pub fn check(&mut self, ctx: &[(String, Type)], ty: &Type, fuel: u32) -> Expr {
        if let Type::Arrow(a, b) = ty {
            if self.rng.gen_bool(0.6) {
                let x = self.fresh();
                let mut inner = ctx.to_vec();
                inner.push((x.clone(), (**a).clone()));
                let body = self.check(&inner, b, fuel.saturating_sub(1));
                return Expr::lam(&x, body);
            }
        }
        if fuel > 0 && self.rng.gen_bool(0.3) {
            // something of a subtype, checked by subsumption
            for _ in 0..6 {
                let s = self.subtype_candidate(ty);
                if s != *ty && is_subtype(&s, ty) {
                    return self.infer(ctx, &s, fuel - 1);
                }
            }
        }
        match ty {
            Type::And(a, b) if !alg_disjoint(a, b).is_disjoint() => {
                // no merge possible; build one component and widen it
                let part = if is_subtype(a, b) { a } else { b };
                if is_subtype(part, ty) {
                    return Expr::anno(self.check(ctx, part, fuel.saturating_sub(1)), ty.clone());
                }
                if fuel == 0 {
                    // give up; usually ill-typed and filtered out by the caller
                    return Expr::anno(Expr::Top, ty.clone());
                }
                self.infer(ctx, ty, fuel - 1)
            }
            _ => self.infer(ctx, ty, fuel),
        }
    }

    fn subtype_candidate(&mut self, ty: &Type) -> Type {
        let extra = random_type_upto(self.rng, 3);
        match self.rng.gen_range(0..3) {
            0 => Type::and(ty.clone(), extra),
            1 => Type::and(extra.clone(), Type::arrow(extra, ty.clone())),
            _ => extra,
        }
    }
}
