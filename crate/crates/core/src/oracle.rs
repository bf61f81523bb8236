//! Bounded proof search over the declarative subtyping rules.
//!
//! ```text
//!  S-Refl     A <: A
//!  S-Trans    A <: B,  B <: C          =>  A <: C
//!  S-Top      A <: Top
//!  S-TopArr   Top <: Top -> Top
//!  S-Arr      B1 <: A1,  A2 <: B2      =>  A1 -> A2 <: B1 -> B2
//!  S-AndL     A & B <: A
//!  S-AndR     A & B <: B
//!  S-And      A <: B,  A <: C          =>  A <: B & C
//!  S-DistArr  (A -> B) & (A -> C) <: A -> B & C
//!  S-MP       A <: B -> C,  A <: B     =>  A <: C
//! ```
//!
//! The middle type of `S-Trans` and the argument type of `S-MP` are not
//! determined by the conclusion, so the search ranges over a finite
//! *universe*: every type up to a size bound plus the subterms of the
//! queried types (the left universe), and additionally the arrows between
//! left-universe types that are at most two constructors larger than the
//! biggest of them (the right universe, which `S-MP` premises live in).
//!
//! The relation is computed bottom-up: round `k` adds every judgment whose
//! shortest derivation in the universe has height `k`. The *fuel* of a query
//! bounds that height. Coercions are then read back top-down from the
//! height table.

use std::collections::HashMap;

use crate::subtype::toplike;
use crate::syntax::{erase_type, Coercion, TType, Term, Type};
use crate::target::normalize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    /// Maximum derivation height.
    pub fuel: u32,
    /// Size bound for the enumerated part of the universe.
    pub universe_size: usize,
    /// How many distinct coercions to return.
    pub max_coercions: usize,
}

impl SearchBudget {
    pub fn new(fuel: u32, universe_size: usize, max_coercions: usize) -> SearchBudget {
        assert!(
            fuel > 0 && universe_size > 0 && max_coercions > 0,
            "search budgets are strictly positive"
        );
        SearchBudget {
            fuel,
            universe_size,
            max_coercions,
        }
    }

    /// Doubles fuel and adds one to the universe size.
    pub fn escalate(self) -> SearchBudget {
        SearchBudget {
            fuel: self.fuel * 2,
            universe_size: self.universe_size + 1,
            max_coercions: self.max_coercions,
        }
    }
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget::new(8, 4, 8)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleVerdict {
    /// Distinct coercions, as normalised target terms, shallowest first.
    Derivable(Vec<Coercion>),
    NotDerivableWithinFuel,
    /// The query does not fit in the universe the oracle was built for.
    ExhaustedUniverse,
}

impl OracleVerdict {
    pub fn is_derivable(&self) -> bool {
        matches!(self, OracleVerdict::Derivable(_))
    }
}

/// All types of size at most `max_size` over `bases`, `Top`, arrows and
/// intersections; ordered by size, then structurally; no duplicates.
pub fn enumerate_types(max_size: usize, bases: &[Type]) -> Vec<Type> {
    let mut by_size: Vec<Vec<Type>> = vec![Vec::new(); max_size + 1];
    if max_size >= 1 {
        let mut atoms: Vec<Type> = Vec::new();
        for b in bases.iter().chain(std::iter::once(&Type::Top)) {
            if !atoms.contains(b) {
                atoms.push(b.clone());
            }
        }
        by_size[1] = atoms;
    }
    for n in 2..=max_size {
        let mut level = Vec::new();
        for ctor in 0..2 {
            for l in 1..n - 1 {
                let r = n - 1 - l;
                for lt in &by_size[l] {
                    for rt in &by_size[r] {
                        let t = if ctor == 0 {
                            Type::arrow(lt.clone(), rt.clone())
                        } else {
                            Type::and(lt.clone(), rt.clone())
                        };
                        level.push(t);
                    }
                }
            }
        }
        by_size[n] = level;
    }
    by_size.into_iter().flatten().collect()
}

// `D -> B & C` has the middle type `(D -> B) & (D -> C)` through distributivity.
fn split_once(t: &Type) -> Option<Type> {
    match t {
        Type::Arrow(d, c) => match &**c {
            Type::And(l, r) => Some(Type::and(
                Type::arrow((**d).clone(), (**l).clone()),
                Type::arrow((**d).clone(), (**r).clone()),
            )),
            _ => None,
        },
        _ => None,
    }
}

pub fn standard_bases() -> Vec<Type> {
    vec![Type::Int, Type::Bool]
}

/// Rule labels of the declarative system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeclRule {
    Refl,
    Top,
    TopArr,
    AndL,
    AndR,
    DistArr,
    Arr,
    And,
    Trans,
    Mp,
}

#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Bits {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn intersects(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).any(|(a, b)| a & b != 0)
    }
}

struct RightInfo {
    /// (domain as left index, codomain as right index)
    arrow: Option<(usize, usize)>,
    /// components as right indices
    and: Option<(usize, usize)>,
    /// (argument as left index, `argument -> this` as right index)
    mp: Vec<(usize, usize)>,
}

struct LeftInfo {
    as_right: usize,
    /// (domain as right index, codomain as left index)
    arrow: Option<(usize, usize)>,
}

/// The declarative relation over a finite universe, with minimal
/// derivation heights.
pub struct DeclOracle {
    lefts: Vec<Type>,
    rights: Vec<Type>,
    lidx: HashMap<Type, usize>,
    ridx: HashMap<Type, usize>,
    linfo: Vec<LeftInfo>,
    rinfo: Vec<RightInfo>,
    height: Vec<u8>,
    rounds: u8,
}

const MAX_ROUNDS: u8 = 250;

impl DeclOracle {
    /// Builds the universe from all types up to `universe_size` over
    /// `Int` and `Bool` plus the given seeds, and saturates the relation.
    pub fn new(universe_size: usize, seeds: &[Type]) -> DeclOracle {
        let mut lefts: Vec<Type> = Vec::new();
        for t in enumerate_types(universe_size, &standard_bases()) {
            t.collect_subterms(&mut lefts);
        }
        for s in seeds {
            s.collect_subterms(&mut lefts);
        }
        let max_left = lefts.iter().map(Type::size).max().unwrap_or(1);
        let mut i = 0;
        while i < lefts.len() {
            if let Some(t) = split_once(&lefts[i]) {
                t.collect_subterms(&mut lefts);
            }
            i += 1;
        }
        let lidx: HashMap<Type, usize> = lefts
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, t)| (t, i))
            .collect();

        let mut rights = lefts.clone();
        let mut ridx = lidx.clone();
        for x in &lefts {
            for y in &lefts {
                if x.size() + y.size() < max_left + 2 {
                    let t = Type::arrow(x.clone(), y.clone());
                    if !ridx.contains_key(&t) {
                        ridx.insert(t.clone(), rights.len());
                        rights.push(t);
                    }
                }
            }
        }

        let linfo = lefts
            .iter()
            .map(|t| LeftInfo {
                as_right: ridx[t],
                arrow: match t {
                    Type::Arrow(d, c) => Some((ridx[&**d], lidx[&**c])),
                    _ => None,
                },
            })
            .collect();
        let rinfo = rights
            .iter()
            .map(|t| RightInfo {
                arrow: match t {
                    Type::Arrow(d, c) => Some((lidx[&**d], ridx[&**c])),
                    _ => None,
                },
                and: match t {
                    Type::And(l, r) => Some((ridx[&**l], ridx[&**r])),
                    _ => None,
                },
                mp: lefts
                    .iter()
                    .enumerate()
                    .filter_map(|(m, mt)| {
                        ridx.get(&Type::arrow(mt.clone(), t.clone()))
                            .map(|&r| (m, r))
                    })
                    .collect(),
            })
            .collect();

        let mut oracle = DeclOracle {
            height: vec![0; lefts.len() * rights.len()],
            lefts,
            rights,
            lidx,
            ridx,
            linfo,
            rinfo,
            rounds: 0,
        };
        oracle.saturate();
        oracle
    }

    fn at(&self, l: usize, r: usize) -> usize {
        l * self.rights.len() + r
    }

    fn h(&self, l: usize, r: usize) -> u8 {
        self.height[self.at(l, r)]
    }

    fn axiom(&self, l: usize, r: usize) -> Option<DeclRule> {
        let a = &self.lefts[l];
        let b = &self.rights[r];
        if a == b {
            return Some(DeclRule::Refl);
        }
        if *b == Type::Top {
            return Some(DeclRule::Top);
        }
        if *a == Type::Top && *b == Type::arrow(Type::Top, Type::Top) {
            return Some(DeclRule::TopArr);
        }
        if let Type::And(a1, a2) = a {
            if **a1 == *b {
                return Some(DeclRule::AndL);
            }
            if **a2 == *b {
                return Some(DeclRule::AndR);
            }
            if let (Type::Arrow(x1, y), Type::Arrow(x2, z), Type::Arrow(bx, bc)) = (&**a1, &**a2, b)
            {
                if x1 == x2 && x1 == bx && **bc == Type::and((**y).clone(), (**z).clone()) {
                    return Some(DeclRule::DistArr);
                }
            }
        }
        None
    }

    fn saturate(&mut self) {
        let nl = self.lefts.len();
        let nr = self.rights.len();
        // row[a]: bits over lefts m with a <: m; col[b]: bits over lefts m with m <: b
        let mut row = vec![Bits::new(nl); nl];
        let mut col = vec![Bits::new(nl); nr];
        let mut fresh: Vec<(usize, usize)> = Vec::new();
        for l in 0..nl {
            for r in 0..nr {
                if self.axiom(l, r).is_some() {
                    fresh.push((l, r));
                }
            }
        }
        let mut round = 1u8;
        loop {
            if fresh.is_empty() || round > MAX_ROUNDS {
                break;
            }
            for &(l, r) in &fresh {
                let i = self.at(l, r);
                self.height[i] = round;
                col[r].set(l);
            }
            for &(l, r) in &fresh {
                if r < nl {
                    row[l].set(r);
                }
            }
            self.rounds = round;
            round += 1;
            fresh.clear();
            for l in 0..nl {
                for r in 0..nr {
                    if self.h(l, r) == 0 && self.fires(l, r, &row, &col) {
                        fresh.push((l, r));
                    }
                }
            }
        }
    }

    fn fires(&self, l: usize, r: usize, row: &[Bits], col: &[Bits]) -> bool {
        let ri = &self.rinfo[r];
        if let (Some((a1, a2)), Some((b1, b2))) = (self.linfo[l].arrow, ri.arrow) {
            if self.h(b1, a1) > 0 && self.h(a2, b2) > 0 {
                return true;
            }
        }
        if let Some((b1, b2)) = ri.and {
            if self.h(l, b1) > 0 && self.h(l, b2) > 0 {
                return true;
            }
        }
        if row[l].intersects(&col[r]) {
            return true;
        }
        ri.mp
            .iter()
            .any(|&(m, mr)| self.h(l, mr) > 0 && self.h(l, self.linfo[m].as_right) > 0)
    }

    /// Number of rounds until nothing new was derivable.
    pub fn saturation_height(&self) -> u8 {
        self.rounds
    }

    pub fn universe_len(&self) -> (usize, usize) {
        (self.lefts.len(), self.rights.len())
    }

    pub fn contains(&self, a: &Type, b: &Type) -> bool {
        self.lidx.contains_key(a) && self.ridx.contains_key(b)
    }

    /// Height of the shortest derivation of `a <: b` in the universe.
    pub fn min_height(&self, a: &Type, b: &Type) -> Option<u8> {
        let l = *self.lidx.get(a)?;
        let r = *self.ridx.get(b)?;
        match self.h(l, r) {
            0 => None,
            h => Some(h),
        }
    }

    pub fn derivable(&self, a: &Type, b: &Type, fuel: u32) -> bool {
        self.min_height(a, b).is_some_and(|h| u32::from(h) <= fuel)
    }

    pub fn verdict(&self, a: &Type, b: &Type, budget: &SearchBudget) -> OracleVerdict {
        if !self.contains(a, b) {
            return OracleVerdict::ExhaustedUniverse;
        }
        if !self.derivable(a, b, budget.fuel) {
            return OracleVerdict::NotDerivableWithinFuel;
        }
        let cs = self.coercions(a, b, budget.fuel, budget.max_coercions);
        OracleVerdict::Derivable(cs)
    }

    /// Up to `max` distinct coercions for `a <: b`, read back from
    /// derivations at most one level taller than the shortest one.
    pub fn coercions(&self, a: &Type, b: &Type, fuel: u32, max: usize) -> Vec<Coercion> {
        let (Some(&l), Some(&r)) = (self.lidx.get(a), self.ridx.get(b)) else {
            return Vec::new();
        };
        let h = self.h(l, r);
        if h == 0 || u32::from(h) > fuel {
            return Vec::new();
        }
        let limit = (u32::from(h) + 1).min(fuel) as u8;
        let mut reader = Readback {
            oracle: self,
            memo: HashMap::new(),
            max,
        };
        reader
            .terms(l, r, limit)
            .into_iter()
            .map(Coercion)
            .collect()
    }
}

struct Readback<'a> {
    oracle: &'a DeclOracle,
    memo: HashMap<(usize, usize, u8), Vec<Term>>,
    max: usize,
}

impl Readback<'_> {
    fn push(&self, out: &mut Vec<Term>, t: Term) {
        if out.len() < self.max {
            let nf = normalize(&t);
            if !out.contains(&nf) {
                out.push(nf);
            }
        }
    }

    // Coercions for lefts[l] <: rights[r] from derivations of height <= limit.
    fn terms(&mut self, l: usize, r: usize, limit: u8) -> Vec<Term> {
        let o = self.oracle;
        let h = o.h(l, r);
        if h == 0 || h > limit {
            return Vec::new();
        }
        if let Some(v) = self.memo.get(&(l, r, limit)) {
            return v.clone();
        }
        let a = o.lefts[l].clone();
        let b = o.rights[r].clone();
        let ea = erase_type(&a);
        let x = || Term::var("x");
        let lam = |body: Term| Term::lam("x", ea.clone(), body);
        let mut out: Vec<Term> = Vec::new();

        if let Some(rule) = o.axiom(l, r) {
            let t = match rule {
                DeclRule::Refl => lam(x()),
                DeclRule::Top => lam(Term::Unit),
                DeclRule::TopArr => lam(Term::lam("y", TType::Unit, Term::Unit)),
                DeclRule::AndL => lam(Term::fst(x())),
                DeclRule::AndR => lam(Term::snd(x())),
                DeclRule::DistArr => {
                    let Type::Arrow(dom, _) = &b else {
                        unreachable!()
                    };
                    let y = || Term::var("y");
                    lam(Term::lam(
                        "y",
                        erase_type(dom),
                        Term::pair(
                            Term::app(Term::fst(x()), y()),
                            Term::app(Term::snd(x()), y()),
                        ),
                    ))
                }
                _ => unreachable!("not an axiom"),
            };
            self.push(&mut out, t);
        }
        if limit > 1 {
            let below = limit - 1;
            let ri_arrow = o.rinfo[r].arrow;
            let ri_and = o.rinfo[r].and;
            if let (Some((a1, a2)), Some((b1, b2))) = (o.linfo[l].arrow, ri_arrow) {
                let dom = self.terms(b1, a1, below);
                let cod = self.terms(a2, b2, below);
                let eb1 = erase_type(&o.lefts[b1]);
                for c1 in &dom {
                    for c2 in &cod {
                        // \x. \y. c2 (x (c1 y))
                        let body = Term::app(
                            c2.clone(),
                            Term::app(x(), Term::app(c1.clone(), Term::var("y"))),
                        );
                        self.push(&mut out, lam(Term::lam("y", eb1.clone(), body)));
                    }
                }
            }
            if let Some((b1, b2)) = ri_and {
                let left = self.terms(l, b1, below);
                let right = self.terms(l, b2, below);
                for c1 in &left {
                    for c2 in &right {
                        let body =
                            Term::pair(Term::app(c1.clone(), x()), Term::app(c2.clone(), x()));
                        self.push(&mut out, lam(body));
                    }
                }
            }
            for m in 0..o.lefts.len() {
                if out.len() >= self.max {
                    break;
                }
                let mr = o.linfo[m].as_right;
                let h1 = o.h(l, mr);
                let h2 = o.h(m, r);
                if h1 == 0 || h2 == 0 || h1 > below || h2 > below || m == l || mr == r {
                    continue;
                }
                let first = self.terms(l, mr, below);
                let second = self.terms(m, r, below);
                for c1 in &first {
                    for c2 in &second {
                        let body = Term::app(c2.clone(), Term::app(c1.clone(), x()));
                        self.push(&mut out, lam(body));
                    }
                }
            }
            let mp = o.rinfo[r].mp.clone();
            for (m, fr) in mp {
                if out.len() >= self.max {
                    break;
                }
                let mr = o.linfo[m].as_right;
                let h1 = o.h(l, fr);
                let h2 = o.h(l, mr);
                if h1 == 0 || h2 == 0 || h1 > below || h2 > below {
                    continue;
                }
                let funs = self.terms(l, fr, below);
                let args = self.terms(l, mr, below);
                for f in &funs {
                    for g in &args {
                        let body = Term::app(Term::app(f.clone(), x()), Term::app(g.clone(), x()));
                        self.push(&mut out, lam(body));
                    }
                }
            }
        }
        self.memo.insert((l, r, limit), out.clone());
        out
    }
}

/// One-off declarative query with its own universe.
pub fn decl_subtype(a: &Type, b: &Type, budget: &SearchBudget) -> OracleVerdict {
    let oracle = DeclOracle::new(budget.universe_size, &[a.clone(), b.clone()]);
    oracle.verdict(a, b, budget)
}

/// Outcome of the witness search for specification-style disjointness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecDisjointness {
    /// No common non-top-like supertype within the budget.
    Disjoint,
    CommonSupertypeWitness(Type),
    Unknown,
}

/// Searches for a non-top-like common supertype among the types of size at
/// most `universe_size`. Only a witness is conclusive.
pub fn spec_disjoint(a: &Type, b: &Type, budget: &SearchBudget) -> SpecDisjointness {
    let oracle = DeclOracle::new(budget.universe_size, &[a.clone(), b.clone()]);
    spec_disjoint_with(&oracle, a, b, budget)
}

pub fn spec_disjoint_with(
    oracle: &DeclOracle,
    a: &Type,
    b: &Type,
    budget: &SearchBudget,
) -> SpecDisjointness {
    if !oracle.lidx.contains_key(a) || !oracle.lidx.contains_key(b) {
        return SpecDisjointness::Unknown;
    }
    for c in enumerate_types(budget.universe_size, &standard_bases()) {
        if toplike(&c) {
            continue;
        }
        if oracle.derivable(a, &c, budget.fuel) && oracle.derivable(b, &c, budget.fuel) {
            return SpecDisjointness::CommonSupertypeWitness(c);
        }
    }
    SpecDisjointness::Disjoint
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_type;
    use crate::subtype::coercion_type;
    use crate::target::typecheck;

    fn ty(s: &str) -> Type {
        parse_type(s).unwrap()
    }

    // c(1) = atoms, c(n) = 2 * sum over splits of c(l) * c(r)
    fn count_by_recurrence(max: usize, atoms: u64) -> u64 {
        let mut c = vec![0u64; max + 1];
        if max >= 1 {
            c[1] = atoms;
        }
        for n in 2..=max {
            let mut s = 0;
            for l in 1..n - 1 {
                s += c[l] * c[n - 1 - l];
            }
            c[n] = 2 * s;
        }
        c.iter().sum()
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate_types(1, &[Type::Int]), vec![Type::Int, Type::Top]);
        let three = enumerate_types(3, &[Type::Int]);
        for s in [
            "Int -> Int",
            "Int & Int",
            "Int -> Top",
            "Top -> Int",
            "Int & Top",
            "Top & Int",
            "Top -> Top",
            "Top & Top",
        ] {
            assert!(three.contains(&ty(s)), "{s}");
        }
        for max in 1..=7 {
            let all = enumerate_types(max, &standard_bases());
            assert_eq!(all.len() as u64, count_by_recurrence(max, 3), "size {max}");
            let mut dedup = all.clone();
            dedup.sort();
            dedup.dedup();
            assert_eq!(dedup.len(), all.len());
            assert!(all.windows(2).all(|w| w[0].size() <= w[1].size()));
        }
    }

    #[test]
    fn projection_is_derivable() {
        let budget = SearchBudget::new(4, 4, 8);
        match decl_subtype(&ty("Int & Bool"), &Type::Int, &budget) {
            OracleVerdict::Derivable(cs) => {
                let fst = normalize(&Term::lam(
                    "x",
                    TType::prod(TType::Int, TType::Bool),
                    Term::fst(Term::var("x")),
                ));
                assert!(cs.iter().any(|c| c.0 == fst));
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn modus_ponens_is_derivable() {
        let a = ty("Int & (Int -> Bool)");
        let budget = SearchBudget::new(6, 4, 8);
        let oracle = DeclOracle::new(4, std::slice::from_ref(&a));
        assert_eq!(oracle.min_height(&a, &Type::Bool), Some(2));
        match oracle.verdict(&a, &Type::Bool, &budget) {
            OracleVerdict::Derivable(cs) => {
                for c in &cs {
                    assert_eq!(typecheck(&[], c.term()), Ok(coercion_type(&a, &Type::Bool)));
                }
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn bool_is_not_int() {
        let budget = SearchBudget::new(8, 4, 8);
        assert_eq!(
            decl_subtype(&Type::Bool, &Type::Int, &budget),
            OracleVerdict::NotDerivableWithinFuel
        );
        assert_eq!(
            decl_subtype(&Type::Int, &Type::Bool, &budget),
            OracleVerdict::NotDerivableWithinFuel
        );
    }

    #[test]
    fn fuel_bounds_height() {
        let oracle = DeclOracle::new(3, &[]);
        let a = ty("Int & (Int -> Bool)");
        let oracle2 = DeclOracle::new(3, std::slice::from_ref(&a));
        assert!(!oracle2.derivable(&a, &Type::Bool, 1));
        assert!(oracle2.derivable(&a, &Type::Bool, 2));
        assert!(oracle.derivable(&Type::Int, &Type::Int, 1));
    }

    #[test]
    fn spec_disjointness_examples() {
        let budget = SearchBudget::new(6, 4, 8);
        assert_eq!(
            spec_disjoint(&Type::Int, &Type::Int, &budget),
            SpecDisjointness::CommonSupertypeWitness(Type::Int)
        );
        assert_eq!(
            spec_disjoint(&Type::Int, &Type::Bool, &budget),
            SpecDisjointness::Disjoint
        );
        assert_eq!(
            spec_disjoint(&ty("Int & Bool"), &Type::Int, &budget),
            SpecDisjointness::CommonSupertypeWitness(Type::Int)
        );
    }
}
