//! Disjointness: two types are disjoint when their only common supertypes
//! are top-like. Merges are only allowed between disjoint types.
//!
//! Every non-top-like type has a base type at the end of some path of
//! codomains and intersection components, and any common supertype can be
//! weakened along that path to `U -> ... -> U -> c`, where `U` is the
//! intersection of every arrow domain occurring in either type. So it is
//! enough to test those candidates, up to the arrow depth of the inputs.

use crate::subtype::is_subtype;
use crate::syntax::Type;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DisjointVerdict {
    Disjoint,
    NotDisjoint { witness: Type },
}

impl DisjointVerdict {
    pub fn is_disjoint(&self) -> bool {
        matches!(self, DisjointVerdict::Disjoint)
    }
}

fn collect_domains(t: &Type, out: &mut Vec<Type>) {
    match t {
        Type::Arrow(d, c) => {
            if !out.contains(d) {
                out.push((**d).clone());
            }
            collect_domains(d, out);
            collect_domains(c, out);
        }
        Type::And(l, r) => {
            collect_domains(l, out);
            collect_domains(r, out);
        }
        _ => {}
    }
}

/// Candidate common supertypes, simplest first.
fn candidates(a: &Type, b: &Type) -> Vec<Type> {
    let mut domains = Vec::new();
    collect_domains(a, &mut domains);
    collect_domains(b, &mut domains);
    let depth = a.arrow_depth().max(b.arrow_depth());
    let mut out = vec![Type::Int, Type::Bool];
    if let Some(u) = domains.into_iter().reduce(Type::and) {
        let mut prev = out.clone();
        for _ in 0..depth {
            prev = prev
                .into_iter()
                .map(|c| Type::arrow(u.clone(), c))
                .collect();
            out.extend(prev.iter().cloned());
        }
    }
    out
}

pub fn alg_disjoint(a: &Type, b: &Type) -> DisjointVerdict {
    for c in candidates(a, b) {
        if is_subtype(a, &c) && is_subtype(b, &c) {
            return DisjointVerdict::NotDisjoint { witness: c };
        }
    }
    DisjointVerdict::Disjoint
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{enumerate_types, spec_disjoint_with, standard_bases};
    use crate::oracle::{DeclOracle, SearchBudget, SpecDisjointness};
    use crate::parser::parse_type;

    fn ty(s: &str) -> Type {
        parse_type(s).unwrap()
    }

    #[test]
    fn examples() {
        assert!(alg_disjoint(&Type::Int, &Type::Bool).is_disjoint());
        assert!(alg_disjoint(&Type::Int, &ty("Int -> Int")).is_disjoint());
        assert!(alg_disjoint(&Type::Top, &Type::Int).is_disjoint());
        assert!(alg_disjoint(&ty("Int -> Int"), &ty("Bool -> Bool")).is_disjoint());
        assert_eq!(
            alg_disjoint(&ty("Int & (Int -> Bool)"), &Type::Bool),
            DisjointVerdict::NotDisjoint {
                witness: Type::Bool
            }
        );
        assert_eq!(
            alg_disjoint(&ty("Int -> Int"), &ty("Bool -> Int")),
            DisjointVerdict::NotDisjoint {
                witness: ty("Int & Bool -> Int")
            }
        );
    }

    #[test]
    fn symmetric_up_to_size_five() {
        let tys = enumerate_types(5, &standard_bases());
        for a in &tys {
            for b in &tys {
                assert_eq!(
                    alg_disjoint(a, b).is_disjoint(),
                    alg_disjoint(b, a).is_disjoint(),
                    "{a} * {b}"
                );
            }
        }
    }

    #[test]
    fn agrees_with_witness_search() {
        let tys = enumerate_types(3, &standard_bases());
        let budget = SearchBudget::new(8, 5, 8);
        let oracle = DeclOracle::new(budget.universe_size, &[]);
        for a in &tys {
            for b in &tys {
                let expected = spec_disjoint_with(&oracle, a, b, &budget);
                let got = alg_disjoint(a, b);
                match expected {
                    SpecDisjointness::Disjoint => assert!(got.is_disjoint(), "{a} * {b}"),
                    SpecDisjointness::CommonSupertypeWitness(c) => {
                        assert!(!got.is_disjoint(), "{a} * {b} share {c}")
                    }
                    SpecDisjointness::Unknown => panic!("{a} * {b} outside universe"),
                }
            }
        }
    }
}
