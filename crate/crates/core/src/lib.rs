//! An executable model of intersection subtyping with the modus ponens rule.
//!
//! Subtyping between intersection types, extended with modus ponens, performs
//! resolution: `Int & (Int -> Bool) <: Bool` holds because the function
//! component can be applied to the integer component, and the synthesised
//! coercion does exactly that. Source programs are type checked
//! bidirectionally and elaborated into a small simply typed target calculus
//! with products, where coercions are ordinary functions.
//!
//! * [`syntax`], [`parser`], [`pretty`]: source and target syntax.
//! * [`subtype`]: the subtyping algorithm with coercions, traces and a
//!   termination measure.
//! * [`oracle`]: bounded search over the declarative rules, used as a test
//!   oracle.
//! * [`disjoint`]: disjointness, which gates the merge operator.
//! * [`typing`]: bidirectional typing with elaboration.
//! * [`target`]: target type checking, evaluation and observation.
//! * [`harness`]: differential, coherence and corpus runs.
//! * [`cli`]: the `limp` command-line driver.

pub mod cli;
pub mod disjoint;
pub mod harness;
pub mod oracle;
pub mod parser;
pub mod pretty;
pub mod subtype;
pub mod syntax;
pub mod target;
pub mod typing;

pub use syntax::{Coercion, Context, Expr, TType, Term, Type};
