//! Algorithmic subtyping with modus ponens.
//!
//! The algorithm decides `A <: B` and synthesises a coercion
//! `erase(A) -> erase(B)`. The left type is split into a *context* of
//! hypotheses (its intersection components, each paired with the target term
//! that extracts it). The right type is decomposed:
//!
//! | rule    | goal       | action                                                      |
//! |---------|------------|-------------------------------------------------------------|
//! | `A-Top` | top-like   | build the unit-shaped value                                 |
//! | `A-And` | `B1 & B2`  | prove both                                                  |
//! | `A-Arr` | `X -> B'`  | push `X` on the queue, apply the context to it, prove `B'`  |
//! | `A-Base`| `Int/Bool` | focus on some hypothesis                                    |
//!
//! Focusing on a hypothesis `H` for a base goal `c`:
//!
//! | rule     | hypothesis | action                                                    |
//! |----------|------------|-----------------------------------------------------------|
//! | `F-Base` | `c`        | use it                                                    |
//! | `F-AndL` | `H1 & H2`  | focus on `H1`                                             |
//! | `F-AndR` | `H1 & H2`  | focus on `H2`                                             |
//! | `F-MP`   | `D -> R`   | modus ponens: prove `D` from the whole context, focus `R` |
//!
//! Applying the context to a queued argument `X` collects, from every
//! hypothesis, the results it yields:
//!
//! | rule    | hypothesis | action                                                        |
//! |---------|------------|---------------------------------------------------------------|
//! | `P-Arr` | `D -> R`   | if `X <: D`, the result `R` joins the next context            |
//! | `P-MP`  | `D -> R`   | if the context proves `D`, look for arrows inside `R`         |
//!
//! `P-Arr` applied to several hypotheses at once is what makes arrows
//! distribute over intersections. `F-MP` and `P-MP` are the modus ponens
//! rule at the current queue level: the argument of a function hypothesis
//! may come from the context itself rather than from the queue.
//!
//! Termination: every context and goal is built from subterms of the two
//! inputs, so there are finitely many `(context, goal)` states. A state that
//! is already being proved further up the current path fails immediately.
//! The measure is the pair `(states not on the path, node rank)`, compared
//! lexicographically, and it is checked on every recursive call.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::syntax::{erase_type, Coercion, TType, Term, Type};

/// Top-like types carry no information: `Top`, intersections of top-like
/// types, and arrows into a top-like type.
pub fn toplike(a: &Type) -> bool {
    match a {
        Type::Top => true,
        Type::And(l, r) => toplike(l) && toplike(r),
        Type::Arrow(_, c) => toplike(c),
        Type::Int | Type::Bool => false,
    }
}

/// The unit-shaped inhabitant of a top-like type.
pub(crate) fn toplike_term(a: &Type) -> Term {
    match a {
        Type::And(l, r) => Term::pair(toplike_term(l), toplike_term(r)),
        Type::Arrow(d, c) => Term::lam("_", erase_type(d), toplike_term(c)),
        _ => Term::Unit,
    }
}

/// Rule labels of the algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Rule {
    #[serde(rename = "A-Top")]
    ATop,
    #[serde(rename = "A-And")]
    AAnd,
    #[serde(rename = "A-Arr")]
    AArr,
    #[serde(rename = "A-Base")]
    ABase,
    #[serde(rename = "F-Base")]
    FBase,
    #[serde(rename = "F-AndL")]
    FAndL,
    #[serde(rename = "F-AndR")]
    FAndR,
    #[serde(rename = "F-MP")]
    FMp,
    #[serde(rename = "P-Arr")]
    PArr,
    #[serde(rename = "P-MP")]
    PMp,
}

impl Rule {
    pub const ALL: [Rule; 10] = [
        Rule::ATop,
        Rule::AAnd,
        Rule::AArr,
        Rule::ABase,
        Rule::FBase,
        Rule::FAndL,
        Rule::FAndR,
        Rule::FMp,
        Rule::PArr,
        Rule::PMp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::ATop => "A-Top",
            Rule::AAnd => "A-And",
            Rule::AArr => "A-Arr",
            Rule::ABase => "A-Base",
            Rule::FBase => "F-Base",
            Rule::FAndL => "F-AndL",
            Rule::FAndR => "F-AndR",
            Rule::FMp => "F-MP",
            Rule::PArr => "P-Arr",
            Rule::PMp => "P-MP",
        }
    }

    /// Whether the rule is a use of modus ponens.
    pub fn is_modus_ponens(self) -> bool {
        matches!(self, Rule::FMp | Rule::PMp)
    }

    fn kind(self) -> NodeKind {
        match self {
            Rule::ATop | Rule::AAnd | Rule::AArr | Rule::ABase => NodeKind::Check,
            Rule::FBase | Rule::FAndL | Rule::FAndR | Rule::FMp => NodeKind::Focus,
            Rule::PArr | Rule::PMp => NodeKind::Apply,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    /// Proving a goal from a context.
    Check,
    /// Focusing on one hypothesis for a base goal.
    Focus,
    /// Extracting results of one hypothesis for a queued argument.
    Apply,
}

/// A node of the search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgState {
    pub kind: NodeKind,
    /// Hypotheses available at this node.
    pub context: Vec<Type>,
    /// The whole context for check nodes; the hypothesis under focus otherwise.
    pub left: Type,
    pub right: Type,
    /// Arguments pushed by `A-Arr` since the current derivation started.
    pub queue: Vec<Type>,
    /// Check nodes on the path from the root, this one included.
    pub depth: usize,
    /// Distinct subterms of the two input types.
    pub subterms: usize,
}

impl AlgState {
    /// The root state for `a <: b`.
    pub fn initial(a: &Type, b: &Type) -> AlgState {
        let context: Vec<Type> = flatten_types(a);
        AlgState {
            kind: NodeKind::Check,
            left: conjoin(&context),
            context,
            right: b.clone(),
            queue: Vec::new(),
            depth: 1,
            subterms: count_subterms(a, b),
        }
    }
}

fn count_subterms(a: &Type, b: &Type) -> usize {
    let mut all = Vec::new();
    a.collect_subterms(&mut all);
    b.collect_subterms(&mut all);
    all.len()
}

/// Number of `(context, goal)` states for `n` subterms, plus one.
fn state_bound(n: usize) -> u128 {
    if n >= 120 {
        return u128::MAX;
    }
    (1u128 << n).saturating_mul(n as u128).saturating_add(1)
}

/// Lexicographically ordered termination measure.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Measure(pub Vec<u128>);

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// `(states not yet on the path, rank)`. The rank of a check node exceeds
/// the size of every hypothesis in its context; focus and apply nodes rank
/// by the size of the hypothesis they inspect.
pub fn measure_of(s: &AlgState) -> Measure {
    let remaining = state_bound(s.subterms).saturating_sub(s.depth as u128);
    let rank = match s.kind {
        NodeKind::Check => 1 + s.context.iter().map(Type::size).max().unwrap_or(0),
        NodeKind::Focus | NodeKind::Apply => s.left.size(),
    } as u128;
    Measure(vec![remaining, rank])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub rule: Rule,
    pub state: AlgState,
    pub measure: Measure,
}

impl TraceStep {
    /// `<rule> | <left> <: <right> | queue=[...] | measure=(...)`
    pub fn line(&self) -> String {
        let queue: Vec<String> = self.state.queue.iter().map(|t| t.to_string()).collect();
        format!(
            "{} | {} <: {} | queue=[{}] | measure={}",
            self.rule,
            self.state.left,
            self.state.right,
            queue.join(", "),
            self.measure
        )
    }
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.line())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubtypeError {
    /// A negative answer, not a fault. Carries the last base goal that no
    /// hypothesis could produce.
    #[error("not a subtype: {left} </: {right}")]
    NotSubtype {
        left: Type,
        right: Type,
        failing: Box<AlgState>,
    },
    #[error("internal divergence: search depth exceeded {limit} on {left} <: {right}")]
    InternalDivergence {
        left: Type,
        right: Type,
        limit: usize,
    },
    #[error("internal error: termination measure did not decrease ({parent} -> {child})")]
    MeasureNotDecreasing { parent: Measure, child: Measure },
}

impl SubtypeError {
    pub fn is_fault(&self) -> bool {
        !matches!(self, SubtypeError::NotSubtype { .. })
    }
}

/// Counters collected during one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub calls: u64,
    pub measure_checks: u64,
    pub max_depth: usize,
    pub depth_limit: usize,
    pub cycles_cut: u64,
}

/// Result, derivation trace (rule applications of the successful derivation,
/// in pre-order) and counters.
#[derive(Debug, Clone)]
pub struct SubtypeRun {
    pub result: Result<Coercion, SubtypeError>,
    pub trace: Vec<TraceStep>,
    pub stats: SearchStats,
}

/// Decides `a <: b`, returning a coercion on success.
pub fn alg_subtype(a: &Type, b: &Type) -> Result<Coercion, SubtypeError> {
    run(a, b, false).result
}

/// Like [`alg_subtype`], with the rule trace.
pub fn alg_subtype_trace(a: &Type, b: &Type) -> (Result<Coercion, SubtypeError>, Vec<TraceStep>) {
    let r = run(a, b, true);
    (r.result, r.trace)
}

/// Full run with trace and search statistics.
pub fn alg_subtype_run(a: &Type, b: &Type) -> SubtypeRun {
    run(a, b, true)
}

pub fn is_subtype(a: &Type, b: &Type) -> bool {
    alg_subtype(a, b).is_ok()
}

/// One hypothesis: a type and the target term that inhabits it.
#[derive(Debug, Clone)]
struct Hyp {
    ty: Type,
    term: Term,
}

/// Splits intersections into components, dropping top-like ones and
/// duplicates (first occurrence wins).
fn flatten(ty: &Type, term: Term, out: &mut Vec<Hyp>) {
    match ty {
        Type::And(l, r) => {
            flatten(l, Term::fst(term.clone()), out);
            flatten(r, Term::snd(term), out);
        }
        _ if toplike(ty) => {}
        _ => {
            if !out.iter().any(|h| &h.ty == ty) {
                out.push(Hyp {
                    ty: ty.clone(),
                    term,
                });
            }
        }
    }
}

fn flatten_types(ty: &Type) -> Vec<Type> {
    let mut out = Vec::new();
    flatten(ty, Term::Unit, &mut out);
    out.into_iter().map(|h| h.ty).collect()
}

/// Renders a context as a left-nested intersection; the empty context is `Top`.
fn conjoin(ctx: &[Type]) -> Type {
    let mut it = ctx.iter().cloned();
    match it.next() {
        None => Type::Top,
        Some(first) => it.fold(first, Type::and),
    }
}

/// Whether focusing on `h` could ever end in `c`.
fn can_yield(h: &Type, c: &Type) -> bool {
    match h {
        Type::And(l, r) => can_yield(l, c) || can_yield(r, c),
        Type::Arrow(_, r) => can_yield(r, c),
        other => other == c,
    }
}

fn has_arrow(h: &Type) -> bool {
    match h {
        Type::Arrow(..) => true,
        Type::And(l, r) => has_arrow(l) || has_arrow(r),
        _ => false,
    }
}

type StateKey = (Vec<Type>, Type);

struct Solver {
    subterms: usize,
    active: Vec<StateKey>,
    depth: usize,
    depth_limit: usize,
    record: bool,
    trace: Vec<TraceStep>,
    fresh: usize,
    stats: SearchStats,
    last_failure: Option<AlgState>,
    root: (Type, Type),
}

type Step<T> = Result<T, SubtypeError>;

impl Solver {
    fn enter(&mut self, state: &AlgState, parent: Option<&Measure>) -> Step<Measure> {
        self.stats.calls += 1;
        self.depth += 1;
        self.stats.max_depth = self.stats.max_depth.max(self.depth);
        if self.depth > self.depth_limit {
            return Err(SubtypeError::InternalDivergence {
                left: self.root.0.clone(),
                right: self.root.1.clone(),
                limit: self.depth_limit,
            });
        }
        let m = measure_of(state);
        if let Some(p) = parent {
            self.stats.measure_checks += 1;
            if m >= *p {
                return Err(SubtypeError::MeasureNotDecreasing {
                    parent: p.clone(),
                    child: m,
                });
            }
        }
        Ok(m)
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    fn note(&mut self, rule: Rule, state: &AlgState, measure: &Measure) {
        if self.record {
            debug_assert_eq!(rule.kind(), state.kind);
            self.trace.push(TraceStep {
                rule,
                state: state.clone(),
                measure: measure.clone(),
            });
        }
    }

    fn fresh_var(&mut self) -> String {
        self.fresh += 1;
        format!("y{}", self.fresh)
    }

    fn check(
        &mut self,
        ctx: &[Hyp],
        queue: &[Type],
        goal: &Type,
        parent: Option<&Measure>,
    ) -> Step<Option<Term>> {
        let context: Vec<Type> = ctx.iter().map(|h| h.ty.clone()).collect();
        let state = AlgState {
            kind: NodeKind::Check,
            left: conjoin(&context),
            context,
            right: goal.clone(),
            queue: queue.to_vec(),
            depth: self.active.len() + 1,
            subterms: self.subterms,
        };
        let m = self.enter(&state, parent)?;
        let mut key_ctx = state.context.clone();
        key_ctx.sort();
        key_ctx.dedup();
        let key = (key_ctx, goal.clone());
        if self.active.contains(&key) {
            self.stats.cycles_cut += 1;
            self.leave();
            return Ok(None);
        }
        self.active.push(key);
        let mark = self.trace.len();
        let result = self.check_rules(ctx, queue, goal, &state, &m);
        self.active.pop();
        self.leave();
        match result {
            Ok(Some(t)) => Ok(Some(t)),
            Ok(None) => {
                self.trace.truncate(mark);
                Ok(None)
            }
            Err(e) => Err(e),
        }
    }

    fn check_rules(
        &mut self,
        ctx: &[Hyp],
        queue: &[Type],
        goal: &Type,
        state: &AlgState,
        m: &Measure,
    ) -> Step<Option<Term>> {
        if toplike(goal) {
            self.note(Rule::ATop, state, m);
            return Ok(Some(toplike_term(goal)));
        }
        match goal {
            Type::And(g1, g2) => {
                self.note(Rule::AAnd, state, m);
                let Some(t1) = self.check(ctx, queue, g1, Some(m))? else {
                    return Ok(None);
                };
                let Some(t2) = self.check(ctx, queue, g2, Some(m))? else {
                    return Ok(None);
                };
                Ok(Some(Term::pair(t1, t2)))
            }
            Type::Arrow(x, g) => {
                self.note(Rule::AArr, state, m);
                let y = self.fresh_var();
                let next = self.apply(ctx, queue, x, &y, m)?;
                let mut queue = queue.to_vec();
                queue.push((**x).clone());
                let Some(body) = self.check(&next, &queue, g, Some(m))? else {
                    return Ok(None);
                };
                Ok(Some(Term::lam(&y, erase_type(x), body)))
            }
            _ => {
                self.note(Rule::ABase, state, m);
                for h in ctx {
                    let mark = self.trace.len();
                    if let Some(t) = self.focus(ctx, queue, &h.ty, h.term.clone(), goal, m)? {
                        return Ok(Some(t));
                    }
                    self.trace.truncate(mark);
                }
                self.last_failure = Some(state.clone());
                Ok(None)
            }
        }
    }

    fn focus(
        &mut self,
        ctx: &[Hyp],
        queue: &[Type],
        h: &Type,
        term: Term,
        goal: &Type,
        parent: &Measure,
    ) -> Step<Option<Term>> {
        if !can_yield(h, goal) {
            return Ok(None);
        }
        let state = AlgState {
            kind: NodeKind::Focus,
            context: ctx.iter().map(|h| h.ty.clone()).collect(),
            left: h.clone(),
            right: goal.clone(),
            queue: queue.to_vec(),
            depth: self.active.len(),
            subterms: self.subterms,
        };
        let m = self.enter(&state, Some(parent))?;
        let result = self.focus_rules(ctx, queue, h, term, goal, &state, &m);
        self.leave();
        result
    }

    #[allow(clippy::too_many_arguments)]
    fn focus_rules(
        &mut self,
        ctx: &[Hyp],
        queue: &[Type],
        h: &Type,
        term: Term,
        goal: &Type,
        state: &AlgState,
        m: &Measure,
    ) -> Step<Option<Term>> {
        match h {
            Type::And(l, r) => {
                let mark = self.trace.len();
                self.note(Rule::FAndL, state, m);
                if let Some(t) = self.focus(ctx, queue, l, Term::fst(term.clone()), goal, m)? {
                    return Ok(Some(t));
                }
                self.trace.truncate(mark);
                self.note(Rule::FAndR, state, m);
                let r = self.focus(ctx, queue, r, Term::snd(term), goal, m)?;
                if r.is_none() {
                    self.trace.truncate(mark);
                }
                Ok(r)
            }
            Type::Arrow(d, r) => {
                let mark = self.trace.len();
                self.note(Rule::FMp, state, m);
                let Some(arg) = self.check(ctx, queue, d, Some(m))? else {
                    self.trace.truncate(mark);
                    return Ok(None);
                };
                let res = self.focus(ctx, queue, r, Term::app(term, arg), goal, m)?;
                if res.is_none() {
                    self.trace.truncate(mark);
                }
                Ok(res)
            }
            _ if h == goal => {
                self.note(Rule::FBase, state, m);
                Ok(Some(term))
            }
            _ => Ok(None),
        }
    }

    /// The context at the next queue level: everything the hypotheses yield
    /// when given an argument of type `x`, bound to the target variable `y`.
    fn apply(
        &mut self,
        ctx: &[Hyp],
        queue: &[Type],
        x: &Type,
        y: &str,
        parent: &Measure,
    ) -> Step<Vec<Hyp>> {
        let mut out = Vec::new();
        for h in ctx {
            self.arrows(ctx, queue, &h.ty, h.term.clone(), x, y, parent, &mut out)?;
        }
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn arrows(
        &mut self,
        ctx: &[Hyp],
        queue: &[Type],
        h: &Type,
        term: Term,
        x: &Type,
        y: &str,
        parent: &Measure,
        out: &mut Vec<Hyp>,
    ) -> Step<()> {
        let Type::Arrow(d, r) = h else {
            return Ok(());
        };
        let state = AlgState {
            kind: NodeKind::Apply,
            context: ctx.iter().map(|h| h.ty.clone()).collect(),
            left: h.clone(),
            right: (*x).clone(),
            queue: queue.to_vec(),
            depth: self.active.len(),
            subterms: self.subterms,
        };
        let m = self.enter(&state, Some(parent))?;

        // the queued argument is consumed
        let mark = self.trace.len();
        self.note(Rule::PArr, &state, &m);
        let mut arg_ctx = Vec::new();
        flatten(x, Term::var(y), &mut arg_ctx);
        match self.check(&arg_ctx, &[], d, Some(&m))? {
            Some(k) => flatten(r, Term::app(term.clone(), k), out),
            None => self.trace.truncate(mark),
        }

        // modus ponens first, exposing arrows in the codomain
        if has_arrow(r) {
            let mark = self.trace.len();
            self.note(Rule::PMp, &state, &m);
            match self.check(ctx, queue, d, Some(&m))? {
                Some(arg) => {
                    let mut inner = Vec::new();
                    flatten(r, Term::app(term, arg), &mut inner);
                    let before = out.len();
                    for ih in inner {
                        self.arrows(ctx, queue, &ih.ty, ih.term, x, y, &m, out)?;
                    }
                    if out.len() == before {
                        self.trace.truncate(mark);
                    }
                }
                None => self.trace.truncate(mark),
            }
        }
        self.leave();
        Ok(())
    }
}

fn run(a: &Type, b: &Type, record: bool) -> SubtypeRun {
    let subterms = count_subterms(a, b);
    let total = a.size() + b.size();
    let depth_limit = 10 * total * total;
    let mut solver = Solver {
        subterms,
        active: Vec::new(),
        depth: 0,
        depth_limit,
        record,
        trace: Vec::new(),
        fresh: 0,
        stats: SearchStats {
            depth_limit,
            ..SearchStats::default()
        },
        last_failure: None,
        root: (a.clone(), b.clone()),
    };
    let mut ctx = Vec::new();
    flatten(a, Term::var("x"), &mut ctx);
    let result = match solver.check(&ctx, &[], b, None) {
        Ok(Some(body)) => Ok(Coercion(Term::lam("x", erase_type(a), body))),
        Ok(None) => Err(SubtypeError::NotSubtype {
            left: a.clone(),
            right: b.clone(),
            failing: Box::new(
                solver
                    .last_failure
                    .take()
                    .unwrap_or_else(|| AlgState::initial(a, b)),
            ),
        }),
        Err(e) => Err(e),
    };
    if result.is_err() {
        solver.trace.clear();
    }
    SubtypeRun {
        result,
        trace: solver.trace,
        stats: solver.stats,
    }
}

/// Target type a coercion for `a <: b` must have.
pub fn coercion_type(a: &Type, b: &Type) -> TType {
    TType::arrow(erase_type(a), erase_type(b))
}
