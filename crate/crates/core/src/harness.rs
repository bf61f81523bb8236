//! Differential and property suites: algorithm against oracle, coherence
//! sampling, and corpus execution.
//!
//! Work is spread over threads with rayon, but every report is assembled in
//! enumeration order (files in name order), so output does not depend on
//! scheduling.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use crate::oracle::{enumerate_types, standard_bases, DeclOracle, OracleVerdict, SearchBudget};
use crate::parser::parse_program;
use crate::subtype::{alg_subtype, alg_subtype_run, SubtypeError};
use crate::syntax::{erase_type, Coercion, Term, Type};
use crate::target::{
    canonical_term, distinguishing_term, eval, observe, path_to_string, typecheck, ObservationPath,
    RuntimeFault, Value,
};
use crate::typing::elaborate_program;

pub use crate::target::canonical_value;

/// Escalation steps tried before a disagreement is recorded.
pub const ESCALATIONS: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Disagreement {
    pub left: String,
    pub right: String,
    pub alg: String,
    pub oracle: String,
}

/// Aggregated termination instrumentation over many runs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TerminationSummary {
    pub runs: u64,
    pub calls: u64,
    pub measure_checks: u64,
    pub measure_violations: u64,
    pub depth_limit_hits: u64,
    pub max_depth: usize,
    pub cycles_cut: u64,
}

impl TerminationSummary {
    pub fn record(&mut self, run: &crate::subtype::SubtypeRun) {
        self.runs += 1;
        self.calls += run.stats.calls;
        self.measure_checks += run.stats.measure_checks;
        self.max_depth = self.max_depth.max(run.stats.max_depth);
        self.cycles_cut += run.stats.cycles_cut;
        match run.result {
            Err(SubtypeError::MeasureNotDecreasing { .. }) => self.measure_violations += 1,
            Err(SubtypeError::InternalDivergence { .. }) => self.depth_limit_hits += 1,
            _ => {}
        }
    }

    fn merge(&mut self, other: &TerminationSummary) {
        self.runs += other.runs;
        self.calls += other.calls;
        self.measure_checks += other.measure_checks;
        self.measure_violations += other.measure_violations;
        self.depth_limit_hits += other.depth_limit_hits;
        self.max_depth = self.max_depth.max(other.max_depth);
        self.cycles_cut += other.cycles_cut;
    }

    pub fn clean(&self) -> bool {
        self.measure_violations == 0 && self.depth_limit_hits == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AgreementReport {
    pub max_size: usize,
    pub fuel: u32,
    pub universe_size: usize,
    pub total_pairs: u64,
    pub both_yes: u64,
    pub both_no: u64,
    pub oracle_unknown: u64,
    pub disagreements: u64,
    /// Pairs settled only after escalating the budget.
    pub escalated: u64,
    pub disagreement_list: Vec<Disagreement>,
    pub termination: TerminationSummary,
}

impl AgreementReport {
    pub fn passed(&self) -> bool {
        self.disagreements == 0 && self.termination.clean()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "compare: max-size {} fuel {} universe {}",
            self.max_size, self.fuel, self.universe_size
        );
        let _ = writeln!(s, "pairs          {}", self.total_pairs);
        let _ = writeln!(s, "both yes       {}", self.both_yes);
        let _ = writeln!(s, "both no        {}", self.both_no);
        let _ = writeln!(s, "oracle unknown {}", self.oracle_unknown);
        let _ = writeln!(s, "escalated      {}", self.escalated);
        let _ = writeln!(s, "disagreements  {}", self.disagreements);
        for d in &self.disagreement_list {
            let _ = writeln!(
                s,
                "  {} <: {}  algorithm={} oracle={}",
                d.left, d.right, d.alg, d.oracle
            );
        }
        let t = &self.termination;
        let _ = writeln!(
            s,
            "termination: {} runs, {} calls, {} measure checks, {} violations, {} depth-limit hits, max depth {}",
            t.runs, t.calls, t.measure_checks, t.measure_violations, t.depth_limit_hits, t.max_depth
        );
        s
    }
}

fn oracle_label(v: &OracleVerdict) -> &'static str {
    match v {
        OracleVerdict::Derivable(_) => "derivable",
        OracleVerdict::NotDerivableWithinFuel => "not-derivable-within-fuel",
        OracleVerdict::ExhaustedUniverse => "exhausted-universe",
    }
}

enum Outcome {
    BothYes,
    BothNo,
    Unknown,
    Disagree(Disagreement),
}

/// Runs the algorithm and the oracle on every ordered pair of types up to
/// `max_size`. A pair on which they differ is retried with up to
/// [`ESCALATIONS`] escalated budgets before it counts as a disagreement.
pub fn compare_subtyping(max_size: usize, budget: &SearchBudget) -> AgreementReport {
    assert!(max_size >= 1, "max size must be positive");
    let types = enumerate_types(max_size, &standard_bases());
    let mut budgets = vec![*budget];
    for i in 0..ESCALATIONS {
        budgets.push(budgets[i].escalate());
    }
    let oracles: Vec<OnceLock<DeclOracle>> = budgets.iter().map(|_| OnceLock::new()).collect();
    let oracle = |i: usize| {
        oracles[i].get_or_init(|| DeclOracle::new(budgets[i].universe_size.max(max_size), &[]))
    };
    oracle(0);

    let pairs: Vec<(usize, usize)> = (0..types.len())
        .flat_map(|i| (0..types.len()).map(move |j| (i, j)))
        .collect();
    let results: Vec<(Outcome, bool, TerminationSummary)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (a, b) = (&types[i], &types[j]);
            let run = alg_subtype_run(a, b);
            let mut term = TerminationSummary::default();
            term.record(&run);
            let alg = match &run.result {
                Ok(_) => Some(true),
                Err(SubtypeError::NotSubtype { .. }) => Some(false),
                Err(_) => None,
            };
            let mut escalated = false;
            let mut last = OracleVerdict::ExhaustedUniverse;
            for (k, bud) in budgets.iter().enumerate() {
                let o = oracle(k);
                let v = if o.contains(a, b) {
                    if o.derivable(a, b, bud.fuel) {
                        OracleVerdict::Derivable(Vec::new())
                    } else {
                        OracleVerdict::NotDerivableWithinFuel
                    }
                } else {
                    OracleVerdict::ExhaustedUniverse
                };
                let agrees = match (&v, alg) {
                    (OracleVerdict::Derivable(_), Some(true)) => Some(Outcome::BothYes),
                    (OracleVerdict::NotDerivableWithinFuel, Some(false)) => Some(Outcome::BothNo),
                    _ => None,
                };
                if let Some(out) = agrees {
                    return (out, escalated, term);
                }
                last = v;
                escalated = true;
            }
            let out = match (alg, &last) {
                (Some(_), OracleVerdict::ExhaustedUniverse) => Outcome::Unknown,
                _ => Outcome::Disagree(Disagreement {
                    left: a.to_string(),
                    right: b.to_string(),
                    alg: match &run.result {
                        Ok(_) => "subtype".to_string(),
                        Err(SubtypeError::NotSubtype { .. }) => "not-subtype".to_string(),
                        Err(e) => format!("fault: {e}"),
                    },
                    oracle: oracle_label(&last).to_string(),
                }),
            };
            (out, false, term)
        })
        .collect();

    let mut report = AgreementReport {
        max_size,
        fuel: budget.fuel,
        universe_size: budget.universe_size,
        total_pairs: pairs.len() as u64,
        both_yes: 0,
        both_no: 0,
        oracle_unknown: 0,
        disagreements: 0,
        escalated: 0,
        disagreement_list: Vec::new(),
        termination: TerminationSummary::default(),
    };
    for (outcome, escalated, term) in results {
        report.termination.merge(&term);
        if escalated {
            report.escalated += 1;
        }
        match outcome {
            Outcome::BothYes => report.both_yes += 1,
            Outcome::BothNo => report.both_no += 1,
            Outcome::Unknown => report.oracle_unknown += 1,
            Outcome::Disagree(d) => {
                report.disagreements += 1;
                report.disagreement_list.push(d);
            }
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoherenceMismatch {
    pub left: String,
    pub right: String,
    pub coercions: (String, String),
    pub path: String,
    pub values: (String, String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoherenceReport {
    pub label: String,
    pub max_size: usize,
    pub derivable_pairs: u64,
    pub pairs_with_multiple_coercions: u64,
    pub observations_compared: u64,
    pub mismatches: Vec<CoherenceMismatch>,
    /// Evaluation failures; any entry fails the scan.
    pub faults: Vec<String>,
    /// Diagnostics only: pairs whose coercions disagree on a probe with
    /// distinct ground leaves. Such probes need not be elaborations of
    /// well-typed programs, so disagreement here is not a counterexample.
    pub distinguishing_probe_splits: u64,
    pub distinguishing_probe_examples: Vec<CoherenceMismatch>,
}

impl CoherenceReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.faults.is_empty()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "coherence: {} (max-size {})", self.label, self.max_size);
        let _ = writeln!(s, "derivable pairs          {}", self.derivable_pairs);
        let _ = writeln!(
            s,
            "with multiple coercions  {}",
            self.pairs_with_multiple_coercions
        );
        let _ = writeln!(s, "observations compared    {}", self.observations_compared);
        let _ = writeln!(s, "mismatches               {}", self.mismatches.len());
        for m in &self.mismatches {
            let _ = writeln!(
                s,
                "  {} <: {} at {}: {} gives {}, {} gives {}",
                m.left, m.right, m.path, m.coercions.0, m.values.0, m.coercions.1, m.values.1
            );
        }
        let _ = writeln!(s, "faults                   {}", self.faults.len());
        for f in &self.faults {
            let _ = writeln!(s, "  {f}");
        }
        let _ = writeln!(
            s,
            "diagnostic only: distinguishing probes split {} pairs",
            self.distinguishing_probe_splits
        );
        for m in &self.distinguishing_probe_examples {
            let _ = writeln!(
                s,
                "  {} <: {} at {}: {} vs {}",
                m.left, m.right, m.path, m.values.0, m.values.1
            );
        }
        s
    }
}

pub const COHERENCE_LABEL: &str = "observational coherence up to canonical probes";

fn observations(
    c: &Term,
    probe: &Term,
    b: &Type,
) -> Result<Vec<(ObservationPath, Value)>, RuntimeFault> {
    let v = eval(&Term::app(c.clone(), probe.clone()))?;
    observe(&v, b)
}

struct PairCoherence {
    multiple: bool,
    compared: u64,
    mismatches: Vec<CoherenceMismatch>,
    faults: Vec<String>,
    split: Option<CoherenceMismatch>,
}

fn first_difference(
    a: &Type,
    b: &Type,
    coercions: &[Term],
    probe: &Term,
) -> Result<(u64, Option<CoherenceMismatch>), String> {
    let obs: Vec<Vec<(ObservationPath, Value)>> = coercions
        .iter()
        .map(|c| observations(c, probe, b).map_err(|e| format!("{a} <: {b}: {c}: {e}")))
        .collect::<Result<_, _>>()?;
    let mut compared = 0;
    for (k, other) in obs.iter().enumerate().skip(1) {
        for ((path, v0), (_, v1)) in obs[0].iter().zip(other) {
            compared += 1;
            if v0 != v1 {
                return Ok((
                    compared,
                    Some(CoherenceMismatch {
                        left: a.to_string(),
                        right: b.to_string(),
                        coercions: (coercions[0].to_string(), coercions[k].to_string()),
                        path: path_to_string(path),
                        values: (v0.to_string(), v1.to_string()),
                    }),
                ));
            }
        }
    }
    Ok((compared, None))
}

/// For every derivable pair of types up to `max_size`, compares the
/// algorithmic coercion with up to `max_coercions` coercions read back from
/// declarative derivations, on the canonical inhabitant of the left type.
pub fn coherence_scan(max_size: usize, budget: &SearchBudget) -> CoherenceReport {
    let types = enumerate_types(max_size, &standard_bases());
    let oracle = DeclOracle::new(budget.universe_size.max(max_size), &[]);
    let pairs: Vec<(&Type, &Type)> = types
        .iter()
        .flat_map(|a| types.iter().map(move |b| (a, b)))
        .collect();
    let results: Vec<Option<PairCoherence>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let mut coercions: Vec<Term> = Vec::new();
            let mut faults = Vec::new();
            match alg_subtype(a, b) {
                Ok(c) => coercions.push(crate::target::normalize(c.term())),
                Err(SubtypeError::NotSubtype { .. }) => {}
                Err(e) => faults.push(format!("{a} <: {b}: {e}")),
            }
            for Coercion(t) in oracle.coercions(a, b, budget.fuel, budget.max_coercions) {
                if !coercions.contains(&t) {
                    coercions.push(t);
                }
            }
            if coercions.is_empty() && faults.is_empty() {
                return None;
            }
            let expected = crate::subtype::coercion_type(a, b);
            for c in &coercions {
                if typecheck(&[], c) != Ok(expected.clone()) {
                    faults.push(format!("{a} <: {b}: ill-typed coercion {c}"));
                }
            }
            let mut pc = PairCoherence {
                multiple: coercions.len() > 1,
                compared: 0,
                mismatches: Vec::new(),
                faults,
                split: None,
            };
            if pc.multiple && pc.faults.is_empty() {
                match first_difference(a, b, &coercions, &canonical_term(a)) {
                    Ok((n, m)) => {
                        pc.compared = n;
                        pc.mismatches.extend(m);
                    }
                    Err(f) => pc.faults.push(f),
                }
                match first_difference(a, b, &coercions, &distinguishing_term(a)) {
                    Ok((_, m)) => pc.split = m,
                    Err(f) => pc.faults.push(f),
                }
            }
            Some(pc)
        })
        .collect();

    let mut report = CoherenceReport {
        label: COHERENCE_LABEL.to_string(),
        max_size,
        derivable_pairs: 0,
        pairs_with_multiple_coercions: 0,
        observations_compared: 0,
        mismatches: Vec::new(),
        faults: Vec::new(),
        distinguishing_probe_splits: 0,
        distinguishing_probe_examples: Vec::new(),
    };
    for pc in results.into_iter().flatten() {
        report.derivable_pairs += 1;
        if pc.multiple {
            report.pairs_with_multiple_coercions += 1;
        }
        report.observations_compared += pc.compared;
        report.mismatches.extend(pc.mismatches);
        report.faults.extend(pc.faults);
        if let Some(m) = pc.split {
            report.distinguishing_probe_splits += 1;
            if report.distinguishing_probe_examples.len() < 5 {
                report.distinguishing_probe_examples.push(m);
            }
        }
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusOutcome {
    Pass,
    /// The file failed with the error its pragma announced.
    ExpectedFailure,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusEntry {
    pub file: String,
    pub outcome: CorpusOutcome,
    #[serde(rename = "type")]
    pub ty: Option<String>,
    pub value: Option<String>,
    pub error: Option<String>,
    /// Why a failing entry failed.
    pub detail: Option<String>,
    /// The failure is an internal fault rather than a wrong answer.
    pub fault: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusReport {
    pub files: Vec<CorpusEntry>,
    pub passed: usize,
    pub failed: usize,
}

impl CorpusReport {
    pub fn render(&self) -> String {
        let mut s = String::new();
        for e in &self.files {
            let status = match e.outcome {
                CorpusOutcome::Pass => "ok",
                CorpusOutcome::ExpectedFailure => "ok (expected error)",
                CorpusOutcome::Fail => "FAIL",
            };
            let _ = write!(s, "{status:<20} {}", e.file);
            match (&e.value, &e.ty, &e.error) {
                (Some(v), Some(t), _) => {
                    let _ = write!(s, "  {v} : {t}");
                }
                (_, _, Some(err)) => {
                    let _ = write!(s, "  {err}");
                }
                _ => {}
            }
            if let Some(d) = &e.detail {
                let _ = write!(s, "  [{d}]");
            }
            s.push('\n');
        }
        let _ = writeln!(s, "{} passed, {} failed", self.passed, self.failed);
        s
    }
}

/// Successful result of checking and running one program.
#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub ty: Type,
    pub term: Term,
    pub value: Value,
}

/// Why a program did not run to a value.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExecError {
    #[error("parse error: {0}")]
    Parse(#[from] crate::parser::ParseError),
    #[error("{}: {0}", .0.kind.name())]
    Type(#[from] crate::typing::TypeError),
    #[error("elaboration has type {found} instead of {expected}")]
    Preservation { expected: String, found: String },
    #[error("runtime fault: {0}")]
    Runtime(#[from] RuntimeFault),
    #[error("value {value} does not have type {ty}")]
    Shape { value: String, ty: String },
}

impl ExecError {
    pub fn is_fault(&self) -> bool {
        match self {
            ExecError::Parse(_) => false,
            ExecError::Type(e) => e.is_fault(),
            _ => true,
        }
    }
}

/// Parses, elaborates, type-checks the elaboration and evaluates it.
pub fn execute(source: &str) -> Result<(crate::parser::Program, Execution), ExecError> {
    let program = parse_program(source)?;
    let (ty, term) = elaborate_program(&program)?;
    let erased = erase_type(&ty);
    match typecheck(&[], &term) {
        Ok(t) if t == erased => {}
        other => {
            return Err(ExecError::Preservation {
                expected: erased.to_string(),
                found: match other {
                    Ok(t) => t.to_string(),
                    Err(e) => e.to_string(),
                },
            })
        }
    }
    let value = eval(&term)?;
    if !value.matches(&erased) {
        return Err(ExecError::Shape {
            value: value.to_string(),
            ty: erased.to_string(),
        });
    }
    Ok((program, Execution { ty, term, value }))
}

fn run_file(path: &Path) -> CorpusEntry {
    let file = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut entry = CorpusEntry {
        file,
        outcome: CorpusOutcome::Fail,
        ty: None,
        value: None,
        error: None,
        detail: None,
        fault: false,
    };
    let source = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => {
            entry.detail = Some(format!("cannot read: {e}"));
            entry.fault = true;
            return entry;
        }
    };
    let expected_error = parse_program(&source)
        .ok()
        .and_then(|p| p.expected_error.clone());
    match execute(&source) {
        Ok((program, run)) => {
            let value = run.value.to_string();
            entry.ty = Some(run.ty.to_string());
            entry.value = Some(value.clone());
            if let Some(err) = &program.expected_error {
                entry.detail = Some(format!("expected error {err}"));
            } else if program.expected_value.as_ref().is_some_and(|v| *v != value) {
                entry.detail = Some(format!(
                    "expected result {}",
                    program.expected_value.unwrap_or_default()
                ));
            } else {
                entry.outcome = CorpusOutcome::Pass;
            }
        }
        Err(e) => {
            let name = match &e {
                ExecError::Type(t) => t.kind.name(),
                ExecError::Parse(_) => "ParseError",
                _ => "Fault",
            };
            entry.error = Some(e.to_string());
            entry.fault = e.is_fault();
            if !entry.fault && expected_error.as_deref() == Some(name) {
                entry.outcome = CorpusOutcome::ExpectedFailure;
            } else if let Some(err) = expected_error {
                entry.detail = Some(format!("expected error {err}"));
            }
        }
    }
    entry
}

/// Runs every `.lim` file in `dir`, in file-name order.
pub fn run_corpus(dir: &Path) -> std::io::Result<CorpusReport> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "lim"))
        .collect();
    paths.sort();
    let files: Vec<CorpusEntry> = paths.par_iter().map(|p| run_file(p)).collect();
    let passed = files
        .iter()
        .filter(|e| e.outcome != CorpusOutcome::Fail)
        .count();
    Ok(CorpusReport {
        failed: files.len() - passed,
        passed,
        files,
    })
}
