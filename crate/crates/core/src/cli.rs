//! Command-line driver. Each subcommand is a thin wrapper over one library
//! operation; [`run_cli`] returns the exit code and the text for both
//! streams so the binary and the tests share one code path.
//!
//! Exit codes: 0 success or positive answer, 1 negative answer or an error
//! in the user's program, 2 internal fault or failed suite, 64 usage error.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value as Json};

use crate::disjoint::{alg_disjoint, DisjointVerdict};
use crate::harness::{coherence_scan, compare_subtyping, execute, run_corpus, ExecError};
use crate::oracle::SearchBudget;
use crate::parser::{parse_type, ParseError};
use crate::subtype::{alg_subtype_run, SubtypeError, TraceStep};
use crate::typing::TypeErrorKind;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_FAULT: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "limp",
    version,
    about = "Intersection subtyping with modus ponens"
)]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct BudgetArgs {
    /// Maximum declarative derivation height.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..))]
    pub fuel: u32,
    /// Size bound of the oracle's type universe.
    #[arg(long, default_value_t = 4, value_parser = positive)]
    pub universe_size: usize,
    /// Coercions sampled per derivable pair.
    #[arg(long, default_value_t = 8, value_parser = positive)]
    pub max_coercions: usize,
    /// Largest type size enumerated.
    #[arg(long, default_value_t = 4, value_parser = positive)]
    pub max_size: usize,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("expected a positive integer, got {s:?}")),
    }
}

impl BudgetArgs {
    fn budget(&self) -> SearchBudget {
        SearchBudget::new(self.fuel, self.universe_size, self.max_coercions)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Type-check a program and show its elaboration.
    Check { file: PathBuf },
    /// Type-check and evaluate a program.
    Run { file: PathBuf },
    /// Decide A <: B and print the coercion.
    Sub {
        left: String,
        right: String,
        /// Print the derivation trace.
        #[arg(long)]
        trace: bool,
    },
    /// Decide whether two types are disjoint.
    Disjoint { left: String, right: String },
    /// Compare the algorithm with the declarative oracle on all small pairs.
    Compare(BudgetArgs),
    /// Check that different coercions for one subtyping fact agree.
    Coherence(BudgetArgs),
    /// Run every .lim file in a directory.
    Corpus { dir: PathBuf },
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Style {
    color: bool,
}

impl Style {
    fn from_env() -> Style {
        Style {
            color: std::env::var("LIMP_COLOR").is_ok_and(|v| v == "1"),
        }
    }

    fn good(&self, s: &str) -> String {
        self.paint("32", s)
    }

    fn bad(&self, s: &str) -> String {
        self.paint("31", s)
    }

    fn paint(&self, code: &str, s: &str) -> String {
        if self.color {
            format!("\x1b[{code}m{s}\x1b[0m")
        } else {
            s.to_string()
        }
    }
}

struct Out {
    code: i32,
    text: String,
    err: String,
    json: Json,
}

impl Out {
    fn new(code: i32, text: String, json: Json) -> Out {
        Out {
            code,
            text,
            err: String::new(),
            json,
        }
    }

    fn with_err(mut self, err: String) -> Out {
        self.err = err;
        self
    }
}

fn usage(message: String) -> Out {
    Out {
        code: EXIT_USAGE,
        text: String::new(),
        err: message,
        json: Json::Null,
    }
}

fn parse_arg_type(s: &str) -> Result<crate::Type, Out> {
    parse_type(s).map_err(|e| usage(format!("invalid type {s:?}: {e}\n")))
}

fn trace_json(steps: &[TraceStep]) -> Json {
    Json::Array(
        steps
            .iter()
            .map(|s| {
                json!({
                    "rule": s.rule.name(),
                    "kind": s.state.kind,
                    "context": s.state.context.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
                    "left": s.state.left.to_string(),
                    "right": s.state.right.to_string(),
                    "queue": s.state.queue.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
                    "depth": s.state.depth,
                    "measure": s.measure.0.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                })
            })
            .collect(),
    )
}

fn cmd_sub(left: &str, right: &str, trace: bool, style: &Style) -> Out {
    let (a, b) = match (parse_arg_type(left), parse_arg_type(right)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return e,
    };
    let inputs = json!([a.to_string(), b.to_string()]);
    let run = alg_subtype_run(&a, &b);
    match run.result {
        Ok(c) => {
            let mut text = format!("{} {a} <: {b}\ncoercion: {c}\n", style.good("subtype:"));
            let mut j = json!({
                "command": "sub",
                "inputs": inputs,
                "verdict": "subtype",
                "coercion": c.to_string(),
            });
            if trace {
                text.push_str("trace:\n");
                for step in &run.trace {
                    text.push_str(&format!("  {}\n", step.line()));
                }
                j["trace"] = trace_json(&run.trace);
            }
            Out::new(EXIT_OK, text, j)
        }
        Err(SubtypeError::NotSubtype { failing, .. }) => {
            let text = format!(
                "{} {a} </: {b}\nstuck at: {} <: {}\n",
                style.bad("not a subtype:"),
                failing.left,
                failing.right
            );
            Out::new(
                EXIT_NEGATIVE,
                text,
                json!({"command": "sub", "inputs": inputs, "verdict": "not-subtype"}),
            )
        }
        Err(fault) => Out::new(
            EXIT_FAULT,
            String::new(),
            json!({"command": "sub", "inputs": inputs, "verdict": "fault", "report": fault.to_string()}),
        )
        .with_err(format!("{fault}\n")),
    }
}

fn cmd_disjoint(left: &str, right: &str, style: &Style) -> Out {
    let (a, b) = match (parse_arg_type(left), parse_arg_type(right)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return e,
    };
    let inputs = json!([a.to_string(), b.to_string()]);
    match alg_disjoint(&a, &b) {
        DisjointVerdict::Disjoint => Out::new(
            EXIT_OK,
            format!("{} {a} * {b}\n", style.good("disjoint:")),
            json!({"command": "disjoint", "inputs": inputs, "verdict": "disjoint"}),
        ),
        DisjointVerdict::NotDisjoint { witness } => Out::new(
            EXIT_NEGATIVE,
            format!(
                "{} {a} and {b} are both subtypes of {witness}\n",
                style.bad("not disjoint:")
            ),
            json!({
                "command": "disjoint",
                "inputs": inputs,
                "verdict": "not-disjoint",
                "report": {"witness": witness.to_string()},
            }),
        ),
    }
}

fn describe_exec_error(e: &ExecError) -> String {
    match e {
        ExecError::Type(t) => {
            let at = t
                .span
                .map(|s| {
                    format!(
                        "{}:{}-{}:{}: ",
                        s.start.line, s.start.column, s.end.line, s.end.column
                    )
                })
                .unwrap_or_default();
            format!(
                "{at}{}: {} (failed premise: {})",
                t.kind.name(),
                t.kind,
                t.kind.premise()
            )
        }
        ExecError::Parse(ParseError::Syntax { expected, .. }) if !expected.is_empty() => {
            format!("{e}; expected {}", expected.join(" or "))
        }
        _ => e.to_string(),
    }
}

fn cmd_program(file: &PathBuf, run: bool, style: &Style) -> Out {
    let command = if run { "run" } else { "check" };
    let inputs = json!([file.display().to_string()]);
    let source = match std::fs::read_to_string(file) {
        Ok(s) => s,
        Err(e) => {
            return Out::new(
                EXIT_FAULT,
                String::new(),
                json!({"command": command, "inputs": inputs, "verdict": "fault", "report": e.to_string()}),
            )
            .with_err(format!("cannot read {}: {e}\n", file.display()))
        }
    };
    match execute(&source) {
        Ok((program, exec)) => {
            let value = exec.value.to_string();
            let mut j = json!({
                "command": command,
                "inputs": inputs,
                "verdict": "well-typed",
                "report": {"type": exec.ty.to_string(), "elaboration": exec.term.to_string()},
            });
            if run {
                j["report"]["value"] = json!(value);
                if let Some(expected) = program.expected_value.filter(|v| *v != value) {
                    j["verdict"] = json!("unexpected-result");
                    return Out::new(EXIT_NEGATIVE, format!("{value} : {}\n", exec.ty), j)
                        .with_err(format!("expected result {expected}, got {value}\n"));
                }
                Out::new(EXIT_OK, format!("{value} : {}\n", exec.ty), j)
            } else {
                let text = format!(
                    "{} {}\nelaborates to: {}\n",
                    style.good("well-typed:"),
                    exec.ty,
                    exec.term
                );
                Out::new(EXIT_OK, text, j)
            }
        }
        Err(e) => {
            let code = if e.is_fault() {
                EXIT_FAULT
            } else {
                EXIT_NEGATIVE
            };
            let kind = match &e {
                ExecError::Type(t) => t.kind.name(),
                ExecError::Parse(_) => "ParseError",
                _ => "Fault",
            };
            let verdict = if e.is_fault() { "fault" } else { "error" };
            let message = describe_exec_error(&e);
            let mut report = json!({"error": kind, "message": message});
            if let ExecError::Type(t) = &e {
                if let Some(s) = t.span {
                    report["span"] = json!({
                        "start": [s.start.line, s.start.column],
                        "end": [s.end.line, s.end.column],
                    });
                }
                if let TypeErrorKind::Fault(_) = *t.kind {
                    report["fault"] = json!(true);
                }
            }
            Out::new(
                code,
                String::new(),
                json!({"command": command, "inputs": inputs, "verdict": verdict, "report": report}),
            )
            .with_err(format!(
                "{}: {} {message}\n",
                file.display(),
                style.bad("error:")
            ))
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Json {
    serde_json::to_value(v).expect("reports serialize")
}

fn suite_inputs(b: &BudgetArgs) -> Json {
    json!({
        "fuel": b.fuel,
        "max_coercions": b.max_coercions,
        "max_size": b.max_size,
        "universe_size": b.universe_size,
    })
}

fn dispatch(cfg: &CliConfig, style: &Style) -> Out {
    match &cfg.command {
        Command::Check { file } => cmd_program(file, false, style),
        Command::Run { file } => cmd_program(file, true, style),
        Command::Sub { left, right, trace } => cmd_sub(left, right, *trace, style),
        Command::Disjoint { left, right } => cmd_disjoint(left, right, style),
        Command::Compare(b) => {
            let r = compare_subtyping(b.max_size, &b.budget());
            let ok = r.passed();
            Out::new(
                if ok { EXIT_OK } else { EXIT_FAULT },
                r.render(),
                json!({
                    "command": "compare",
                    "inputs": suite_inputs(b),
                    "verdict": if ok { "pass" } else { "fail" },
                    "report": to_json(&r),
                }),
            )
        }
        Command::Coherence(b) => {
            let r = coherence_scan(b.max_size, &b.budget());
            let ok = r.passed();
            Out::new(
                if ok { EXIT_OK } else { EXIT_FAULT },
                r.render(),
                json!({
                    "command": "coherence",
                    "inputs": suite_inputs(b),
                    "verdict": if ok { "pass" } else { "fail" },
                    "report": to_json(&r),
                }),
            )
        }
        Command::Corpus { dir } => {
            let inputs = json!([dir.display().to_string()]);
            match run_corpus(dir) {
                Ok(r) => {
                    let ok = r.failed == 0;
                    Out::new(
                        if ok { EXIT_OK } else { EXIT_FAULT },
                        r.render(),
                        json!({
                            "command": "corpus",
                            "inputs": inputs,
                            "verdict": if ok { "pass" } else { "fail" },
                            "report": to_json(&r),
                        }),
                    )
                }
                Err(e) => Out::new(
                    EXIT_FAULT,
                    String::new(),
                    json!({"command": "corpus", "inputs": inputs, "verdict": "fault", "report": e.to_string()}),
                )
                .with_err(format!("cannot read {}: {e}\n", dir.display())),
            }
        }
    }
}

/// Runs the driver on `args` (program name first).
pub fn run_cli<I, S>(args: I) -> CliOutput
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cfg = match CliConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    CliOutput {
                        code: EXIT_OK,
                        stdout: text,
                        stderr: String::new(),
                    }
                }
                _ => CliOutput {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    let style = Style {
        color: !cfg.json && Style::from_env().color,
    };
    let out = dispatch(&cfg, &style);
    let stdout = if cfg.json && out.code != EXIT_USAGE {
        let mut s = serde_json::to_string_pretty(&out.json).expect("json");
        s.push('\n');
        s
    } else {
        out.text
    };
    CliOutput {
        code: out.code,
        stdout,
        stderr: out.err,
    }
}
