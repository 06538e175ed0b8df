//! The `thincoalg` command line.
//!
//! Exit codes: 0 success or a positive verdict, 1 a negative verdict,
//! 2 usage errors, 3 invalid input, 4 an exceeded budget.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::algebra::{validate_algebra, RationalCoherentAlgebra};
use crate::automaton::{
    accepts, ambiguity_probe, enumerate_accepting_preruns_budgeted, trim_unproductive, Acceptance, AmbiguityVerdict,
    FAutomaton, DEFAULT_SEARCH_BUDGET,
};
use crate::coalgebra::PointedCoalgebra;
use crate::constructions::{algebraic_automaton, automaton_algebra, disambiguate, Budget};
use crate::dot::export_dot;
use crate::error::Error;
use crate::io::{load, to_json, Document, RunDocument};

pub const EXIT_TRUE: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INVALID: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "thincoalg", version, about = "Automata on thin coalgebras")]
struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    /// Cap on every generated structure (pipeline states, search steps).
    #[arg(long, global = true, value_name = "N")]
    budget: Option<usize>,
    /// Write the produced document or drawing here instead of stdout.
    #[arg(short = 'o', long = "output", global = true, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Seed for randomised checks.
    #[arg(long, global = true, default_value_t = 0x5eed)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Is every state on at most one cycle?
    CheckThin { coalgebra: PathBuf },
    /// Does the automaton accept the (thin) coalgebra?
    Accepts { automaton: PathBuf, coalgebra: PathBuf },
    /// Tabulate the power-set algebra of a parity automaton.
    BuildAlgebra { automaton: PathBuf },
    /// The automaton whose runs are markings of an algebra.
    BuildAutomaton {
        algebra: PathBuf,
        /// Drop states that cannot occur in an accepting run.
        #[arg(long)]
        trim: bool,
    },
    /// An equivalent automaton with at most one run per thin coalgebra.
    Disambiguate { automaton: PathBuf },
    /// Accepting runs with at most N nodes, minimised.
    EnumerateRuns {
        automaton: PathBuf,
        coalgebra: PathBuf,
        #[arg(long)]
        bound: usize,
    },
    /// Look for two different accepting runs with at most N nodes.
    ProbeAmbiguity {
        automaton: PathBuf,
        coalgebra: PathBuf,
        #[arg(long)]
        bound: usize,
    },
    /// Load a document and check its invariants.
    Validate {
        document: PathBuf,
        /// Random lassos for the coherence spot check on algebras.
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Graphviz rendering of a coalgebra, automaton or run.
    ExportDot { document: PathBuf },
}

/// What a command produced: text for stdout (or `-o`), an optional note for
/// stderr, and the exit code.
struct Outcome {
    text: String,
    note: Option<String>,
    code: i32,
}

impl Outcome {
    fn verdict(text: String, holds: bool) -> Self {
        Outcome { text, note: None, code: if holds { EXIT_TRUE } else { EXIT_FALSE } }
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Budget { .. } => EXIT_BUDGET,
        Error::Io(_) => EXIT_USAGE,
        _ => EXIT_INVALID,
    }
}

fn load_kind<T>(path: &PathBuf, kind: &str, pick: impl FnOnce(Document) -> Option<T>) -> Result<T, Error> {
    let doc = load(path)?;
    let got = doc.kind();
    pick(doc).ok_or_else(|| Error::Invalid(format!("{}: expected a {kind} document, got {got}", path.display())))
}

fn coalgebra(path: &PathBuf) -> Result<PointedCoalgebra, Error> {
    load_kind(path, "coalgebra", |d| match d {
        Document::Coalgebra(c) => Some(c),
        _ => None,
    })
}

fn automaton(path: &PathBuf) -> Result<FAutomaton, Error> {
    load_kind(path, "automaton", |d| match d {
        Document::Automaton(a) => Some(a),
        _ => None,
    })
}

fn algebra(path: &PathBuf) -> Result<Arc<RationalCoherentAlgebra>, Error> {
    load_kind(path, "algebra", |d| match d {
        Document::Algebra(a) => Some(a),
        _ => None,
    })
}

fn bool_text(json: bool, key: &str, value: bool) -> String {
    if json {
        format!("{}\n", json!({ key: value }))
    } else {
        format!("{value}\n")
    }
}

fn execute(cli: &Cli) -> Result<Outcome, Error> {
    let budget = cli.budget.map_or_else(Budget::default, Budget::with_cap);
    let search_budget = cli.budget.unwrap_or(DEFAULT_SEARCH_BUDGET);
    match &cli.command {
        Command::CheckThin { coalgebra: path } => {
            let c = coalgebra(path)?;
            let thin = c.is_thin();
            let text = if cli.json {
                let reachable = c.reachable_mask().iter().filter(|&&b| b).count();
                format!("{}\n", json!({ "thin": thin, "states": c.len(), "reachable": reachable }))
            } else {
                format!("{thin}\n")
            };
            Ok(Outcome::verdict(text, thin))
        }
        Command::Accepts { automaton: a, coalgebra: c } => {
            let (a, c) = (automaton(a)?, coalgebra(c)?);
            let yes = accepts(&a, &c)?;
            Ok(Outcome::verdict(bool_text(cli.json, "accepts", yes), yes))
        }
        Command::BuildAlgebra { automaton: a } => {
            let alg = automaton_algebra(&automaton(a)?, &budget)?;
            let note = format!(
                "carrier {} elements, {} contexts, semigroup {} + {}",
                alg.len(),
                alg.contexts().len(),
                alg.rational().wilke().n_finite(),
                alg.rational().wilke().n_infinite()
            );
            Ok(Outcome { text: to_json(&Document::Algebra(Arc::new(alg))), note: Some(note), code: EXIT_TRUE })
        }
        Command::BuildAutomaton { algebra: path, trim } => {
            let mut b = algebraic_automaton(algebra(path)?)?;
            let full = b.len();
            if *trim {
                b = trim_unproductive(&b);
            }
            let note = format!("{} states ({full} before trimming)", b.len());
            Ok(Outcome { text: to_json(&Document::Automaton(b)), note: Some(note), code: EXIT_TRUE })
        }
        Command::Disambiguate { automaton: a } => {
            let (d, report) = disambiguate(&automaton(a)?, &budget)?;
            let note = if cli.json {
                serde_json::to_string(&report).expect("report serialises")
            } else {
                format!("{} -> {} states", report.input_states, report.output_states)
            };
            Ok(Outcome { text: to_json(&Document::Automaton(d)), note: Some(note), code: EXIT_TRUE })
        }
        Command::EnumerateRuns { automaton: a, coalgebra: c, bound } => {
            let (a, c) = (automaton(a)?, coalgebra(c)?);
            let e = enumerate_accepting_preruns_budgeted(&a, &c, *bound, search_budget)?;
            let text = if cli.json {
                let runs: Vec<serde_json::Value> = e
                    .runs
                    .iter()
                    .map(|r| {
                        serde_json::from_str(&to_json(&Document::Run(RunDocument::from_prerun(r, &c, &a))))
                            .expect("json")
                    })
                    .collect();
                format!("{}\n", json!({ "runs": runs, "complete": e.complete, "explored": e.explored }))
            } else {
                let mut t = format!("{} run(s){}\n", e.runs.len(), if e.complete { "" } else { ", search incomplete" });
                for (i, r) in e.runs.iter().enumerate() {
                    t.push_str(&format!("run {}:\n{}", i + 1, r.describe(&c, &a)));
                }
                t
            };
            if !e.complete {
                return Ok(Outcome { text, note: Some("search budget exhausted".into()), code: EXIT_BUDGET });
            }
            let found = !e.runs.is_empty();
            Ok(Outcome::verdict(text, found))
        }
        Command::ProbeAmbiguity { automaton: a, coalgebra: c, bound } => {
            let (a, c) = (automaton(a)?, coalgebra(c)?);
            let v = ambiguity_probe(&a, &c, *bound)?;
            let runs: Vec<_> = match &v {
                AmbiguityVerdict::Ambiguous(r1, r2) => vec![r1.as_ref(), r2.as_ref()],
                AmbiguityVerdict::UnambiguousUpToBound { run, .. } => vec![run],
                _ => Vec::new(),
            };
            let text = if cli.json {
                let runs: Vec<serde_json::Value> = runs
                    .iter()
                    .map(|r| {
                        serde_json::from_str(&to_json(&Document::Run(RunDocument::from_prerun(r, &c, &a))))
                            .expect("json")
                    })
                    .collect();
                format!("{}\n", json!({ "verdict": v.name(), "bound": bound, "runs": runs }))
            } else {
                let mut t = format!("{v}\n");
                for (i, r) in runs.iter().enumerate() {
                    t.push_str(&format!("run {}:\n{}", i + 1, r.describe(&c, &a)));
                }
                t
            };
            let code = match v {
                AmbiguityVerdict::Ambiguous(..) | AmbiguityVerdict::UnambiguousUpToBound { .. } => EXIT_TRUE,
                AmbiguityVerdict::NoAcceptingRun => EXIT_FALSE,
                AmbiguityVerdict::BoundTooSmall { .. } => EXIT_BUDGET,
            };
            Ok(Outcome { text, note: None, code })
        }
        Command::Validate { document, samples } => {
            let doc = load(document)?;
            let problems = match &doc {
                Document::Algebra(alg) => algebra_problems(alg, *samples, cli.seed),
                Document::Automaton(a) => match a.acceptance() {
                    Acceptance::AlgebraSymbolic(s) => algebra_problems(s.algebra(), *samples, cli.seed),
                    _ => Vec::new(),
                },
                _ => Vec::new(),
            };
            let ok = problems.is_empty();
            let text = if cli.json {
                format!("{}\n", json!({ "kind": doc.kind(), "valid": ok, "problems": problems }))
            } else if ok {
                format!("valid {}\n", doc.kind())
            } else {
                problems.iter().map(|p| format!("{p}\n")).collect()
            };
            Ok(Outcome { text, note: None, code: if ok { EXIT_TRUE } else { EXIT_INVALID } })
        }
        Command::ExportDot { document } => {
            let text = export_dot(&load(document)?)?;
            Ok(Outcome { text, note: None, code: EXIT_TRUE })
        }
    }
}

/// Exhaustive axiom and coherence check, plus a seeded spot check that
/// `γ₁` unfolds through `γ₀` on random context lassos.
fn algebra_problems(alg: &RationalCoherentAlgebra, samples: usize, seed: u64) -> Vec<String> {
    let mut out: Vec<String> = validate_algebra(alg).iter().take(20).map(|v| format!("{v:?}")).collect();
    let nk = alg.contexts().len();
    if nk == 0 {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let stem: Vec<usize> = (0..rng.gen_range(1..4)).map(|_| rng.gen_range(0..nk)).collect();
        let cycle: Vec<usize> = (0..rng.gen_range(1..5)).map(|_| rng.gen_range(0..nk)).collect();
        let whole = alg.gamma1_lasso(&stem, &cycle);
        let tail = alg.gamma1_lasso(&stem[1..], &cycle);
        let head = alg.sig().plug(&alg.contexts()[stem[0]], tail);
        if alg.gamma0(&head) != whole {
            out.push(format!("γ₁ does not unfold on stem {stem:?}, loop {cycle:?}"));
            break;
        }
    }
    out
}

/// Runs the command line on `args` (including the program name).
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_TRUE };
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            if let Some(note) = &outcome.note {
                let _ = writeln!(stderr, "{note}");
            }
            match &cli.output {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &outcome.text) {
                        let _ = writeln!(stderr, "error: {}: {e}", path.display());
                        return EXIT_USAGE;
                    }
                }
                None => {
                    let _ = stdout.write_all(outcome.text.as_bytes());
                }
            }
            outcome.code
        }
        Err(e) => {
            if cli.json {
                let _ = writeln!(stdout, "{}", json!({ "error": e.to_string(), "exit": exit_code(&e) }));
            }
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
