//! `fcdl`: classify FC-Datalog programs, evaluate words, compile regexes and
//! automata, generate space-bounded acceptance instances and run a corpus
//! of cross-checks.

mod commands;
mod corpus;
mod eval;

use std::fmt;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use fcdl::eval::Budget;
use fcdl::Error;

#[derive(Parser)]
#[command(name = "fcdl", version, about = "Datalog over the factors of a word")]
struct Cli {
    /// Print a JSON report on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a program into fragments and report the recommended tier.
    Check {
        program: PathBuf,
    },
    /// Evaluate a program on words (`@file` reads one word per line).
    Eval {
        program: PathBuf,
        /// Words; pass "" for the empty word.
        #[arg(required = true)]
        words: Vec<String>,
        #[arg(long, value_enum, default_value_t = TierArg::Auto)]
        tier: TierArg,
        /// Include the rule applications of the top-down evaluators.
        #[arg(long)]
        trace: bool,
        /// Cross-check every verdict against the fixpoint evaluator.
        #[arg(long)]
        verify: bool,
        /// Repeat each evaluation N times and report the median wall time.
        #[arg(long, value_name = "N")]
        bench: Option<usize>,
    },
    /// Compile a deterministic regex or a multi-head automaton.
    Compile {
        #[arg(long, value_name = "REGEX", conflicts_with = "automaton", required_unless_present = "automaton")]
        drx: Option<String>,
        #[arg(long, value_name = "JSON")]
        automaton: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = TargetArg::Dolla)]
        target: TargetArg,
        /// Write the program here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a program and word deciding space-bounded acceptance of a
    /// Turing machine on the empty input.
    GenPspace {
        machine: PathBuf,
        /// Number of tape cells.
        #[arg(short, long)]
        k: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Cross-check every evaluator on every program, regex and automaton of
    /// a corpus directory.
    Corpus {
        #[arg(long, default_value = "corpus")]
        dir: PathBuf,
        #[arg(long, default_value_t = 8)]
        max_len: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TierArg {
    Auto,
    Fixpoint,
    Memo,
    Det,
    Sd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    Dolla,
    Dollaplus,
    Linear,
}

/// Why a command failed; each kind has its own exit code.
#[derive(Debug)]
pub enum Failure {
    /// Library error (parse, validation, precondition, budget, ...).
    Lib(Error),
    /// Unreadable or unwritable file.
    Io(String),
    /// Evaluators disagree, or a sample word has the wrong verdict.
    Disagreement(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Io(_) => 2,
            Failure::Lib(e) => match e {
                Error::Parse { .. } | Error::Validation { .. } | Error::Input(_) => 2,
                Error::Precondition(_) => 3,
                Error::Internal(_) => 4,
                Error::Budget(_) => 5,
            },
            Failure::Disagreement(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Io(_) => "io",
            Failure::Lib(Error::Parse { .. }) => "parse",
            Failure::Lib(Error::Validation { .. }) => "validation",
            Failure::Lib(Error::Input(_)) => "input",
            Failure::Lib(Error::Precondition(_)) => "precondition",
            Failure::Lib(Error::Internal(_)) => "internal",
            Failure::Lib(Error::Budget(_)) => "budget",
            Failure::Disagreement(_) => "disagreement",
        }
    }

    fn to_json(&self) -> Value {
        let span = match self {
            Failure::Lib(e) => e.span().map(|s| json!({"start": s.start, "end": s.end, "line": s.line, "column": s.column})),
            _ => None,
        };
        json!({ "kind": self.kind(), "exitCode": self.exit_code(), "message": self.to_string(), "span": span })
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Io(m) | Failure::Disagreement(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

pub type CmdResult = Result<Output, Failure>;

/// What a successful command prints: a JSON report and a human rendering.
pub struct Output {
    pub report: Value,
    pub text: String,
    /// A command can complete its report and still fail (corpus mismatches).
    pub failure: Option<Failure>,
}

impl Output {
    pub fn ok(report: Value, text: String) -> Self {
        Output { report, text, failure: None }
    }
}

pub fn read_file(path: &std::path::Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))
}

pub fn write_file(path: &std::path::Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

/// Resource limits from `FCDL_BUDGET` (see `Budget::parse`).
fn budget() -> Result<Budget, Failure> {
    match std::env::var("FCDL_BUDGET") {
        Ok(s) => Ok(Budget::parse(&s)?),
        Err(_) => Ok(Budget::default()),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Check { .. } => "check",
        Command::Eval { .. } => "eval",
        Command::Compile { .. } => "compile",
        Command::GenPspace { .. } => "gen-pspace",
        Command::Corpus { .. } => "corpus",
    }
}

fn run(cli: &Cli) -> CmdResult {
    let budget = budget()?;
    match &cli.command {
        Command::Check { program } => commands::check(program),
        Command::Eval { program, words, tier, trace, verify, bench } => {
            eval::eval(program, words, eval::EvalArgs { tier: *tier, trace: *trace, verify: *verify, bench: *bench, budget })
        }
        Command::Compile { drx, automaton, target, output } => {
            commands::compile(drx.as_deref(), automaton.as_deref(), *target, output.as_deref())
        }
        Command::GenPspace { machine, k, output } => commands::gen_pspace(machine, *k, output.as_deref()),
        Command::Corpus { dir, max_len } => corpus::corpus(dir, *max_len, budget),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = command_name(&cli.command);
    let result = run(&cli);
    let (report, failure) = match result {
        Ok(out) => {
            if !cli.json && !out.text.is_empty() {
                let _ = std::io::stdout().write_all(out.text.as_bytes());
            }
            (Some(out.report), out.failure)
        }
        Err(f) => (None, Some(f)),
    };
    if cli.json {
        let mut v = report.unwrap_or_else(|| json!({}));
        v["command"] = json!(name);
        if let Some(f) = &failure {
            v["error"] = f.to_json();
        }
        let text = serde_json::to_string_pretty(&v).expect("report serializes");
        let _ = writeln!(std::io::stdout(), "{text}");
    }
    match failure {
        None => ExitCode::SUCCESS,
        Some(f) => {
            eprintln!("fcdl {name}: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
