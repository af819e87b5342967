//! `eval`: verdicts, traces, cross-checks and benchmarks.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use fcdl::eval::{evaluate_with, eval_memoized, Budget, ChainEvaluator, EvalTrace, FixpointOptions, TopDownOptions, Verdict};
use fcdl::{classify, parse_program, Error, Program, Tier};

use crate::{read_file, CmdResult, Failure, Output, TierArg};

pub struct EvalArgs {
    pub tier: TierArg,
    pub trace: bool,
    pub verify: bool,
    pub bench: Option<usize>,
    pub budget: Budget,
}

/// Expands `@file` arguments into one word per line.
fn expand_words(args: &[String]) -> Result<Vec<String>, Failure> {
    let mut words = Vec::new();
    for a in args {
        match a.strip_prefix('@') {
            Some(path) => {
                let text = read_file(Path::new(path))?;
                words.extend(text.lines().map(|l| l.trim_end_matches('\r').to_string()));
            }
            None => words.push(a.clone()),
        }
    }
    Ok(words)
}

enum Runner<'p> {
    Fixpoint,
    Memoized,
    Chain(Box<ChainEvaluator<'p>>),
}

struct Run {
    verdict: Verdict,
    tier: Tier,
    trace: Option<EvalTrace>,
    tuples: Option<usize>,
}

impl Runner<'_> {
    fn run(&self, p: &Program, w: &str, opts: TopDownOptions) -> Result<Run, Error> {
        match self {
            Runner::Fixpoint => {
                let store = evaluate_with(p, w, FixpointOptions { budget: opts.budget, semi_naive: true })?;
                Ok(Run { verdict: Verdict::from_bool(store.accepts(p)), tier: Tier::Fixpoint, trace: None, tuples: Some(store.len()) })
            }
            Runner::Memoized => {
                let out = eval_memoized(p, w, opts)?;
                Ok(Run { verdict: out.verdict, tier: out.tier, trace: Some(out.trace), tuples: None })
            }
            Runner::Chain(e) => {
                let out = e.eval(w, opts)?;
                Ok(Run { verdict: out.verdict, tier: out.tier, trace: Some(out.trace), tuples: None })
            }
        }
    }
}

fn show(w: &str) -> &str {
    if w.is_empty() {
        "ε"
    } else {
        w
    }
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort();
    v[v.len() / 2]
}

pub fn eval(path: &Path, word_args: &[String], args: EvalArgs) -> CmdResult {
    let start = Instant::now();
    let p = parse_program(&read_file(path)?)?;
    let report = classify(&p);
    let words = expand_words(word_args)?;
    let inputs = json!({ "program": path.display().to_string(), "words": words });
    if !p.is_boolean() {
        return eval_relations(&p, &words, &args, inputs, report.to_json(), start);
    }
    let tier = match args.tier {
        TierArg::Auto => report.tier,
        TierArg::Fixpoint => Tier::Fixpoint,
        TierArg::Memo => Tier::MemoizedTopdown,
        TierArg::Det => Tier::DeterministicTopdown,
        TierArg::Sd => Tier::SdFast,
    };
    let runner = match (args.tier, tier) {
        (_, Tier::Fixpoint) => Runner::Fixpoint,
        (_, Tier::MemoizedTopdown) => Runner::Memoized,
        (TierArg::Det, _) | (TierArg::Auto, Tier::DeterministicTopdown) => Runner::Chain(Box::new(ChainEvaluator::deterministic(&p)?)),
        _ => Runner::Chain(Box::new(ChainEvaluator::strictly_decreasing(&p)?)),
    };
    let opts = TopDownOptions { trace: args.trace, verify: true, budget: args.budget };
    let reps = args.bench.unwrap_or(1).max(1);
    let mut verdicts = Vec::new();
    let mut text = String::new();
    let mut total_apps = 0usize;
    for w in &words {
        let mut times = Vec::with_capacity(reps);
        let mut run = None;
        for _ in 0..reps {
            let t = Instant::now();
            run = Some(runner.run(&p, w, opts)?);
            times.push(t.elapsed());
        }
        let run = run.expect("at least one repetition");
        let wall = median(times);
        let apps = run.trace.as_ref().map(|t| t.rule_applications);
        total_apps += apps.unwrap_or(0);
        let mut v = json!({
            "word": w,
            "verdict": run.verdict,
            "tier": run.tier,
            "wallMs": wall.as_secs_f64() * 1e3,
        });
        let _ = write!(text, "{}\t{}", show(w), run.verdict);
        if run.tier != tier {
            let _ = write!(text, "\t({})", run.tier);
        }
        if let Some(t) = &run.trace {
            v["ruleApplications"] = json!(t.rule_applications);
            v["recursiveSteps"] = json!(t.recursive_steps);
            if let Some(why) = &t.fallback {
                v["fallback"] = json!(why);
            }
            if args.trace {
                v["trace"] = json!(t);
            }
        }
        if let Some(n) = run.tuples {
            v["tuples"] = json!(n);
        }
        if args.bench.is_some() {
            let _ = write!(text, "\tmedian {:.3} ms over {reps} runs", wall.as_secs_f64() * 1e3);
            if let Some(a) = apps {
                let _ = write!(text, ", {a} rule applications");
            }
        }
        text.push('\n');
        if args.trace {
            if let Some(t) = &run.trace {
                for s in &t.steps {
                    let binds: Vec<String> = s
                        .bindings
                        .iter()
                        .map(|(k, v)| format!("{k}={}", v.as_deref().map(show).unwrap_or("?")))
                        .collect();
                    let _ = writeln!(text, "  rule {} {}: {}", s.rule, s.head, binds.join(" "));
                }
            }
        }
        let mut failure = None;
        if args.verify {
            let fix = Runner::Fixpoint.run(&p, w, opts)?;
            v["verified"] = json!(fix.verdict == run.verdict);
            if fix.verdict != run.verdict {
                failure = Some(Failure::Disagreement(format!(
                    "on {:?}: {} says {}, fixpoint says {}",
                    w, run.tier, run.verdict, fix.verdict
                )));
            }
        }
        verdicts.push(v);
        if let Some(f) = failure {
            let out = json!({ "inputs": inputs, "report": report.to_json(), "tier": tier, "verdicts": verdicts });
            return Ok(Output { report: out, text, failure: Some(f) });
        }
    }
    let out = json!({
        "inputs": inputs,
        "report": report.to_json(),
        "tier": tier,
        "verdicts": verdicts,
        "timing": { "wallMs": start.elapsed().as_secs_f64() * 1e3, "ruleApplications": total_apps },
    });
    Ok(Output::ok(out, text))
}

/// Non-Boolean programs: print the `Ans` relation for every word.
fn eval_relations(p: &Program, words: &[String], args: &EvalArgs, inputs: Value, report: Value, start: Instant) -> CmdResult {
    if !matches!(args.tier, TierArg::Auto | TierArg::Fixpoint) {
        return Err(Error::Precondition("the top-down evaluators answer Boolean programs only; use --tier fixpoint".into()).into());
    }
    let ans = p.rel_name(p.ans()).to_string();
    let mut answers = Vec::new();
    let mut text = String::new();
    for w in words {
        let store = evaluate_with(p, w, FixpointOptions { budget: args.budget, semi_naive: true })?;
        let mut tuples = store.relation(&ans).unwrap_or_default();
        tuples.sort();
        let _ = writeln!(text, "{}", show(w));
        for t in &tuples {
            let shown: Vec<&str> = t.iter().map(|s| show(s)).collect();
            let _ = writeln!(text, "  {ans}({})", shown.join(", "));
        }
        answers.push(json!({ "word": w, "answers": tuples }));
    }
    let out = json!({
        "inputs": inputs,
        "report": report,
        "tier": Tier::Fixpoint,
        "answers": answers,
        "timing": { "wallMs": start.elapsed().as_secs_f64() * 1e3 },
    });
    Ok(Output::ok(out, text))
}
