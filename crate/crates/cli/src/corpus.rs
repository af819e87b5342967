//! `corpus`: exhaustive cross-checks over a directory of programs
//! (`*.fcd`), regexes (`regexes.txt`) and automata (`*.json`, except
//! Turing machines `*.tm.json`).

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};

use fcdl::compilers::{compile_2dfa, compile_2nfa, compile_drx, drx_match_bruteforce, ConstraintMatcher, DrxTarget};
use fcdl::eval::{model_check_with, Budget, CrossChecker, FixpointOptions, Verdict};
use fcdl::syntax::{parse_automaton, parse_expectations};
use fcdl::{parse_drx, parse_program, Error};

use crate::{read_file, CmdResult, Failure, Output};

/// One checked item: a program, a regex or an automaton.
struct Case {
    name: String,
    kind: &'static str,
    words: usize,
    detail: String,
    /// First (shortest) word on which something disagreed.
    mismatch: Option<String>,
    error: Option<String>,
}

impl Case {
    fn new(name: String, kind: &'static str) -> Self {
        Case { name, kind, words: 0, detail: String::new(), mismatch: None, error: None }
    }

    fn ok(&self) -> bool {
        self.mismatch.is_none() && self.error.is_none()
    }

    fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "kind": self.kind,
            "words": self.words,
            "detail": self.detail,
            "agree": self.ok(),
            "counterexample": self.mismatch,
            "error": self.error,
        })
    }
}

fn list(dir: &Path) -> Result<Vec<String>, Failure> {
    let entries = std::fs::read_dir(dir).map_err(|e| Failure::Io(format!("cannot read {}: {e}", dir.display())))?;
    let mut names: Vec<String> = entries.filter_map(|e| e.ok()).map(|e| e.file_name().to_string_lossy().into_owned()).collect();
    names.sort();
    Ok(names)
}

fn check_program(dir: &Path, name: &str, max_len: usize, budget: Budget) -> Result<Case, Failure> {
    let mut case = Case::new(name.to_string(), "program");
    let text = read_file(&dir.join(name))?;
    let p = match parse_program(&text) {
        Ok(p) => p,
        Err(e) => {
            case.error = Some(e.to_string());
            return Ok(case);
        }
    };
    let cc = CrossChecker::with_budget(&p, budget)?;
    case.detail = format!("tier {}, evaluators {}", cc.report().tier, cc.evaluators().join(","));
    let exp = parse_expectations(&text);
    let language = match &exp.drx {
        Some(src) => {
            case.detail.push_str(&format!(", language /{src}/"));
            Some(ConstraintMatcher::new(&parse_drx(src)?))
        }
        None => None,
    };
    for w in p.alphabet.words_up_to(max_len) {
        let r = cc.run(&w)?;
        case.words += 1;
        let expected = language.as_ref().map(|m| Verdict::from_bool(m.is_match(&w.chars().collect::<Vec<_>>())));
        if !r.agree || expected.is_some_and(|e| e != r.verdict()) {
            let mut answers: Vec<String> = r.answers.iter().map(|a| format!("{}={}", a.evaluator, a.verdict)).collect();
            if let Some(e) = expected {
                answers.push(format!("language={e}"));
            }
            case.mismatch = Some(format!("{w:?}: {}", answers.join(" ")));
            return Ok(case);
        }
    }
    for (words, want) in [(&exp.accept, Verdict::Accept), (&exp.reject, Verdict::Reject)] {
        for w in words {
            match cc.run(w) {
                Ok(r) if r.agree && r.verdict() == want => case.words += 1,
                Ok(r) => {
                    case.mismatch = Some(format!("{w:?}: expected {want}, got {}", r.verdict()));
                    return Ok(case);
                }
                Err(e) => {
                    case.error = Some(format!("{w:?}: {e}"));
                    return Ok(case);
                }
            }
        }
    }
    Ok(case)
}

fn check_regex(src: &str, max_len: usize, budget: Budget) -> Result<Case, Failure> {
    let mut case = Case::new(format!("/{src}/"), "regex");
    let gamma = parse_drx(src)?;
    let matcher = ConstraintMatcher::new(&gamma);
    let mut programs = Vec::new();
    for target in [DrxTarget::Dolla, DrxTarget::DollaPlus] {
        match compile_drx(&gamma, None, target) {
            Ok((p, stats)) => programs.push((target, p, stats)),
            Err(Error::Precondition(m)) => {
                case.error = Some(m);
                return Ok(case);
            }
            Err(e) => return Err(e.into()),
        }
    }
    case.detail = programs
        .iter()
        .map(|(t, _, s)| format!("{t:?}: {}/{} rules, {}/{} symbols", s.rules, s.bound_rules, s.symbols, s.bound_symbols))
        .collect::<Vec<_>>()
        .join("; ");
    let opts = FixpointOptions { budget, semi_naive: true };
    for w in programs[0].1.alphabet.words_up_to(max_len) {
        let m = matcher.is_match(&w.chars().collect::<Vec<_>>());
        let bt = drx_match_bruteforce(&gamma, &w)?;
        let mut got = vec![format!("matcher={m}"), format!("backtracking={bt}")];
        let mut agree = m == bt;
        for (t, p, _) in &programs {
            let v = model_check_with(p, &w, opts)?.is_accept();
            agree &= v == m;
            got.push(format!("{t:?}={v}"));
        }
        case.words += 1;
        if !agree {
            case.mismatch = Some(format!("{w:?}: {}", got.join(" ")));
            break;
        }
    }
    Ok(case)
}

fn check_automaton(dir: &Path, name: &str, max_len: usize, budget: Budget) -> Result<Case, Failure> {
    let mut case = Case::new(name.to_string(), "automaton");
    let m = match parse_automaton(&read_file(&dir.join(name))?) {
        Ok(m) => m,
        Err(e) => {
            case.error = Some(e.to_string());
            return Ok(case);
        }
    };
    let mut programs = vec![("2nfa", compile_2nfa(&m)?)];
    if m.deterministic {
        programs.push(("2dfa", compile_2dfa(&m)?));
    }
    case.detail = format!("{} heads, {} states, compiled as {}", m.k, m.states.len(), programs.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(","));
    let opts = FixpointOptions { budget, semi_naive: true };
    for w in m.alphabet.words_up_to(max_len) {
        let want = m.accepts(&w);
        case.words += 1;
        for (kind, p) in &programs {
            let got = model_check_with(p, &w, opts)?.is_accept();
            if got != want {
                case.mismatch = Some(format!("{w:?}: simulation {want}, {kind} program {got}"));
                return Ok(case);
            }
        }
    }
    Ok(case)
}

pub fn corpus(dir: &Path, max_len: usize, budget: Budget) -> CmdResult {
    let start = Instant::now();
    let mut cases = Vec::new();
    for name in list(dir)? {
        if name.ends_with(".fcd") {
            cases.push(check_program(dir, &name, max_len, budget)?);
        } else if name == "regexes.txt" {
            for line in read_file(&dir.join(&name))?.lines().map(str::trim) {
                if !line.is_empty() && !line.starts_with('#') {
                    cases.push(check_regex(line, max_len, budget)?);
                }
            }
        } else if name.ends_with(".json") && !name.ends_with(".tm.json") {
            cases.push(check_automaton(dir, &name, max_len, budget)?);
        }
    }
    if cases.is_empty() {
        eprintln!("warning: no programs, regexes or automata in {}", dir.display());
    }
    let failed: Vec<&Case> = cases.iter().filter(|c| !c.ok()).collect();
    let mut text = String::new();
    for c in &cases {
        let status = if c.ok() { "ok  " } else { "FAIL" };
        let _ = writeln!(text, "{status} {:<10} {:<34} {:>6} words  {}", c.kind, c.name, c.words, c.detail);
        if let Some(m) = &c.mismatch {
            let _ = writeln!(text, "     counterexample {m}");
        }
        if let Some(e) = &c.error {
            let _ = writeln!(text, "     error: {e}");
        }
    }
    let _ = writeln!(text, "{} cases, {} disagree (words up to length {max_len})", cases.len(), failed.len());
    let failure = (!failed.is_empty()).then(|| {
        let names: Vec<&str> = failed.iter().map(|c| c.name.as_str()).collect();
        Failure::Disagreement(format!("disagreement in {}", names.join(", ")))
    });
    let report = json!({
        "inputs": [dir.display().to_string()],
        "maxLen": max_len,
        "cases": cases.iter().map(Case::to_json).collect::<Vec<_>>(),
        "agree": failed.is_empty(),
        "timing": { "wallMs": start.elapsed().as_secs_f64() * 1e3 },
    });
    Ok(Output { report, text, failure })
}
