//! `check`, `compile` and `gen-pspace`.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde_json::json;

use fcdl::compilers::{compile_2dfa, compile_2nfa, compile_drx, generate_pspace_instance, DrxTarget};
use fcdl::syntax::{parse_automaton, parse_turing};
use fcdl::{classify, parse_drx, parse_program, print_program, Error, FragmentReport};

use crate::{read_file, write_file, CmdResult, Output, TargetArg};

/// Human rendering of a classification.
pub fn render_report(r: &FragmentReport) -> String {
    let f = &r.flags;
    let mut s = String::new();
    let flags = [
        ("valid", f.valid),
        ("boolean", f.boolean),
        ("linear", f.linear),
        ("olla", f.olla),
        ("guarded", f.guarded),
        ("locally_deterministic", f.locally_deterministic),
        ("globally_deterministic", f.globally_deterministic),
        ("dolla", f.dolla),
        ("uniquely_defined_all", f.uniquely_defined_all),
        ("dolla_plus", f.dolla_plus),
        ("strictly_decreasing", f.strictly_decreasing),
        ("drx_constraints_legal", f.drx_constraints_legal),
    ];
    for (name, v) in flags {
        let _ = writeln!(s, "{name:<24}{v}");
    }
    let _ = writeln!(s, "{:<24}{}", "tier", r.tier);
    for d in &r.diagnostics {
        let _ = writeln!(s, "  {d}");
    }
    s
}

pub fn check(path: &Path) -> CmdResult {
    let text = read_file(path)?;
    let p = parse_program(&text)?;
    let report = classify(&p);
    let out = json!({
        "inputs": [path.display().to_string()],
        "report": report.to_json(),
        "tier": report.tier,
    });
    Ok(Output::ok(out, render_report(&report)))
}

fn drx_target(t: TargetArg) -> DrxTarget {
    match t {
        TargetArg::Dolla => DrxTarget::Dolla,
        TargetArg::Dollaplus => DrxTarget::DollaPlus,
        TargetArg::Linear => DrxTarget::Linear,
    }
}

fn emit(program_text: String, output: Option<&Path>) -> Result<String, crate::Failure> {
    match output {
        Some(path) => {
            write_file(path, &program_text)?;
            Ok(String::new())
        }
        None => Ok(program_text),
    }
}

pub fn compile(drx: Option<&str>, automaton: Option<&Path>, target: TargetArg, output: Option<&Path>) -> CmdResult {
    let start = Instant::now();
    let (program, header, stats, input) = match (drx, automaton) {
        (Some(src), _) => {
            let gamma = parse_drx(src)?;
            let (p, stats) = compile_drx(&gamma, None, drx_target(target))?;
            let header = format!(
                "# compiled from /{src}/\n# k={} n={} rules={}/{} symbols={}/{}\n",
                stats.k, stats.n, stats.rules, stats.bound_rules, stats.symbols, stats.bound_symbols
            );
            (p, header, Some(stats), src.to_string())
        }
        (None, Some(path)) => {
            let m = parse_automaton(&read_file(path)?)?;
            let p = match target {
                TargetArg::Dolla => compile_2dfa(&m)?,
                TargetArg::Linear => compile_2nfa(&m)?,
                TargetArg::Dollaplus => {
                    return Err(Error::Precondition("automata compile to the dolla or linear targets".into()).into())
                }
            };
            (p, format!("# compiled from {}\n", path.display()), None, path.display().to_string())
        }
        (None, None) => return Err(Error::Precondition("pass --drx or --automaton".into()).into()),
    };
    let report = classify(&program);
    let text = format!("{header}{}", print_program(&program));
    let out = json!({
        "inputs": [input],
        "stats": stats,
        "rules": program.rules.len(),
        "symbols": program.relations.len(),
        "report": report.to_json(),
        "tier": report.tier,
        "program": text,
        "output": output.map(|p| p.display().to_string()),
        "timing": { "wallMs": start.elapsed().as_secs_f64() * 1e3 },
    });
    Ok(Output::ok(out, emit(text, output)?))
}

pub fn gen_pspace(machine: &Path, k: usize, output: Option<&Path>) -> CmdResult {
    let t = parse_turing(&read_file(machine)?)?;
    let (p, word) = generate_pspace_instance(&t, k)?;
    let text = format!("# space-bounded acceptance of {} in {k} cells\n# word: {word}\n{}", machine.display(), print_program(&p));
    let out = json!({
        "inputs": [machine.display().to_string()],
        "k": k,
        "word": word,
        "rules": p.rules.len(),
        "symbols": p.relations.len(),
        "program": text,
        "output": output.map(|p| p.display().to_string()),
    });
    Ok(Output::ok(out, emit(text, output)?))
}
