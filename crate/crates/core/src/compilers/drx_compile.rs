//! Regexes with memories → strictly decreasing deterministic programs.
//!
//! Symbols: `Ans`, `Q0` (before the first position), `Q{p}` (after reading
//! position `p`, 1-based) and, for the DOLLA target, one subroutine family
//! `R{l}` per number `l` of memories a recall has to extend. A `Q` symbol
//! has arguments `(u, x1 … xk)`: the unread suffix and the memory contents.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::compilers::drx_automaton::{check_automaton, drx_position_automaton, PosLabel, PositionAutomaton};
use crate::drx::DrxAst;
use crate::error::{Error, Result};
use crate::program::{Program, ProgramBuilder, RuleBuilder, Sym, ANS, UNIVERSE_NAME};
use crate::word::Alphabet;

/// Size of a compiled program against the construction's bounds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CompileStats {
    /// Number of memories.
    pub k: usize,
    /// Number of letter and recall occurrences.
    pub n: usize,
    pub rules: usize,
    pub symbols: usize,
    pub bound_rules: usize,
    pub bound_symbols: usize,
}

impl CompileStats {
    pub fn within_bounds(&self) -> bool {
        self.rules <= self.bound_rules && self.symbols <= self.bound_symbols
    }
}

/// Output fragment of the regex compiler.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DrxTarget {
    /// OLLA equations only; recalls go through the `R{l}` subroutines.
    Dolla,
    /// Recalls are consumed with one whole-memory equation.
    DollaPlus,
    /// The DOLLA construction without the determinism precondition.
    Linear,
}

/// Compiles a deterministic regex into an SD-DOLLA program.
pub fn compile_drx_dolla(gamma: &DrxAst, alphabet: Option<&Alphabet>) -> Result<(Program, CompileStats)> {
    compile_drx(gamma, alphabet, DrxTarget::Dolla)
}

/// Compiles a deterministic regex into an SD-DOLLA+ program.
pub fn compile_drx_dollaplus(gamma: &DrxAst, alphabet: Option<&Alphabet>) -> Result<(Program, CompileStats)> {
    compile_drx(gamma, alphabet, DrxTarget::DollaPlus)
}

fn mem_var(j: usize) -> String {
    format!("x{}", j + 1)
}

fn mem_var_head(j: usize) -> String {
    format!("xp{}", j + 1)
}

fn q_name(state: usize) -> String {
    format!("Q{state}")
}

/// Compiles `gamma` for `target`. The alphabet defaults to the regex's
/// letters; supplying a larger one only matters for the subroutine rules.
pub fn compile_drx(gamma: &DrxAst, alphabet: Option<&Alphabet>, target: DrxTarget) -> Result<(Program, CompileStats)> {
    let pa = drx_position_automaton(gamma);
    if pa.is_empty() {
        return Err(Error::precondition("regex has no letter or recall occurrence"));
    }
    if pa.rebinding {
        return Err(Error::precondition(format!(
            "regex {gamma} binds a memory under '*' or '+'; rewrite it so that every memory is bound at most once"
        )));
    }
    for (p, lab) in pa.labels.iter().enumerate() {
        if let PosLabel::Recall(m) = *lab {
            if pa.open_at[p].contains(&m) {
                return Err(Error::precondition(format!(
                    "recall {} occurs inside the binding of its own memory",
                    pa.pos_name(p)
                )));
            }
        }
    }
    if target != DrxTarget::Linear {
        let rep = check_automaton(&pa);
        if !rep.deterministic {
            return Err(Error::precondition(format!(
                "regex {gamma} is not deterministic: {}",
                rep.diagnostics.join("; ")
            )));
        }
    }
    let regex_alpha = Alphabet::inferred(gamma.terminals());
    let alpha = match alphabet {
        Some(a) => {
            if let Some(c) = regex_alpha.symbols().find(|&c| !a.contains(c)) {
                return Err(Error::validation(format!("regex letter '{c}' is outside the alphabet {a}"), None));
            }
            a.clone()
        }
        None => regex_alpha,
    };
    let k = pa.memories.len();
    let n = pa.len();
    let mut b = ProgramBuilder::new(alpha.clone());
    b.relation(ANS, 0);

    let body_mems: Vec<String> = (0..k).map(mem_var).collect();
    let mut q_args = vec!["v".to_string()];
    q_args.extend(body_mems.iter().cloned());

    // Ans() ← Q0(xp, x1 … xk), xp ≐ univ, xi ≐ ε
    {
        let mut args = vec!["xp".to_string()];
        args.extend(body_mems.iter().cloned());
        let argr: Vec<&str> = args.iter().map(String::as_str).collect();
        b.rule(ANS, &[], |r| {
            r.eq("xp", &[Sym::V(UNIVERSE_NAME)]);
            for m in &body_mems {
                r.eq(m, &[]);
            }
            r.rel(&q_name(0), &argr);
        });
    }

    let mut recall_widths: BTreeSet<usize> = BTreeSet::new();
    let edges = edge_list(&pa);
    for &(src, dst) in &edges {
        let open = &pa.open_at[dst];
        let head_mems: Vec<String> =
            (0..k).map(|j| if open.contains(&j) { mem_var_head(j) } else { mem_var(j) }).collect();
        let mut head = vec!["u".to_string()];
        head.extend(head_mems.iter().cloned());
        let headr: Vec<&str> = head.iter().map(String::as_str).collect();
        let qargr: Vec<&str> = q_args.iter().map(String::as_str).collect();
        let dst_name = q_name(dst + 1);
        match pa.labels[dst] {
            PosLabel::Letter(a) => {
                b.rule(&q_name(src), &headr, |r| {
                    r.eq("u", &[Sym::T(a), Sym::V("v")]);
                    for &j in open {
                        r.eq(&mem_var(j), &[Sym::V(&mem_var_head(j)), Sym::T(a)]);
                    }
                    r.rel(&dst_name, &qargr);
                });
            }
            PosLabel::Recall(rm) => {
                let recalled = mem_var(rm);
                match target {
                    DrxTarget::DollaPlus => {
                        b.rule(&q_name(src), &headr, |r| {
                            r.eq("u", &[Sym::V(&recalled), Sym::V("v")]);
                            for &j in open {
                                r.eq(&mem_var(j), &[Sym::V(&mem_var_head(j)), Sym::V(&recalled)]);
                            }
                            r.rel(&dst_name, &qargr);
                        });
                    }
                    DrxTarget::Dolla | DrxTarget::Linear => {
                        let l = open.len();
                        recall_widths.insert(l);
                        let mut sub = vec!["u".to_string(), "v".to_string(), recalled.clone()];
                        for &j in open {
                            sub.push(mem_var_head(j));
                            sub.push(mem_var(j));
                        }
                        let subr: Vec<&str> = sub.iter().map(String::as_str).collect();
                        b.rule(&q_name(src), &headr, |r| {
                            r.rel(&dst_name, &qargr);
                            r.rel(&format!("R{l}"), &subr);
                        });
                    }
                }
            }
        }
    }

    // Final rules: Qi(u, x1 … xk) ← u ≐ ε, e1 ≐ x1, …
    let mut finals: Vec<usize> = pa.last.iter().map(|p| p + 1).collect();
    if pa.nullable {
        finals.insert(0, 0);
    }
    for state in finals {
        let mut head = vec!["u".to_string()];
        head.extend(body_mems.iter().cloned());
        let headr: Vec<&str> = head.iter().map(String::as_str).collect();
        b.rule(&q_name(state), &headr, |r| {
            r.eq("u", &[]);
            pass_through(r, &body_mems);
        });
    }

    for &l in &recall_widths {
        subroutine(&mut b, l, &alpha);
    }

    let rules = b.rule_count();
    let prog = b.build()?;
    let symbols = prog.relations.len();
    let sigma = alpha.len();
    let (bound_rules, bound_symbols) = match target {
        DrxTarget::DollaPlus => (n * (n + 3) + 1, n + 2),
        DrxTarget::Dolla | DrxTarget::Linear => (k * (sigma + 1) + n * (n + 3) + 1, k + n + 2),
    };
    let stats = CompileStats { k, n, rules, symbols, bound_rules, bound_symbols };
    if !stats.within_bounds() {
        return Err(Error::Internal(format!("compiled program exceeds the size bounds: {stats:?}")));
    }
    Ok((prog, stats))
}

/// Mentions each memory variable in a dangling copy so that head
/// variables occur in the body.
fn pass_through(r: &mut RuleBuilder<'_>, mems: &[String]) {
    for (j, m) in mems.iter().enumerate() {
        r.eq(&format!("e{}", j + 1), &[Sym::V(m)]);
    }
}

/// `(source state, destination position)` for every edge; state 0 is the
/// start and state `p + 1` is "after position p".
fn edge_list(pa: &PositionAutomaton) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = pa.first.keys().map(|&q| (0, q)).collect();
    for (p, succ) in pa.follow.iter().enumerate() {
        out.extend(succ.keys().map(|&q| (p + 1, q)));
    }
    out
}

/// `R{l}(u, v, c, p1, q1, …, pl, ql)` holds iff `u = c·v` and `qi = pi·c`.
fn subroutine(b: &mut ProgramBuilder, l: usize, alpha: &Alphabet) {
    let name = format!("R{l}");
    let mut head = vec!["u".to_string(), "v".to_string(), "c".to_string()];
    let mut rec = vec!["u2".to_string(), "v".to_string(), "c2".to_string()];
    for i in 1..=l {
        head.push(format!("p{i}"));
        head.push(format!("q{i}"));
        rec.push(format!("pp{i}"));
        rec.push(format!("q{i}"));
    }
    let headr: Vec<&str> = head.iter().map(String::as_str).collect();
    let recr: Vec<&str> = rec.iter().map(String::as_str).collect();
    b.rule(&name, &headr, |r| {
        r.eq("c", &[]);
        r.eq("u", &[Sym::V("v")]);
        for i in 1..=l {
            r.eq(&format!("p{i}"), &[Sym::V(&format!("q{i}"))]);
        }
    });
    for a in alpha.symbols() {
        b.rule(&name, &headr, |r| {
            r.eq("c", &[Sym::T(a), Sym::V("c2")]);
            r.eq("u", &[Sym::T(a), Sym::V("u2")]);
            for i in 1..=l {
                r.eq(&format!("pp{i}"), &[Sym::V(&format!("p{i}")), Sym::T(a)]);
            }
            r.rel(&name, &recr);
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_drx, print_program};

    #[test]
    fn paper_regex_sizes() {
        let g = parse_drx("<x:(a|b)+> d &x").unwrap();
        let (_, s) = compile_drx_dolla(&g, None).unwrap();
        assert_eq!((s.k, s.n, s.bound_rules, s.bound_symbols), (1, 4, 33, 7));
        assert!(s.within_bounds());
        let (p, s) = compile_drx_dollaplus(&g, None).unwrap();
        assert_eq!((s.bound_rules, s.bound_symbols), (29, 6));
        assert!(s.within_bounds());
        assert!(print_program(&p).contains("u = x1 v"));
    }

    #[test]
    fn nondeterministic_regex_is_rejected() {
        let g = parse_drx("<x:(a|b)*> &x").unwrap();
        assert!(matches!(compile_drx_dolla(&g, None), Err(Error::Precondition(_))));
        assert!(compile_drx(&g, None, DrxTarget::Linear).is_ok());
    }
}
