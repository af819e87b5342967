//! Instances of the space-bounded acceptance problem as linear programs.
//!
//! The word is `a^n` with `n = max(k, |Γ|)`. Head position `i` (0-based)
//! and tape symbol number `j` (its index in the tape alphabet) are encoded
//! as the factors `a^i` and `a^j`. Relation `C{q}(h, c1 … ck)` holds iff
//! the machine accepts from state `q` with the head on cell `h` and tape
//! contents `c1 … ck`.

use crate::error::{Error, Result};
use crate::machines::{TmMove, TuringSpec};
use crate::program::{Program, ProgramBuilder, Sym, ANS};
use crate::word::Alphabet;

fn unary(j: usize) -> Vec<Sym<'static>> {
    vec![Sym::T('a'); j]
}

/// Builds the program and the word; the program accepts the word iff `t`
/// accepts ε within `k` cells.
pub fn generate_pspace_instance(t: &TuringSpec, k: usize) -> Result<(Program, String)> {
    if k == 0 {
        return Err(Error::precondition("space bound k must be at least 1"));
    }
    let n = k.max(t.tape.len());
    let mut b = ProgramBuilder::new(Alphabet::new(['a'])?);
    b.relation(ANS, 0);
    let c: Vec<String> = (1..=k).map(|i| format!("c{i}")).collect();
    let d: Vec<String> = (1..=k).map(|i| format!("d{i}")).collect();
    let mut head = vec!["h".to_string()];
    head.extend(c.iter().cloned());
    let mut body = vec!["hp".to_string()];
    body.extend(d.iter().cloned());
    let headr: Vec<&str> = head.iter().map(String::as_str).collect();
    let bodyr: Vec<&str> = body.iter().map(String::as_str).collect();
    let rel = |q: usize| format!("C{q}");

    b.rule(ANS, &[], |r| {
        r.eq("h", &[]);
        for ci in &c {
            r.eq(ci, &unary(t.blank));
        }
        r.rel(&rel(t.start), &headr);
    });
    for (&(q, s), &(q2, w, mv)) in &t.delta {
        for i in 0..k {
            let i2 = match mv {
                TmMove::L if i == 0 => continue,
                TmMove::L => i - 1,
                TmMove::R if i + 1 >= k => continue,
                TmMove::R => i + 1,
            };
            b.rule(&rel(q), &headr, |r| {
                r.eq("h", &unary(i));
                r.eq("hp", &unary(i2));
                r.eq(&c[i], &unary(s));
                r.eq(&d[i], &unary(w));
                for j in (0..k).filter(|&j| j != i) {
                    r.eq(&c[j], &[Sym::V(&d[j])]);
                }
                r.rel(&rel(q2), &bodyr);
            });
        }
    }
    b.rule(&rel(t.omega), &headr, |r| {
        r.eq("h", &[]);
        for ci in &c {
            r.eq(ci, &unary(t.blank));
        }
    });
    Ok((b.build()?, "a".repeat(n)))
}
