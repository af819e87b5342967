//! Multi-head two-way automata → linear FC-Datalog.
//!
//! Each head is represented by the prefix of `w` it has moved past: a head
//! on letter position `p` (1-based) carries `w[..p-1]`, a head on `$`
//! carries `w`. A head on `¢` carries ε as well; which heads sit on `¢` is
//! recorded in the relation symbol, so the symbols are indexed by
//! `(state, set of heads on ¢)`. Only reachable pairs get a symbol.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::machines::{MultiHeadAutomaton, TapeSymbol};
use crate::program::{Program, ProgramBuilder, Sym, ANS, UNIVERSE_NAME};

type Mask = u64;

fn rel_name(state: usize, mask: Mask, k: usize) -> String {
    let bits: String = (0..k).map(|h| if mask >> h & 1 == 1 { '1' } else { '0' }).collect();
    format!("Q{state}_{bits}")
}

fn x(h: usize) -> String {
    format!("x{}", h + 1)
}

fn y(h: usize) -> String {
    format!("y{}", h + 1)
}

/// One generated rule before it is handed to the builder.
struct Draft {
    head: (usize, Mask),
    /// Body symbol, or `None` for a transition into the accepting state.
    body: Option<(usize, Mask)>,
    eqs: Eqs,
}

/// Owned pattern symbol of a draft rule.
#[derive(Clone)]
enum S {
    V(String),
    T(char),
}

fn v(s: String) -> S {
    S::V(s)
}

type Eqs = Vec<(String, Vec<S>)>;

/// Compiles any (possibly nondeterministic) automaton into a linear program
/// with `L(P) = L(M)`.
pub fn compile_2nfa(m: &MultiHeadAutomaton) -> Result<Program> {
    compile(m, m.accepts(""))
}

/// Compiles a deterministic automaton into a DOLLA program.
pub fn compile_2dfa(m: &MultiHeadAutomaton) -> Result<Program> {
    if !m.deterministic {
        return Err(Error::precondition("compile_2dfa needs a deterministic automaton"));
    }
    compile(m, false)
}

fn compile(m: &MultiHeadAutomaton, epsilon_rule: bool) -> Result<Program> {
    if m.k > 63 {
        return Err(Error::precondition("at most 63 heads are supported"));
    }
    let k = m.k;
    let all: Mask = (1 << k) - 1;
    let sigma: Vec<char> = m.alphabet.symbols().collect();
    let mut drafts: Vec<Draft> = Vec::new();
    let mut seen: BTreeSet<(usize, Mask)> = BTreeSet::new();
    let mut queue = VecDeque::new();
    if m.start != m.accept {
        seen.insert((m.start, all));
        queue.push_back((m.start, all));
    }
    let copy_except = |skip: Option<usize>| -> Eqs {
        (0..k).filter(|&j| Some(j) != skip).map(|j| (y(j), vec![v(x(j))])).collect()
    };
    while let Some((p, mask)) = queue.pop_front() {
        let h = m.head[p];
        let mut emit = |q: usize, newmask: Mask, eqs: Eqs, drafts: &mut Vec<Draft>| {
            let body = if q == m.accept { None } else { Some((q, newmask)) };
            if let Some(b) = body {
                if seen.insert(b) {
                    queue.push_back(b);
                }
            }
            drafts.push(Draft { head: (p, mask), body, eqs });
        };
        if mask >> h & 1 == 1 {
            for &(q, d) in m.choices(p, TapeSymbol::Left) {
                let newmask = if d == 1 { mask & !(1 << h) } else { mask };
                emit(q, newmask, copy_except(None), &mut drafts);
            }
            continue;
        }
        // head h is on a letter or on `$`
        let mut scans: Vec<(TapeSymbol, Eqs)> = sigma
            .iter()
            .map(|&a| {
                let look = (UNIVERSE_NAME.to_string(), vec![v(x(h)), S::T(a), v("z".into())]);
                (TapeSymbol::Letter(a), vec![look])
            })
            .collect();
        scans.push((TapeSymbol::Right, vec![(x(h), vec![v(UNIVERSE_NAME.into())])]));
        for (sym, guard) in scans {
            for &(q, d) in m.choices(p, sym) {
                match d {
                    1 => {
                        let mut eqs = guard.clone();
                        let TapeSymbol::Letter(a) = sym else { unreachable!("validated: no right move on $") };
                        eqs.push((y(h), vec![v(x(h)), S::T(a)]));
                        eqs.extend(copy_except(Some(h)));
                        emit(q, mask, eqs, &mut drafts);
                    }
                    0 => {
                        let mut eqs = guard.clone();
                        eqs.extend(copy_except(None));
                        emit(q, mask, eqs, &mut drafts);
                    }
                    _ => {
                        for &b in &sigma {
                            let mut eqs = guard.clone();
                            eqs.push((x(h), vec![v(y(h)), S::T(b)]));
                            eqs.extend(copy_except(Some(h)));
                            emit(q, mask, eqs, &mut drafts);
                        }
                        let mut eqs = guard.clone();
                        eqs.push((x(h), vec![]));
                        eqs.push((y(h), vec![v(x(h))]));
                        eqs.extend(copy_except(Some(h)));
                        emit(q, mask | 1 << h, eqs, &mut drafts);
                    }
                }
            }
        }
    }

    let mut b = ProgramBuilder::new(m.alphabet.clone());
    b.relation(ANS, 0);
    if m.start == m.accept {
        b.rule(ANS, &[], |r| r.eq("t", &[Sym::V(UNIVERSE_NAME)]));
    } else {
        let args: Vec<String> = (0..k).map(y).collect();
        let argr: Vec<&str> = args.iter().map(String::as_str).collect();
        let start = rel_name(m.start, all, k);
        b.rule(ANS, &[], |r| {
            for a in &argr {
                r.eq(a, &[]);
            }
            r.rel(&start, &argr);
        });
    }
    if epsilon_rule {
        b.rule(ANS, &[], |r| r.eq(UNIVERSE_NAME, &[]));
    }
    let xs: Vec<String> = (0..k).map(x).collect();
    let xr: Vec<&str> = xs.iter().map(String::as_str).collect();
    let ys: Vec<String> = (0..k).map(y).collect();
    let yr: Vec<&str> = ys.iter().map(String::as_str).collect();
    // group rules per head symbol for a readable listing
    let mut by_head: BTreeMap<(usize, Mask), Vec<&Draft>> = BTreeMap::new();
    for d in &drafts {
        by_head.entry(d.head).or_default().push(d);
    }
    for (head, ds) in by_head {
        let hname = rel_name(head.0, head.1, k);
        for d in ds {
            b.rule(&hname, &xr, |r| {
                for (lhs, rhs) in &d.eqs {
                    let rhs: Vec<Sym<'_>> = rhs
                        .iter()
                        .map(|s| match s {
                            S::V(n) => Sym::V(n),
                            S::T(c) => Sym::T(*c),
                        })
                        .collect();
                    r.eq(lhs, &rhs);
                }
                if let Some((q, mk)) = d.body {
                    r.rel(&rel_name(q, mk, k), &yr);
                }
            });
        }
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::fixpoint::model_check;
    use crate::syntax::parse_automaton;

    const ASTAR: &str = r#"{"states":["q0","qf"],"k":1,"alphabet":["a","b"],"headSelector":{"q0":1,"qf":1},
      "transitions":[{"from":"q0","symbol":"<","to":"q0","move":1},
                     {"from":"q0","symbol":"a","to":"q0","move":1},
                     {"from":"q0","symbol":">","to":"qf","move":0}],
      "start":"q0","accept":"qf"}"#;

    #[test]
    fn astar_agrees_with_simulation() {
        let m = parse_automaton(ASTAR).unwrap();
        let p = compile_2dfa(&m).unwrap();
        for w in m.alphabet.words_up_to(5) {
            assert_eq!(model_check(&p, &w).unwrap().is_accept(), m.accepts(&w), "{w}");
        }
    }
}
