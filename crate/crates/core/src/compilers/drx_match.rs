//! Matching regexes with memories: a single-pass deterministic simulator
//! over the position automaton, and an exhaustive backtracking oracle.

use crate::compilers::drx_automaton::{check_automaton, drx_position_automaton, PosLabel, PositionAutomaton};
use crate::drx::DrxAst;
use crate::error::{Error, Result};

/// Content and status of one memory; spans index the input word.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MemoryState {
    /// Start of the captured span; `None` means never opened (content ε).
    pub start: Option<usize>,
    /// End of the captured span; `None` while the memory is open.
    pub end: Option<usize>,
}

impl MemoryState {
    /// Captured content at input position `i`.
    fn content<'w>(&self, w: &'w [char], i: usize) -> &'w [char] {
        match (self.start, self.end) {
            (Some(s), Some(e)) => &w[s..e],
            (Some(s), None) => &w[s..i],
            _ => &[],
        }
    }
}

/// A compiled deterministic matcher.
#[derive(Clone, Debug)]
pub struct DrxMatcher {
    pa: PositionAutomaton,
}

impl DrxMatcher {
    /// Builds the matcher; fails if the regex is not deterministic.
    pub fn new(gamma: &DrxAst) -> Result<Self> {
        let pa = drx_position_automaton(gamma);
        let rep = check_automaton(&pa);
        if !rep.deterministic {
            return Err(Error::precondition(format!(
                "regex {gamma} is not deterministic: {}",
                rep.diagnostics.join("; ")
            )));
        }
        Ok(DrxMatcher { pa })
    }

    /// Single pass over `w`; recalls consume the whole memory content.
    pub fn is_match(&self, w: &[char]) -> bool {
        let pa = &self.pa;
        let mut mem = vec![MemoryState::default(); pa.memories.len()];
        let mut i = 0usize;
        let mut cur: Option<usize> = None;
        loop {
            let (set, can_end) = match cur {
                None => (&pa.first, pa.nullable),
                Some(p) => (&pa.follow[p], pa.last.contains(&p)),
            };
            let recall = set.keys().copied().find(|&q| matches!(pa.labels[q], PosLabel::Recall(_)));
            let next = match recall {
                Some(q) => Some(q),
                None if i == w.len() => return can_end,
                None => set.keys().copied().find(|&q| pa.labels[q] == PosLabel::Letter(w[i])),
            };
            let Some(q) = next else { return false };
            let acts = set[&q].iter().next().expect("edge has actions");
            for &m in &acts.close {
                mem[m].end = Some(i);
            }
            for &m in &acts.open {
                mem[m] = MemoryState { start: Some(i), end: None };
            }
            match pa.labels[q] {
                PosLabel::Letter(_) => i += 1,
                PosLabel::Recall(m) => {
                    let content = mem[m].content(w, i);
                    if w.len() < i + content.len() || &w[i..i + content.len()] != content {
                        return false;
                    }
                    i += content.len();
                }
            }
            cur = Some(q);
        }
    }
}

/// Deterministic matching of `w` against `gamma`.
pub fn drx_match(gamma: &DrxAst, w: &str) -> Result<bool> {
    let m = DrxMatcher::new(gamma)?;
    let chars: Vec<char> = w.chars().collect();
    Ok(m.is_match(&chars))
}

/// Default input-length bound of the backtracking oracle.
pub const BRUTEFORCE_MAX_LEN: usize = 16;

/// Exhaustive backtracking matcher (any regex, deterministic or not), with
/// ε-semantics for memories that were never bound.
pub fn drx_match_bruteforce(gamma: &DrxAst, w: &str) -> Result<bool> {
    drx_match_bruteforce_bounded(gamma, w, BRUTEFORCE_MAX_LEN)
}

/// [`drx_match_bruteforce`] with an explicit length bound.
pub fn drx_match_bruteforce_bounded(gamma: &DrxAst, w: &str, max_len: usize) -> Result<bool> {
    let chars: Vec<char> = w.chars().collect();
    if chars.len() > max_len {
        return Err(Error::Budget(format!(
            "backtracking oracle bound exceeded: |w| = {} > {max_len}",
            chars.len()
        )));
    }
    let mems = gamma.memories();
    let mut st = Bt { w: &chars, mems: &mems, values: vec![Vec::new(); mems.len()] };
    let n = chars.len();
    Ok(st.m(gamma, 0, &mut |j, _| j == n))
}

struct Bt<'a> {
    w: &'a [char],
    mems: &'a [String],
    values: Vec<Vec<char>>,
}

type Cont<'c, 'a> = dyn FnMut(usize, &mut Bt<'a>) -> bool + 'c;

impl<'a> Bt<'a> {
    fn m(&mut self, n: &DrxAst, i: usize, k: &mut Cont<'_, 'a>) -> bool {
        match n {
            DrxAst::Term(c) => self.w.get(i) == Some(c) && k(i + 1, self),
            DrxAst::Recall(name) => {
                let idx = self.mems.iter().position(|m| m == name).expect("bound memory");
                let v = self.values[idx].clone();
                let end = i + v.len();
                end <= self.w.len() && self.w[i..end] == v[..] && k(end, self)
            }
            DrxAst::Concat(items) => self.seq(items, i, k),
            DrxAst::Union(a, b) => self.m(a, i, k) || self.m(b, i, k),
            DrxAst::Star(a) => self.star(a, i, k),
            DrxAst::Plus(a) => self.m(a, i, &mut |j, st: &mut Bt<'a>| st.star(a, j, k)),
            DrxAst::Bind(name, a) => {
                let idx = self.mems.iter().position(|m| m == name).expect("bound memory");
                self.m(a, i, &mut |j, st: &mut Bt<'a>| {
                    let saved = std::mem::replace(&mut st.values[idx], st.w[i..j].to_vec());
                    let r = k(j, st);
                    st.values[idx] = saved;
                    r
                })
            }
        }
    }

    fn seq(&mut self, items: &[DrxAst], i: usize, k: &mut Cont<'_, 'a>) -> bool {
        match items.split_first() {
            None => k(i, self),
            Some((h, rest)) => self.m(h, i, &mut |j, st: &mut Bt<'a>| st.seq(rest, j, k)),
        }
    }

    /// Zero or more iterations; every iteration after the check must make
    /// progress, which keeps the search finite.
    fn star(&mut self, a: &DrxAst, i: usize, k: &mut Cont<'_, 'a>) -> bool {
        if k(i, self) {
            return true;
        }
        self.m(a, i, &mut |j, st: &mut Bt<'a>| j > i && st.star(a, j, k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_drx;

    #[test]
    fn deterministic_matcher_examples() {
        let g = parse_drx("<x:(a|b)+> d &x").unwrap();
        assert!(drx_match(&g, "abdab").unwrap());
        assert!(!drx_match(&g, "abdba").unwrap());
        assert!(!drx_match(&parse_drx("a").unwrap(), "").unwrap());
        assert!(drx_match(&parse_drx("<x:(a|b)*> &x").unwrap(), "aa").is_err());
    }

    #[test]
    fn oracle_examples() {
        let g2 = parse_drx("<x:(a|b)*> &x").unwrap();
        assert!(drx_match_bruteforce(&g2, "abab").unwrap());
        assert!(!drx_match_bruteforce(&g2, "aba").unwrap());
        let g = parse_drx("<x:(a|b)+> d &x").unwrap();
        assert!(!drx_match_bruteforce(&g, "d").unwrap());
        assert!(drx_match_bruteforce(&g, &"a".repeat(40)).is_err());
    }
}

/// Matcher for a regex constraint inside a program: the deterministic
/// matcher when the regex admits one, the backtracking oracle otherwise.
#[derive(Clone, Debug)]
pub enum ConstraintMatcher {
    Deterministic(DrxMatcher),
    Backtracking(DrxAst),
}

impl ConstraintMatcher {
    pub fn new(gamma: &DrxAst) -> Self {
        match DrxMatcher::new(gamma) {
            Ok(m) => ConstraintMatcher::Deterministic(m),
            Err(_) => ConstraintMatcher::Backtracking(gamma.clone()),
        }
    }

    pub fn is_match(&self, w: &[char]) -> bool {
        match self {
            ConstraintMatcher::Deterministic(m) => m.is_match(w),
            ConstraintMatcher::Backtracking(g) => {
                let s: String = w.iter().collect();
                drx_match_bruteforce_bounded(g, &s, usize::MAX).unwrap_or(false)
            }
        }
    }
}
