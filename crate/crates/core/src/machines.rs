//! Source machine models for the compilers: multi-head two-way automata and
//! space-bounded deterministic Turing machines, with direct simulators.

use std::collections::{BTreeMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::word::Alphabet;

/// A symbol scanned by an automaton head: a letter or an endmarker.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TapeSymbol {
    /// Left endmarker ¢ (spelled `<` in JSON).
    Left,
    Letter(char),
    /// Right endmarker $ (spelled `>` in JSON).
    Right,
}

/// A two-way finite automaton with `k` heads, endmarkers and a single
/// accepting state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiHeadAutomaton {
    pub states: Vec<String>,
    pub k: usize,
    pub alphabet: Alphabet,
    /// Head selected in each state, 0-based.
    pub head: Vec<usize>,
    /// (state, scanned symbol) → choices of (next state, move).
    pub transitions: BTreeMap<(usize, TapeSymbol), Vec<(usize, i8)>>,
    pub start: usize,
    pub accept: usize,
    /// True iff every transition set has at most one element.
    pub deterministic: bool,
}

impl MultiHeadAutomaton {
    /// Validates the structure and computes the deterministic flag.
    pub fn new(
        states: Vec<String>,
        k: usize,
        alphabet: Alphabet,
        head: Vec<usize>,
        transitions: BTreeMap<(usize, TapeSymbol), Vec<(usize, i8)>>,
        start: usize,
        accept: usize,
    ) -> Result<Self> {
        let bad = |m: String| Error::validation(m, None);
        if states.is_empty() {
            return Err(bad("automaton has no states".into()));
        }
        if k == 0 {
            return Err(bad("automaton needs at least one head".into()));
        }
        if head.len() != states.len() || head.iter().any(|&h| h >= k) {
            return Err(bad("head selector must map every state to a head in 1..k".into()));
        }
        if start >= states.len() || accept >= states.len() {
            return Err(bad("unknown start or accept state".into()));
        }
        for (&(p, sym), choices) in &transitions {
            if p >= states.len() {
                return Err(bad(format!("transition from unknown state #{p}")));
            }
            if let TapeSymbol::Letter(c) = sym {
                if !alphabet.contains(c) {
                    return Err(bad(format!("transition on symbol '{c}' outside the alphabet")));
                }
            }
            for &(q, d) in choices {
                if q >= states.len() {
                    return Err(bad(format!("transition to unknown state #{q}")));
                }
                if !(-1..=1).contains(&d) {
                    return Err(bad(format!("move {d} is not one of -1, 0, 1")));
                }
                if sym == TapeSymbol::Left && d < 0 {
                    return Err(bad(format!(
                        "state {} moves left on the left endmarker",
                        states[p]
                    )));
                }
                if sym == TapeSymbol::Right && d > 0 {
                    return Err(bad(format!(
                        "state {} moves right on the right endmarker",
                        states[p]
                    )));
                }
            }
        }
        let deterministic = transitions.values().all(|c| c.len() <= 1);
        Ok(MultiHeadAutomaton { states, k, alphabet, head, transitions, start, accept, deterministic })
    }

    /// Choices for `(state, symbol)`.
    pub fn choices(&self, p: usize, sym: TapeSymbol) -> &[(usize, i8)] {
        self.transitions.get(&(p, sym)).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Direct simulation: explores head configurations breadth first with a
    /// visited set. Heads start on the left endmarker; the word is accepted
    /// iff the accepting state is reachable.
    pub fn accepts(&self, w: &str) -> bool {
        let word: Vec<char> = w.chars().collect();
        let n = word.len();
        let scan = |pos: usize| -> TapeSymbol {
            if pos == 0 {
                TapeSymbol::Left
            } else if pos == n + 1 {
                TapeSymbol::Right
            } else {
                TapeSymbol::Letter(word[pos - 1])
            }
        };
        let init = (self.start, vec![0usize; self.k]);
        let mut seen = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(init.clone());
        queue.push_back(init);
        while let Some((p, heads)) = queue.pop_front() {
            if p == self.accept {
                return true;
            }
            let h = self.head[p];
            for &(q, d) in self.choices(p, scan(heads[h])) {
                let mut next = heads.clone();
                next[h] = (heads[h] as i64 + d as i64) as usize;
                let cfg = (q, next);
                if seen.insert(cfg.clone()) {
                    queue.push_back(cfg);
                }
            }
        }
        false
    }
}

/// Head movement of a Turing machine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TmMove {
    L,
    R,
}

/// A deterministic single-tape Turing machine that accepts by halting in
/// `omega` with a blank tape and the head on the leftmost cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TuringSpec {
    pub states: Vec<String>,
    pub tape: Vec<char>,
    /// Index of the blank symbol in `tape`.
    pub blank: usize,
    /// (state, read symbol index) → (state, written symbol index, move).
    pub delta: BTreeMap<(usize, usize), (usize, usize, TmMove)>,
    pub start: usize,
    pub omega: usize,
}

/// Outcome of a space-bounded run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TmOutcome {
    Accept,
    /// Halted in a non-accepting configuration or left the space bound.
    Reject,
    /// Revisited a configuration.
    Loop,
}

impl TuringSpec {
    /// Validates indices; `delta` being a map already rules out two rules
    /// for the same (state, symbol), which parsers must report beforehand.
    pub fn new(
        states: Vec<String>,
        tape: Vec<char>,
        blank: usize,
        delta: BTreeMap<(usize, usize), (usize, usize, TmMove)>,
        start: usize,
        omega: usize,
    ) -> Result<Self> {
        let bad = |m: String| Error::validation(m, None);
        if blank >= tape.len() || start >= states.len() || omega >= states.len() {
            return Err(bad("blank, start or omega out of range".into()));
        }
        for (&(q, a), &(r, b, _)) in &delta {
            if q >= states.len() || r >= states.len() || a >= tape.len() || b >= tape.len() {
                return Err(bad("transition refers to an unknown state or symbol".into()));
            }
            if q == omega {
                return Err(bad(format!("accepting state {} must be halting", states[omega])));
            }
        }
        Ok(TuringSpec { states, tape, blank, delta, start, omega })
    }

    /// Runs on the empty input within `k` cells, detecting cycles.
    pub fn run_in_space(&self, k: usize) -> TmOutcome {
        let mut tape = vec![self.blank; k];
        let mut head = 0usize;
        let mut state = self.start;
        let mut seen = HashSet::new();
        loop {
            if state == self.omega {
                let clean = tape.iter().all(|&c| c == self.blank) && head == 0;
                return if clean { TmOutcome::Accept } else { TmOutcome::Reject };
            }
            if !seen.insert((state, head, tape.clone())) {
                return TmOutcome::Loop;
            }
            let Some(&(next, write, mv)) = self.delta.get(&(state, tape[head])) else {
                return TmOutcome::Reject;
            };
            tape[head] = write;
            state = next;
            match mv {
                TmMove::L if head == 0 => return TmOutcome::Reject,
                TmMove::L => head -= 1,
                TmMove::R if head + 1 >= k => return TmOutcome::Reject,
                TmMove::R => head += 1,
            }
        }
    }
}
