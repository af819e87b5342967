//! Position (Glushkov) automaton of a regex with memories, and the
//! conservative determinism check.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::drx::DrxAst;

/// Label of a position: a letter occurrence or a recall occurrence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum PosLabel {
    Letter(char),
    /// Recall of the memory with this index in [`PositionAutomaton::memories`].
    Recall(usize),
}

/// Memory operations performed when moving along an edge into a position.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Actions {
    /// Memories whose binding is left (content is final).
    pub close: Vec<usize>,
    /// Memories whose binding is entered (content restarts at ε).
    pub open: Vec<usize>,
}

/// The position automaton: positions are the letter and recall occurrences
/// of the regex in left-to-right order (0-based).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PositionAutomaton {
    pub memories: Vec<String>,
    pub labels: Vec<PosLabel>,
    /// First positions with the actions of the initial move (alternatives).
    pub first: BTreeMap<usize, BTreeSet<Actions>>,
    pub last: BTreeSet<usize>,
    /// `follow[p]`: successor positions with the edge actions (alternatives).
    pub follow: Vec<BTreeMap<usize, BTreeSet<Actions>>>,
    pub nullable: bool,
    /// Memories whose binding encloses each position.
    pub open_at: Vec<BTreeSet<usize>>,
    /// Whether some binding sits below a `*` or `+` (memory re-binding).
    pub rebinding: bool,
}

impl PositionAutomaton {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of recall positions.
    pub fn recall_count(&self) -> usize {
        self.labels.iter().filter(|l| matches!(l, PosLabel::Recall(_))).count()
    }

    /// Closing actions at the end of the input for last position `p`.
    pub fn final_close(&self, p: usize) -> Vec<usize> {
        self.open_at[p].iter().copied().collect()
    }

    /// Human-readable name of a position (1-based, as in the literature).
    pub fn pos_name(&self, p: usize) -> String {
        match self.labels[p] {
            PosLabel::Letter(c) => format!("{c}{}", p + 1),
            PosLabel::Recall(m) => format!("&{}{}", self.memories[m], p + 1),
        }
    }
}

impl fmt::Display for PositionAutomaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = |s: &mut dyn Iterator<Item = usize>| s.map(|p| self.pos_name(p)).collect::<Vec<_>>().join(",");
        writeln!(f, "first = {{{}}}", names(&mut self.first.keys().copied()))?;
        writeln!(f, "last = {{{}}}", names(&mut self.last.iter().copied()))?;
        for (p, succ) in self.follow.iter().enumerate() {
            writeln!(f, "follow({}) = {{{}}}", self.pos_name(p), names(&mut succ.keys().copied()))?;
        }
        write!(f, "nullable = {}", self.nullable)
    }
}

struct Builder {
    memories: Vec<String>,
    labels: Vec<PosLabel>,
    /// Enclosing binds of each position: (bind node id, memory).
    binds: Vec<Vec<(usize, usize)>>,
    follow: Vec<BTreeMap<usize, BTreeSet<Actions>>>,
    node_counter: usize,
    rebinding: bool,
}

struct Frag {
    first: Vec<usize>,
    last: Vec<usize>,
    nullable: bool,
}

impl Builder {
    fn mem(&self, name: &str) -> usize {
        self.memories.iter().position(|m| m == name).expect("memory collected beforehand")
    }

    /// Actions for an edge p → q created at the node whose subtree has node
    /// ids in `range`: binds inside the node around p close, around q open.
    fn edge_actions(&self, p: usize, q: usize, range: (usize, usize)) -> Actions {
        let inside = |&(id, _): &(usize, usize)| id >= range.0 && id < range.1;
        let close = self.binds[p].iter().filter(|b| inside(b)).map(|b| b.1).collect();
        let open = self.binds[q].iter().filter(|b| inside(b)).map(|b| b.1).collect();
        Actions { close, open }
    }

    fn add_edges(&mut self, from: &[usize], to: &[usize], range: (usize, usize)) {
        for &p in from {
            for &q in to {
                let a = self.edge_actions(p, q, range);
                self.follow[p].entry(q).or_default().insert(a);
            }
        }
    }

    fn build(&mut self, n: &DrxAst, enclosing: &mut Vec<(usize, usize)>, under_rep: bool) -> Frag {
        let id = self.node_counter;
        self.node_counter += 1;
        match n {
            DrxAst::Term(c) => self.leaf(PosLabel::Letter(*c), enclosing),
            DrxAst::Recall(m) => {
                let m = self.mem(m);
                self.leaf(PosLabel::Recall(m), enclosing)
            }
            DrxAst::Concat(items) => {
                let mut acc = Frag { first: vec![], last: vec![], nullable: true };
                let mut last_parts: Vec<Frag> = Vec::new();
                for it in items {
                    let f = self.build(it, enclosing, under_rep);
                    last_parts.push(f);
                }
                let range = (id, self.node_counter);
                // edges: last of the nullable-extended prefix to first of each part
                let mut reach_last: Vec<usize> = Vec::new();
                for f in &last_parts {
                    self.add_edges(&reach_last, &f.first, range);
                    if acc.nullable {
                        acc.first.extend(f.first.iter().copied());
                    }
                    if f.nullable {
                        reach_last.extend(f.last.iter().copied());
                    } else {
                        reach_last = f.last.clone();
                    }
                    acc.nullable &= f.nullable;
                }
                acc.last = reach_last;
                acc
            }
            DrxAst::Union(a, b) => {
                let fa = self.build(a, enclosing, under_rep);
                let fb = self.build(b, enclosing, under_rep);
                Frag {
                    first: [fa.first, fb.first].concat(),
                    last: [fa.last, fb.last].concat(),
                    nullable: fa.nullable || fb.nullable,
                }
            }
            DrxAst::Plus(a) | DrxAst::Star(a) => {
                let f = self.build(a, enclosing, true);
                let range = (id, self.node_counter);
                self.add_edges(&f.last.clone(), &f.first.clone(), range);
                let nullable = f.nullable || matches!(n, DrxAst::Star(_));
                Frag { nullable, ..f }
            }
            DrxAst::Bind(m, a) => {
                if under_rep {
                    self.rebinding = true;
                }
                let mi = self.mem(m);
                enclosing.push((id, mi));
                let f = self.build(a, enclosing, under_rep);
                enclosing.pop();
                f
            }
        }
    }

    fn leaf(&mut self, label: PosLabel, enclosing: &[(usize, usize)]) -> Frag {
        let p = self.labels.len();
        self.labels.push(label);
        self.binds.push(enclosing.to_vec());
        self.follow.push(BTreeMap::new());
        Frag { first: vec![p], last: vec![p], nullable: false }
    }
}

/// Builds the position automaton by structural induction.
pub fn drx_position_automaton(gamma: &DrxAst) -> PositionAutomaton {
    let mut b = Builder {
        memories: gamma.memories(),
        labels: Vec::new(),
        binds: Vec::new(),
        follow: Vec::new(),
        node_counter: 0,
        rebinding: false,
    };
    let f = b.build(gamma, &mut Vec::new(), false);
    let mut first: BTreeMap<usize, BTreeSet<Actions>> = BTreeMap::new();
    for q in f.first {
        let open = b.binds[q].iter().map(|x| x.1).collect();
        first.entry(q).or_default().insert(Actions { close: vec![], open });
    }
    let open_at = b.binds.iter().map(|bs| bs.iter().map(|x| x.1).collect()).collect();
    PositionAutomaton {
        memories: b.memories,
        labels: b.labels,
        first,
        last: f.last.into_iter().collect(),
        follow: b.follow,
        nullable: f.nullable,
        open_at,
        rebinding: b.rebinding,
    }
}

/// Outcome of the determinism check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeterminismReport {
    pub deterministic: bool,
    pub diagnostics: Vec<String>,
}

/// Conservative determinism check: within the first set and every follow
/// set, letters are pairwise distinct and a recall is the only member.
/// Sets of last positions (and the first set of a nullable regex) contain
/// an implicit end-of-input member. Edges whose memory actions are
/// ambiguous are rejected as well.
pub fn drx_check_deterministic(gamma: &DrxAst) -> DeterminismReport {
    let pa = drx_position_automaton(gamma);
    check_automaton(&pa)
}

/// [`drx_check_deterministic`] on an already built automaton.
pub fn check_automaton(pa: &PositionAutomaton) -> DeterminismReport {
    let mut diags = Vec::new();
    let mut check_set = |what: String, set: &BTreeMap<usize, BTreeSet<Actions>>, has_end: bool| {
        let mut letters: BTreeMap<char, usize> = BTreeMap::new();
        let members = set.len() + usize::from(has_end);
        for (&q, acts) in set {
            if acts.len() > 1 {
                diags.push(format!("{what}: ambiguous memory actions on the move into {}", pa.pos_name(q)));
            }
            match pa.labels[q] {
                PosLabel::Letter(c) => {
                    if let Some(&other) = letters.get(&c) {
                        diags.push(format!(
                            "{what}: letter '{c}' labels both {} and {}",
                            pa.pos_name(other),
                            pa.pos_name(q)
                        ));
                    }
                    letters.insert(c, q);
                }
                PosLabel::Recall(_) => {
                    if members > 1 {
                        diags.push(format!(
                            "{what}: recall {} is not the only choice{}",
                            pa.pos_name(q),
                            if has_end { " (the input may also end here)" } else { "" }
                        ));
                    }
                }
            }
        }
    };
    check_set("first set".into(), &pa.first, pa.nullable);
    for p in 0..pa.len() {
        check_set(format!("follow({})", pa.pos_name(p)), &pa.follow[p], pa.last.contains(&p));
    }
    DeterminismReport { deterministic: diags.is_empty(), diagnostics: diags }
}

/// Rejects recalls that precede every binding of their memory on every path
/// (such recalls can only ever read ε).
pub fn check_recall_order(gamma: &DrxAst) -> Result<(), String> {
    let pa = drx_position_automaton(gamma);
    for (r, lab) in pa.labels.iter().enumerate() {
        let PosLabel::Recall(m) = *lab else { continue };
        // positions inside a binding of m that can reach r
        let sources: Vec<usize> = (0..pa.len()).filter(|&p| pa.open_at[p].contains(&m)).collect();
        let mut seen = vec![false; pa.len()];
        let mut queue: VecDeque<usize> = sources.iter().copied().collect();
        let mut reached = false;
        while let Some(p) = queue.pop_front() {
            for &q in pa.follow[p].keys() {
                if q == r {
                    reached = true;
                }
                if !seen[q] {
                    seen[q] = true;
                    queue.push_back(q);
                }
            }
        }
        if !reached {
            return Err(format!(
                "recall &{} occurs before any binding of {} on every path",
                pa.memories[m], pa.memories[m]
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_drx;

    fn names(pa: &PositionAutomaton, s: impl Iterator<Item = usize>) -> Vec<String> {
        s.map(|p| pa.pos_name(p)).collect()
    }

    #[test]
    fn glushkov_of_paper_regex() {
        let pa = drx_position_automaton(&parse_drx("<x:(a|b)+> d &x").unwrap());
        assert_eq!(names(&pa, pa.first.keys().copied()), vec!["a1", "b2"]);
        assert_eq!(names(&pa, pa.follow[2].keys().copied()), vec!["&x4"]);
        assert_eq!(names(&pa, pa.last.iter().copied()), vec!["&x4"]);
        assert!(!pa.nullable);
        // leaving the binding closes x
        assert_eq!(pa.follow[0][&2].iter().next().unwrap().close, vec![0]);
    }

    #[test]
    fn glushkov_textbook_cases() {
        let pa = drx_position_automaton(&parse_drx("a").unwrap());
        assert_eq!(pa.first.len(), 1);
        assert_eq!(pa.last.len(), 1);
        assert!(pa.follow[0].is_empty());
        let pa = drx_position_automaton(&parse_drx("(a|b)*").unwrap());
        assert!(pa.nullable);
        assert_eq!(pa.first.len(), 2);
        assert_eq!(pa.last.len(), 2);
    }

    #[test]
    fn determinism_examples() {
        assert!(drx_check_deterministic(&parse_drx("<x:(a|b)+> d &x").unwrap()).deterministic);
        assert!(!drx_check_deterministic(&parse_drx("<x:(a|b)*> &x").unwrap()).deterministic);
        assert!(!drx_check_deterministic(&parse_drx("a|a").unwrap()).deterministic);
    }
}
