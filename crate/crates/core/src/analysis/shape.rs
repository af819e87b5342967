//! Per-rule summaries of what the equations force on the top variables,
//! used to prove that two rules of one head symbol never accept the same
//! top tuple.
//!
//! A summary is kept per alias class of top positions (head argument
//! positions plus univ). Besides the first/last letter of the classic
//! profile it records longer borders, exact constants, a minimum length
//! and the letters seen right after / before a prefix / suffix of the
//! word (lookahead equations).

use std::collections::BTreeMap;

use serde::Serialize;

use crate::analysis::olla::{EqForm, EqLabel};
use crate::program::{Item, Program, Rule, VarId, UNIVERSE};

/// A top position: a head argument index or the universe variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Key {
    Pos(usize),
    Univ,
}

/// Facts about the value of one alias class.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Shape {
    /// Known prefix (terminals).
    pub prefix: Vec<char>,
    /// Known suffix (terminals).
    pub suffix: Vec<char>,
    /// Known constant value.
    pub exact: Option<Vec<char>>,
    pub min_len: usize,
    /// The value is a prefix of the word followed by this letter.
    pub look_after: Option<char>,
    /// The value is a suffix of the word preceded by this letter.
    pub look_before: Option<char>,
    /// The class contains univ (the value is the whole word).
    pub whole: bool,
}

fn border_merge(a: &[char], b: &[char], prefix: bool) -> Option<Vec<char>> {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let ok = if prefix { long.starts_with(short) } else { long.ends_with(short) };
    ok.then(|| long.to_vec())
}

fn look_merge(a: Option<char>, b: Option<char>) -> Result<Option<char>, ()> {
    match (a, b) {
        (Some(x), Some(y)) if x != y => Err(()),
        (x, y) => Ok(x.or(y)),
    }
}

impl Shape {
    /// Conjunction of two summaries of the same value; `None` if they
    /// contradict.
    pub fn merge(&self, other: &Shape) -> Option<Shape> {
        let exact = match (&self.exact, &other.exact) {
            (Some(a), Some(b)) if a != b => return None,
            (a, b) => a.clone().or_else(|| b.clone()),
        };
        let s = Shape {
            prefix: border_merge(&self.prefix, &other.prefix, true)?,
            suffix: border_merge(&self.suffix, &other.suffix, false)?,
            exact,
            min_len: self.min_len.max(other.min_len),
            look_after: look_merge(self.look_after, other.look_after).ok()?,
            look_before: look_merge(self.look_before, other.look_before).ok()?,
            whole: self.whole || other.whole,
        };
        s.consistent().then_some(s)
    }

    /// Internal consistency of the facts.
    pub fn consistent(&self) -> bool {
        if let Some(e) = &self.exact {
            if !e.starts_with(&self.prefix) || !e.ends_with(&self.suffix) || e.len() < self.min_len {
                return false;
            }
        }
        if self.whole && (self.look_after.is_some() || self.look_before.is_some()) {
            return false;
        }
        true
    }

    /// First letter if known: `Some(None)` means the value is ε.
    pub fn first(&self) -> Option<Option<char>> {
        match &self.exact {
            Some(e) => Some(e.first().copied()),
            None => self.prefix.first().map(|c| Some(*c)),
        }
    }

    /// Last letter if known: `Some(None)` means the value is ε.
    pub fn last(&self) -> Option<Option<char>> {
        match &self.exact {
            Some(e) => Some(e.last().copied()),
            None => self.suffix.last().map(|c| Some(*c)),
        }
    }

    fn from_pattern(items: &[Item]) -> Shape {
        let lead: Vec<char> = items
            .iter()
            .map_while(|i| match i {
                Item::Term(c) => Some(*c),
                Item::Var(_) => None,
            })
            .collect();
        let mut trail: Vec<char> = items
            .iter()
            .rev()
            .map_while(|i| match i {
                Item::Term(c) => Some(*c),
                Item::Var(_) => None,
            })
            .collect();
        trail.reverse();
        let all = lead.len() == items.len();
        Shape {
            exact: all.then(|| lead.clone()),
            min_len: items.iter().filter(|i| matches!(i, Item::Term(_))).count(),
            prefix: lead,
            suffix: trail,
            ..Default::default()
        }
    }
}

/// Summaries of one rule: a partition of the keys into alias classes and a
/// shape per class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RuleShape {
    pub classes: Vec<Vec<Key>>,
    pub shapes: Vec<Shape>,
    /// The equations contradict each other: the rule never applies.
    pub inert: bool,
}

struct Uf(Vec<usize>);

impl Uf {
    fn new(n: usize) -> Self {
        Uf((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut c = x;
        while self.0[c] != r {
            let n = self.0[c];
            self.0[c] = r;
            c = n;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn key_index(k: Key, arity: usize) -> usize {
    match k {
        Key::Pos(i) => i,
        Key::Univ => arity,
    }
}

fn all_keys(arity: usize) -> Vec<Key> {
    (0..arity).map(Key::Pos).chain(std::iter::once(Key::Univ)).collect()
}

/// Summarises a (linear) rule.
pub fn rule_shape(rule: &Rule) -> RuleShape {
    let arity = rule.head_args.len();
    let nvars = rule.var_count();
    // union-find over variables; top variables map to keys
    let mut uf = Uf::new(nvars);
    let is_top = |v: VarId| v == UNIVERSE || rule.head_args.contains(&v);
    for eq in rule.equations() {
        if let [Item::Var(v)] = eq.rhs.items.as_slice() {
            if is_top(eq.lhs) && is_top(*v) {
                uf.union(eq.lhs, *v);
            }
        }
    }
    let mut facts: BTreeMap<usize, Shape> = BTreeMap::new();
    let mut inert = false;
    let mut add = |uf: &mut Uf, v: VarId, s: Shape, inert: &mut bool| {
        let r = uf.find(v);
        let cur = facts.remove(&r).unwrap_or_default();
        match cur.merge(&s) {
            Some(m) => {
                facts.insert(r, m);
            }
            None => {
                *inert = true;
                facts.insert(r, cur);
            }
        }
    };
    add(&mut uf, UNIVERSE, Shape { whole: true, ..Default::default() }, &mut inert);
    for eq in rule.equations() {
        if !is_top(eq.lhs) {
            continue;
        }
        let items = &eq.rhs.items;
        add(&mut uf, eq.lhs, Shape::from_pattern(items), &mut inert);
        if eq.lhs == UNIVERSE {
            if let [Item::Var(x), Item::Term(a), ..] = items.as_slice() {
                if is_top(*x) && *x != UNIVERSE {
                    add(&mut uf, *x, Shape { look_after: Some(*a), ..Default::default() }, &mut inert);
                }
            }
            if let [.., Item::Term(a), Item::Var(x)] = items.as_slice() {
                if is_top(*x) && *x != UNIVERSE {
                    add(&mut uf, *x, Shape { look_before: Some(*a), ..Default::default() }, &mut inert);
                }
            }
        }
    }
    // group keys by the class of their variable
    let mut groups: BTreeMap<usize, Vec<Key>> = BTreeMap::new();
    for k in all_keys(arity) {
        let v = match k {
            Key::Pos(i) => rule.head_args[i],
            Key::Univ => UNIVERSE,
        };
        groups.entry(uf.find(v)).or_default().push(k);
    }
    let mut classes = Vec::new();
    let mut shapes = Vec::new();
    for (root, keys) in groups {
        shapes.push(facts.get(&root).cloned().unwrap_or_default());
        classes.push(keys);
    }
    RuleShape { classes, shapes, inert }
}

/// Whether no top tuple can satisfy the equations of both rules (same
/// head symbol, hence same arity).
pub fn shapes_conflict(a: &RuleShape, b: &RuleShape, arity: usize) -> bool {
    if a.inert || b.inert {
        return true;
    }
    let n = arity + 1;
    let mut uf = Uf::new(n);
    for rs in [a, b] {
        for cls in &rs.classes {
            for k in &cls[1..] {
                uf.union(key_index(cls[0], arity), key_index(*k, arity));
            }
        }
    }
    let mut merged: BTreeMap<usize, Shape> = BTreeMap::new();
    for rs in [a, b] {
        for (cls, s) in rs.classes.iter().zip(&rs.shapes) {
            let r = uf.find(key_index(cls[0], arity));
            let cur = merged.remove(&r).unwrap_or_default();
            match cur.merge(s) {
                Some(m) => {
                    merged.insert(r, m);
                }
                None => return true,
            }
        }
    }
    false
}

/// One value of the classic profile: the letter a top variable is forced
/// to expose, ε, or unconstrained (⊥).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ProfileValue {
    Letter(char),
    Epsilon,
    Bottom,
}

impl ProfileValue {
    /// Two profile values conflict iff both are constrained and differ.
    pub fn conflicts(self, other: ProfileValue) -> bool {
        self != ProfileValue::Bottom && other != ProfileValue::Bottom && self != other
    }
}

/// The classic profile of an OLLA rule, indexed by head position followed by
/// univ; built from the equation labels of the rule.
pub fn profile(rule: &Rule, labels: &[(usize, Option<EqLabel>)]) -> Vec<ProfileValue> {
    let keys = all_keys(rule.head_args.len());
    keys.iter()
        .map(|k| {
            let v = match k {
                Key::Pos(i) => rule.head_args[*i],
                Key::Univ => UNIVERSE,
            };
            let mut out = ProfileValue::Bottom;
            for l in labels.iter().filter_map(|(_, l)| l.as_ref()).filter(|l| l.top == v) {
                match l.form {
                    EqForm::Delete(Some((_, a))) => out = ProfileValue::Letter(a),
                    EqForm::Epsilon if out == ProfileValue::Bottom => out = ProfileValue::Epsilon,
                    _ => {}
                }
            }
            out
        })
        .collect()
}

/// Whether two classic profiles conflict at some position.
pub fn profiles_conflict(a: &[ProfileValue], b: &[ProfileValue]) -> bool {
    a.iter().zip(b).any(|(x, y)| x.conflicts(*y))
}

/// Shapes of all rules.
pub fn program_shapes(p: &Program) -> Vec<RuleShape> {
    p.rules.iter().map(rule_shape).collect()
}
