//! Bottom-up evaluation: all relations start empty and every rule is
//! applied until nothing changes.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::time::Instant;

use crate::compilers::ConstraintMatcher;
use crate::error::{Error, Result};
use crate::eval::{Budget, Verdict};
use crate::matching::for_each_match;
use crate::program::{Atom, Program, Rule, Substitution, VarId};
use crate::word::{FactorId, FactorTable};

type Tuple = Vec<FactorId>;

/// Interpretations of all relation symbols over the factors of one word.
#[derive(Clone, Debug)]
pub struct RelationStore {
    pub table: FactorTable,
    names: Vec<String>,
    sets: Vec<HashSet<Tuple>>,
    tuples: Vec<Vec<Tuple>>,
    /// Hash indexes on bound argument positions, built on demand and
    /// extended lazily as tuples arrive.
    indexes: RefCell<HashMap<(usize, u64), Index>>,
    /// Number of rounds run, including the final one that added nothing.
    pub iterations: usize,
    /// Total number of tuples after each round.
    pub history: Vec<usize>,
}

impl RelationStore {
    fn new(p: &Program, table: FactorTable) -> Self {
        let n = p.relations.len();
        RelationStore {
            table,
            names: p.relations.iter().map(|r| r.name.clone()).collect(),
            sets: vec![HashSet::new(); n],
            tuples: vec![Vec::new(); n],
            indexes: RefCell::new(HashMap::new()),
            iterations: 0,
            history: Vec::new(),
        }
    }

    fn insert(&mut self, rel: usize, t: Tuple) -> bool {
        if self.sets[rel].insert(t.clone()) {
            self.tuples[rel].push(t);
            true
        } else {
            false
        }
    }

    /// Total number of tuples.
    pub fn len(&self) -> usize {
        self.tuples.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, rel: usize, t: &[FactorId]) -> bool {
        self.sets[rel].contains(t)
    }

    /// Tuples of `rel` in insertion order.
    pub fn tuples(&self, rel: usize) -> &[Tuple] {
        &self.tuples[rel]
    }

    /// Positions of the tuples of `rel` whose components at the positions
    /// in `mask` equal `key`.
    fn lookup(&self, rel: usize, mask: u64, key: &[FactorId]) -> Vec<usize> {
        let mut idx = self.indexes.borrow_mut();
        let ix = idx.entry((rel, mask)).or_default();
        let tuples = &self.tuples[rel];
        while ix.built < tuples.len() {
            let t = &tuples[ix.built];
            let k: Vec<FactorId> = (0..t.len()).filter(|i| mask >> i & 1 == 1).map(|i| t[i]).collect();
            ix.map.entry(k).or_default().push(ix.built);
            ix.built += 1;
        }
        ix.map.get(key).cloned().unwrap_or_default()
    }

    /// Tuples of the relation called `name`, as sorted strings.
    pub fn relation(&self, name: &str) -> Option<Vec<Vec<String>>> {
        let r = self.names.iter().position(|n| n == name)?;
        Some(self.strings(r))
    }

    fn strings(&self, r: usize) -> Vec<Vec<String>> {
        let mut v: Vec<Vec<String>> =
            self.tuples[r].iter().map(|t| t.iter().map(|&f| self.table.text(f)).collect()).collect();
        v.sort();
        v
    }

    /// Contents keyed by relation name, with factors as strings.
    pub fn snapshot(&self) -> BTreeMap<String, Vec<Vec<String>>> {
        (0..self.names.len()).map(|r| (self.names[r].clone(), self.strings(r))).collect()
    }

    /// `{"relations": {"R": [["ab", "b"], …]}}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "relations": self.snapshot() })
    }

    /// Whether the nullary `Ans` holds.
    pub fn accepts(&self, p: &Program) -> bool {
        self.contains(p.ans(), &[])
    }

    /// Whether the per-round sizes never decrease.
    pub fn is_monotone(&self) -> bool {
        self.history.windows(2).all(|w| w[0] <= w[1])
    }

    /// Every stored component is a valid factor id of the word.
    pub fn all_factors(&self) -> bool {
        let n = self.table.len() as FactorId;
        self.tuples.iter().flatten().flatten().all(|&f| f < n)
    }
}

#[derive(Clone, Debug, Default)]
struct Index {
    built: usize,
    map: HashMap<Vec<FactorId>, Vec<usize>>,
}

/// Options of the bottom-up evaluator.
#[derive(Clone, Copy, Debug, Default)]
pub struct FixpointOptions {
    pub budget: Budget,
    pub semi_naive: bool,
}

/// Naive evaluation with the default budget.
pub fn evaluate(p: &Program, w: &str) -> Result<RelationStore> {
    evaluate_with(p, w, FixpointOptions::default())
}

/// Semi-naive evaluation with the default budget.
pub fn evaluate_semi_naive(p: &Program, w: &str) -> Result<RelationStore> {
    evaluate_with(p, w, FixpointOptions { semi_naive: true, ..Default::default() })
}

/// Accept iff `()` ∈ Ans at the fixpoint.
pub fn model_check(p: &Program, w: &str) -> Result<Verdict> {
    model_check_with(p, w, FixpointOptions::default())
}

pub fn model_check_with(p: &Program, w: &str, opts: FixpointOptions) -> Result<Verdict> {
    if !p.is_boolean() {
        return Err(Error::Precondition(format!(
            "model checking needs a Boolean program, but Ans has arity {}",
            p.arity(p.ans())
        )));
    }
    let store = evaluate_with(p, w, opts)?;
    Ok(Verdict::from_bool(store.accepts(p)))
}

/// Runs the fixpoint iteration.
pub fn evaluate_with(p: &Program, w: &str, opts: FixpointOptions) -> Result<RelationStore> {
    let table = FactorTable::intern(w, &p.alphabet)?;
    let mut store = RelationStore::new(p, table);
    let plans: Vec<Plan> = p.rules.iter().map(|r| Plan::new(r, None)).collect();
    let delta_plans: Vec<Vec<(usize, Plan)>> = p
        .rules
        .iter()
        .map(|r| r.relation_atoms().map(|(i, _, _)| (i, Plan::new(r, Some(i)))).collect())
        .collect();
    let matchers: Vec<Vec<Option<ConstraintMatcher>>> = p
        .rules
        .iter()
        .map(|r| {
            r.body
                .iter()
                .map(|a| match a {
                    Atom::Drx { regex, .. } => Some(ConstraintMatcher::new(regex)),
                    _ => None,
                })
                .collect()
        })
        .collect();
    let max_arity = p.relations.iter().map(|r| r.arity).max().unwrap_or(0);
    let bound = (store.table.len() as f64).powi(max_arity as i32) * p.relations.len() as f64 + 1.0;
    let start = Instant::now();
    let mut drx_cache: HashMap<(usize, usize, FactorId), bool> = HashMap::new();
    // tuples added in the previous round, per relation
    let mut delta: Vec<Vec<Tuple>> = vec![Vec::new(); p.relations.len()];
    loop {
        store.iterations += 1;
        if store.iterations as f64 > bound {
            return Err(Error::Internal(format!(
                "fixpoint iteration exceeded its bound of {bound} rounds"
            )));
        }
        let mut fresh: Vec<(usize, Tuple)> = Vec::new();
        for (ri, rule) in p.rules.iter().enumerate() {
            let first = store.iterations == 1;
            let runs: Vec<(&Plan, Option<usize>)> = if !opts.semi_naive || first {
                vec![(&plans[ri], None)]
            } else {
                delta_plans[ri].iter().map(|(a, plan)| (plan, Some(*a))).collect()
            };
            for (plan, delta_atom) in runs {
                let mut j = Join {
                    rule,
                    table: &store.table,
                    store: &store,
                    delta: &delta,
                    delta_atom,
                    matchers: &matchers[ri],
                    drx_cache: &mut drx_cache,
                    rule_index: ri,
                    out: Vec::new(),
                    steps: 0,
                    start,
                    budget: opts.budget,
                    err: None,
                };
                let theta = Substitution::with_universe(rule.var_count(), &store.table);
                j.run(&plan.order, 0, &theta);
                if let Some(e) = j.err {
                    return Err(e);
                }
                fresh.extend(j.out.into_iter().map(|t| (rule.head, t)));
            }
        }
        let mut new_delta: Vec<Vec<Tuple>> = vec![Vec::new(); p.relations.len()];
        for (rel, t) in fresh {
            if store.insert(rel, t.clone()) {
                new_delta[rel].push(t);
            }
        }
        let before = store.history.last().copied().unwrap_or(0);
        store.history.push(store.len());
        if store.len() < before {
            return Err(Error::Internal("relation store shrank during iteration".into()));
        }
        if store.len() > opts.budget.max_tuples {
            return Err(Error::Budget(format!("more than {} tuples derived", opts.budget.max_tuples)));
        }
        if new_delta.iter().all(Vec::is_empty) {
            return Ok(store);
        }
        delta = new_delta;
    }
}

/// A body evaluation order.
struct Plan {
    order: Vec<usize>,
}

impl Plan {
    /// Greedy most-bound-first ordering; the delta atom (if any) goes first.
    fn new(rule: &Rule, first: Option<usize>) -> Plan {
        let mut bound = vec![false; rule.var_count()];
        bound[crate::program::UNIVERSE] = true;
        let mut left: Vec<usize> = (0..rule.body.len()).collect();
        let mut order = Vec::with_capacity(left.len());
        if let Some(a) = first {
            left.retain(|&i| i != a);
            order.push(a);
            for v in rule.body[a].vars() {
                bound[v] = true;
            }
        }
        while !left.is_empty() {
            let (pos, _) = left
                .iter()
                .enumerate()
                .min_by_key(|(_, &i)| (cost(&rule.body[i], &bound), i))
                .expect("non-empty");
            let i = left.remove(pos);
            for v in rule.body[i].vars() {
                bound[v] = true;
            }
            order.push(i);
        }
        Plan { order }
    }
}

fn cost(atom: &Atom, bound: &[bool]) -> (u8, usize) {
    let unbound = atom.vars().into_iter().filter(|&v| !bound[v]).collect::<HashSet<VarId>>().len();
    let class = if unbound == 0 {
        0
    } else {
        match atom {
            Atom::Eq(e) if bound[e.lhs] => 1,
            Atom::Eq(e) if e.rhs.vars().iter().all(|&v| bound[v]) => 1,
            Atom::Rel { args, .. } if args.iter().any(|&v| bound[v]) => 2,
            Atom::Rel { .. } => 3,
            Atom::Eq(_) => 4,
            Atom::Drx { .. } => 5,
        }
    };
    (class, unbound)
}

struct Join<'a> {
    rule: &'a Rule,
    table: &'a FactorTable,
    store: &'a RelationStore,
    delta: &'a [Vec<Tuple>],
    delta_atom: Option<usize>,
    matchers: &'a [Option<ConstraintMatcher>],
    drx_cache: &'a mut HashMap<(usize, usize, FactorId), bool>,
    rule_index: usize,
    out: Vec<Tuple>,
    steps: usize,
    start: Instant,
    budget: Budget,
    err: Option<Error>,
}

impl Join<'_> {
    fn run(&mut self, order: &[usize], k: usize, theta: &Substitution) {
        if self.err.is_some() {
            return;
        }
        self.steps += 1;
        if self.steps.is_multiple_of(4096) && self.start.elapsed() > self.budget.max_time {
            self.err = Some(Error::Budget(format!("fixpoint evaluation exceeded {:?}", self.budget.max_time)));
            return;
        }
        if k == order.len() {
            let t: Tuple = self.rule.head_args.iter().map(|&v| theta.get(v).expect("head variable bound")).collect();
            self.out.push(t);
            return;
        }
        let ai = order[k];
        let rule = self.rule;
        match &rule.body[ai] {
            Atom::Eq(eq) => {
                let table = self.table;
                for_each_match(eq, theta, table, &mut |t| self.run(order, k + 1, t));
            }
            Atom::Rel { rel, args } => {
                let from_delta = self.delta_atom == Some(ai);
                let mut mask = 0u64;
                let mut key = Vec::new();
                for (i, &v) in args.iter().enumerate() {
                    if let Some(f) = theta.get(v) {
                        mask |= 1 << i;
                        key.push(f);
                    }
                }
                let src: &[Tuple] = if from_delta { &self.delta[*rel] } else { self.store.tuples(*rel) };
                let hits: Vec<usize> = if from_delta || mask == 0 || args.len() > 64 {
                    (0..src.len()).collect()
                } else {
                    self.store.lookup(*rel, mask, &key)
                };
                let mut t2 = theta.clone();
                'tuples: for i in hits {
                    let tup = &src[i];
                    t2.bindings.clone_from(&theta.bindings);
                    for (&v, &f) in args.iter().zip(tup) {
                        match t2.get(v) {
                            Some(g) if g != f => continue 'tuples,
                            Some(_) => {}
                            None => t2.set(v, f),
                        }
                    }
                    self.run(order, k + 1, &t2);
                }
            }
            Atom::Drx { var, .. } => {
                let m = self.matchers[ai].as_ref().expect("matcher for regex atom");
                let cands: Vec<FactorId> = match theta.get(*var) {
                    Some(f) => vec![f],
                    None => self.table.ids().collect(),
                };
                for f in cands {
                    let table = self.table;
                    let ok = *self
                        .drx_cache
                        .entry((self.rule_index, ai, f))
                        .or_insert_with(|| m.is_match(table.get(f)));
                    if ok {
                        let mut t2 = theta.clone();
                        t2.set(*var, f);
                        self.run(order, k + 1, &t2);
                    }
                }
            }
        }
    }
}
