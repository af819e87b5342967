//! Goal-directed evaluation.
//!
//! The deterministic evaluator follows a single chain of configurations
//! (a relation symbol plus argument values) from `Ans`, picking at each step
//! the one rule whose equations can hold, and computing the arguments of the
//! next configuration by solving equations with a single unknown. Values are
//! spans of the input word compared by content, so no factor table is
//! built. Arguments that cannot be computed yet are deferred and filled in
//! when the chain returns. Whenever a choice would depend on a deferred
//! value the evaluator gives up and the memoized evaluator takes over.
//!
//! The memoized evaluator is a tabled search over ground goals that works
//! for every program.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::time::Instant;

use serde::Serialize;

use crate::analysis::deps::{dependency_info, recursive_atoms, DependencyInfo};
use crate::analysis::shape::{rule_shape, Key};
use crate::analysis::{classify, FragmentReport, Tier};
use crate::compilers::{drx_match, ConstraintMatcher};
use crate::drx::DrxAst;
use crate::error::{Error, Result};
use crate::eval::{check_word, Budget, Verdict};
use crate::matching::for_each_match;
use crate::program::{Atom, Equation, Item, Program, RelId, Substitution, VarId, UNIVERSE};
use crate::word::{FactorId, FactorTable};

/// A factor of the input word, given by its position; two spans denote the
/// same value iff their contents are equal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Span {
    pub start: u32,
    pub end: u32,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start: start as u32, end: end as u32 }
    }

    pub fn len(self) -> usize {
        (self.end - self.start) as usize
    }

    pub fn is_empty(self) -> bool {
        self.start == self.end
    }

    pub fn slice(self, w: &[char]) -> &[char] {
        &w[self.start as usize..self.end as usize]
    }
}

const MOD: u64 = (1 << 61) - 1;
const BASE: u64 = 1_000_003;

fn mulmod(a: u64, b: u64) -> u64 {
    let p = (a as u128) * (b as u128);
    let r = ((p >> 61) as u64) + ((p as u64) & MOD);
    if r >= MOD {
        r - MOD
    } else {
        r
    }
}

fn addmod(a: u64, b: u64) -> u64 {
    let r = a + b;
    if r >= MOD {
        r - MOD
    } else {
        r
    }
}

/// The input word with prefix hashes for O(1) content fingerprints.
struct Text {
    w: Vec<char>,
    prefix: Vec<u64>,
    pow: Vec<u64>,
    /// First occurrence of each letter.
    first: HashMap<char, usize>,
}

impl Text {
    fn new(w: Vec<char>) -> Self {
        let mut prefix = Vec::with_capacity(w.len() + 1);
        let mut pow = Vec::with_capacity(w.len() + 1);
        prefix.push(0);
        pow.push(1);
        let mut first = HashMap::new();
        for (i, &c) in w.iter().enumerate() {
            prefix.push(addmod(mulmod(prefix[i], BASE), c as u64 + 1));
            pow.push(mulmod(pow[i], BASE));
            first.entry(c).or_insert(i);
        }
        Text { w, prefix, pow, first }
    }

    fn n(&self) -> usize {
        self.w.len()
    }

    fn full(&self) -> Span {
        Span::new(0, self.n())
    }

    fn hash(&self, s: Span) -> u64 {
        let (a, b) = (s.start as usize, s.end as usize);
        addmod(self.prefix[b], MOD - mulmod(self.prefix[a], self.pow[b - a]))
    }

    fn same(&self, a: Span, b: Span) -> bool {
        a.len() == b.len() && (a.start == b.start || a.slice(&self.w) == b.slice(&self.w))
    }

    fn at(&self, i: usize) -> char {
        self.w[i]
    }

    fn fingerprint(&self, v: &[Option<Span>]) -> Vec<Option<(u32, u64)>> {
        v.iter().map(|s| s.map(|s| (s.len() as u32, self.hash(s)))).collect()
    }

    fn same_tuple(&self, a: &[Option<Span>], b: &[Option<Span>]) -> bool {
        a.len() == b.len()
            && a.iter().zip(b).all(|(x, y)| match (x, y) {
                (Some(x), Some(y)) => self.same(*x, *y),
                (None, None) => true,
                _ => false,
            })
    }

    fn render(&self, s: Span) -> String {
        s.slice(&self.w).iter().collect()
    }
}

/// Outcome of solving one equation.
enum Solved {
    /// The equation cannot hold.
    Fail,
    /// All variables were known and the equation holds.
    Holds,
    /// The single unknown variable is forced to this value.
    Bound(VarId, Span),
    /// Two or more unknowns, or an unknown on both sides.
    Stuck,
}

/// Solves `eq` for its only unknown variable.
///
/// The length of the unknown is forced by the lengths of the known parts;
/// its value is read off the first occurrence and checked against all
/// others. When the left-hand side is the unknown, the image of the right
/// side is located in the word. Returns `Ok(None)` if no value works.
/// Fails with a precondition error unless exactly one variable is unknown.
pub fn solve_unique_equation(eq: &Equation, bindings: &[Option<Span>], w: &[char]) -> Result<Option<(VarId, Span)>> {
    let unknown: HashSet<VarId> = eq.vars().into_iter().filter(|&v| bindings[v].is_none()).collect();
    if unknown.len() != 1 {
        return Err(Error::precondition(format!(
            "solve_unique_equation needs exactly one unknown variable, found {}",
            unknown.len()
        )));
    }
    let text = Text::new(w.to_vec());
    match solve(eq, bindings, &text) {
        Solved::Bound(v, s) => Ok(Some((v, s))),
        Solved::Fail => Ok(None),
        Solved::Holds => unreachable!("one variable is unknown"),
        Solved::Stuck => Err(Error::precondition("the unknown occurs on both sides of the equation")),
    }
}

fn solve(eq: &Equation, b: &[Option<Span>], text: &Text) -> Solved {
    let mut unknown: Option<VarId> = None;
    for v in eq.vars() {
        if b[v].is_none() {
            match unknown {
                None => unknown = Some(v),
                Some(u) if u == v => {}
                Some(_) => return Solved::Stuck,
            }
        }
    }
    let items = &eq.rhs.items;
    match (unknown, b[eq.lhs]) {
        (None, Some(l)) => {
            if match_rhs(items, b, l, None, text).is_some() {
                Solved::Holds
            } else {
                Solved::Fail
            }
        }
        (Some(u), Some(l)) => {
            let m = eq.rhs.occurrences(u);
            let ground: usize = items
                .iter()
                .map(|it| match it {
                    Item::Term(_) => 1,
                    Item::Var(v) if *v == u => 0,
                    Item::Var(v) => b[*v].expect("known").len(),
                })
                .sum();
            if l.len() < ground || !(l.len() - ground).is_multiple_of(m) {
                return Solved::Fail;
            }
            let k = (l.len() - ground) / m;
            match match_rhs(items, b, l, Some((u, k)), text) {
                Some(s) => Solved::Bound(u, s.expect("unknown occurs in the pattern")),
                None => Solved::Fail,
            }
        }
        (Some(u), None) => {
            if eq.rhs.contains_var(u) {
                return Solved::Stuck;
            }
            match locate(items, b, text) {
                Some(s) => Solved::Bound(u, s),
                None => Solved::Fail,
            }
        }
        (None, None) => unreachable!("an unbound lhs is unknown"),
    }
}

/// Matches the pattern against the value `l`; `unknown` gives the variable
/// still to be determined and its forced length. Returns the value found
/// for it (or `Some(None)` without unknown) on success.
fn match_rhs(items: &[Item], b: &[Option<Span>], l: Span, unknown: Option<(VarId, usize)>, text: &Text) -> Option<Option<Span>> {
    let mut off = l.start as usize;
    let end = l.end as usize;
    let mut found: Option<Span> = None;
    for it in items {
        match it {
            Item::Term(c) => {
                if off >= end || text.at(off) != *c {
                    return None;
                }
                off += 1;
            }
            Item::Var(v) => {
                let want = match unknown {
                    Some((u, k)) if u == *v => match found {
                        Some(s) => s,
                        None => {
                            if off + k > end {
                                return None;
                            }
                            let s = Span::new(off, off + k);
                            found = Some(s);
                            off += k;
                            continue;
                        }
                    },
                    _ => b[*v].expect("known"),
                };
                if off + want.len() > end || !text.same(want, Span::new(off, off + want.len())) {
                    return None;
                }
                off += want.len();
            }
        }
    }
    (off == end).then_some(found)
}

/// Finds a span of the word whose content is the image of a ground pattern.
fn locate(items: &[Item], b: &[Option<Span>], text: &Text) -> Option<Span> {
    let n = text.n();
    let total: usize = items
        .iter()
        .map(|it| match it {
            Item::Term(_) => 1,
            Item::Var(v) => b[*v].expect("known").len(),
        })
        .sum();
    if total > n {
        return None;
    }
    if total == 0 {
        return Some(Span::new(0, 0));
    }
    let fits = |start: usize| match_rhs(items, b, Span::new(start, start + total), None, text).is_some();
    // anchor on the first known variable: the image usually sits right there
    let mut off = 0;
    for it in items {
        match it {
            Item::Term(_) => off += 1,
            Item::Var(v) => {
                let s = b[*v].expect("known");
                if s.start as usize >= off && s.start as usize - off + total <= n && fits(s.start as usize - off) {
                    return Some(Span::new(s.start as usize - off, s.start as usize - off + total));
                }
                break;
            }
        }
    }
    if let [Item::Term(c)] = items {
        return text.first.get(c).map(|&i| Span::new(i, i + 1));
    }
    // rolling-hash scan over all windows
    let mut h = 0u64;
    for it in items {
        match it {
            Item::Term(c) => h = addmod(mulmod(h, BASE), *c as u64 + 1),
            Item::Var(v) => {
                let s = b[*v].expect("known");
                h = addmod(mulmod(h, text.pow[s.len()]), text.hash(s));
            }
        }
    }
    (0..=n - total).find(|&i| text.hash(Span::new(i, i + total)) == h && fits(i)).map(|i| Span::new(i, i + total))
}

/// Small fixed-size bit set over the rules of one symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn empty(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64).max(1)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn or(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a | b).collect())
    }
    fn and_assign(&mut self, o: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&o.0) {
            *a &= b;
        }
    }
    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(wi, &word)| (0..64).filter(move |b| word >> b & 1 == 1).map(move |b| wi * 64 + b))
    }
}

/// Which observation about an argument a lookup field keys on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Field {
    First,
    Last,
    /// The letter following the value, when the value is a prefix of the word.
    LookAfter,
    /// The letter preceding the value, when the value is a suffix of the word.
    LookBefore,
}

#[derive(Clone, Debug)]
struct FieldIndex {
    key: Key,
    field: Field,
    by_value: HashMap<Option<char>, Bits>,
    wildcard: Bits,
}

#[derive(Clone, Debug)]
struct SymbolLookup {
    rules: Vec<usize>,
    live: Bits,
    fields: Vec<FieldIndex>,
}

/// Rule selection table: for every symbol, a map from observed letters
/// (first/last letter and lookahead letters of the arguments) to the rules
/// that can still apply.
#[derive(Clone, Debug)]
pub struct RuleLookup {
    symbols: Vec<SymbolLookup>,
    /// Number of (rule, argument, field) entries created.
    pub entries: usize,
}

impl RuleLookup {
    /// Upper bound on the entry count: 4 fields per argument per rule.
    pub fn entry_bound(p: &Program) -> usize {
        let max_arity = p.relations.iter().map(|r| r.arity).max().unwrap_or(0);
        4 * (max_arity + 1) * p.rules.len().max(1) * (p.alphabet.len() + 2)
    }

    fn candidates(&self, sym: RelId, args: &[Option<Span>], text: &Text) -> Vec<usize> {
        let s = &self.symbols[sym];
        let mut cand = s.live.clone();
        for f in &s.fields {
            let value = match f.key {
                Key::Pos(i) => args[i],
                Key::Univ => Some(text.full()),
            };
            let Some(v) = value else { continue };
            let (a, b, n) = (v.start as usize, v.end as usize, text.n());
            let obs = match f.field {
                Field::First => (!v.is_empty()).then(|| text.at(a)),
                Field::Last => (!v.is_empty()).then(|| text.at(b - 1)),
                Field::LookAfter if a == 0 => (b < n).then(|| text.at(b)),
                Field::LookBefore if b == n => (a > 0).then(|| text.at(a - 1)),
                _ => continue,
            };
            let allowed = match f.by_value.get(&obs) {
                Some(bits) => bits.or(&f.wildcard),
                None => f.wildcard.clone(),
            };
            cand.and_assign(&allowed);
        }
        cand.iter().map(|i| s.rules[i]).collect()
    }
}

/// Builds the rule selection table of a deterministic program.
pub fn build_rule_lookup(p: &Program) -> Result<RuleLookup> {
    let rep = classify(p);
    if !(rep.flags.dolla || rep.flags.dolla_plus) {
        return Err(Error::precondition("rule lookup tables need a DOLLA or DOLLA+ program"));
    }
    Ok(lookup_unchecked(p))
}

fn lookup_unchecked(p: &Program) -> RuleLookup {
    let mut entries = 0;
    let mut symbols = Vec::with_capacity(p.relations.len());
    for r in 0..p.relations.len() {
        let rules = p.rules_for(r);
        let n = rules.len();
        let mut live = Bits::empty(n);
        let mut fields: Vec<FieldIndex> = Vec::new();
        // (argument, field) → rules with the letter they require there
        let mut cells: BTreeMap<(usize, usize), RuleLetters> = BTreeMap::new();
        for (li, &ri) in rules.iter().enumerate() {
            let shape = rule_shape(&p.rules[ri]);
            if shape.inert {
                continue;
            }
            live.set(li);
            let arity = p.arity(r);
            for (cls, s) in shape.classes.iter().zip(&shape.shapes) {
                for &k in cls {
                    let ki = match k {
                        Key::Pos(i) => i,
                        Key::Univ => arity,
                    };
                    let vals = [s.first(), s.last(), s.look_after.map(Some), s.look_before.map(Some)];
                    for (fi, v) in vals.into_iter().enumerate() {
                        entries += 1;
                        cells.entry((ki, fi)).or_default().push((li, v));
                    }
                }
            }
        }
        let arity = p.arity(r);
        for ((ki, fi), list) in cells {
            if list.iter().all(|(_, v)| v.is_none()) {
                continue;
            }
            let mut idx = FieldIndex {
                key: if ki == arity { Key::Univ } else { Key::Pos(ki) },
                field: [Field::First, Field::Last, Field::LookAfter, Field::LookBefore][fi],
                by_value: HashMap::new(),
                wildcard: Bits::empty(n),
            };
            let mut constrained = Bits::empty(n);
            for (li, v) in list {
                match v {
                    Some(c) => {
                        idx.by_value.entry(c).or_insert_with(|| Bits::empty(n)).set(li);
                        constrained.set(li);
                    }
                    None => idx.wildcard.set(li),
                }
            }
            // rules without an entry for this key (other alias layouts) stay unconstrained
            for li in live.iter() {
                if !constrained.iter().any(|x| x == li) {
                    idx.wildcard.set(li);
                }
            }
            fields.push(idx);
        }
        symbols.push(SymbolLookup { rules, live, fields });
    }
    assert!(entries <= RuleLookup::entry_bound(p), "rule lookup exceeded its entry bound");
    RuleLookup { symbols, entries }
}

/// One rule application.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub rule: usize,
    pub head: String,
    /// Variable values at the time the rule was chosen (`null` if deferred).
    pub bindings: BTreeMap<String, Option<String>>,
}

/// What a top-down evaluation did.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EvalTrace {
    /// Rule applications in order (only recorded when tracing).
    pub steps: Vec<TraceStep>,
    /// Applications of rules whose head lies on a recursion cycle.
    pub recursive_steps: usize,
    /// All rule applications.
    pub rule_applications: usize,
    /// Calls of non-recursive body atoms.
    pub subroutine_calls: usize,
    /// Goals tabled by the memoized evaluator.
    pub goals: usize,
    /// Why the deterministic evaluator handed over to the memoized one.
    pub fallback: Option<String>,
}

/// Options of the top-down evaluators.
#[derive(Clone, Copy, Debug)]
pub struct TopDownOptions {
    pub trace: bool,
    /// Re-check every equation of every applied rule before accepting.
    pub verify: bool,
    pub budget: Budget,
}

impl Default for TopDownOptions {
    fn default() -> Self {
        TopDownOptions { trace: false, verify: true, budget: Budget::default() }
    }
}

/// Verdict plus trace and the evaluator that produced it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Outcome {
    pub verdict: Verdict,
    pub tier: Tier,
    pub trace: EvalTrace,
}

enum Stop {
    Fallback(String),
    Err(Error),
}

impl From<Error> for Stop {
    fn from(e: Error) -> Self {
        Stop::Err(e)
    }
}

type Flow<T> = std::result::Result<T, Stop>;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Deterministic,
    StrictlyDecreasing,
}

struct RuleInfo {
    rec_atom: Option<usize>,
    eqs: Vec<usize>,
    drx: Vec<usize>,
    subs: Vec<usize>,
    /// Recursive atom plus at least one equation.
    decreasing: bool,
}

struct Frame {
    rule: usize,
    b: Vec<Option<Span>>,
    eqs: Vec<usize>,
    drx: Vec<usize>,
    subs: Vec<usize>,
}

impl Frame {
    fn settled(&self) -> bool {
        self.eqs.is_empty() && self.drx.is_empty() && self.subs.is_empty()
    }
}

type RuleLetters = Vec<(usize, Option<Option<char>>)>;

type CallKey = (RelId, Vec<Option<(u32, u64)>>);

/// Memoized subroutine results: arguments and, if the call succeeded, the
/// values of all arguments.
type CallResults = Vec<(Vec<Option<Span>>, Option<Vec<Span>>)>;

/// A program prepared for chain evaluation: rule summaries, the lookup
/// table and regex matchers, shared by all words.
pub struct ChainEvaluator<'p> {
    p: &'p Program,
    dep: DependencyInfo,
    info: Vec<RuleInfo>,
    lookup: RuleLookup,
    matchers: HashMap<(usize, usize), ConstraintMatcher>,
    mode: Mode,
    tier: Tier,
}

impl<'p> ChainEvaluator<'p> {
    /// Chain evaluation with cycle detection, for DOLLA and DOLLA+ programs.
    pub fn deterministic(p: &'p Program) -> Result<Self> {
        let rep = classify(p);
        require_tier(&rep, &[Tier::DeterministicTopdown, Tier::SdFast], "the deterministic evaluator")?;
        Ok(Self::build(p, Mode::Deterministic, Tier::DeterministicTopdown))
    }

    /// Chain evaluation with a step budget instead of cycle detection, for
    /// strictly decreasing programs.
    pub fn strictly_decreasing(p: &'p Program) -> Result<Self> {
        let rep = classify(p);
        require_tier(&rep, &[Tier::SdFast], "the strictly-decreasing evaluator")?;
        Ok(Self::build(p, Mode::StrictlyDecreasing, Tier::SdFast))
    }

    fn build(p: &'p Program, mode: Mode, tier: Tier) -> Self {
        let dep = dependency_info(p);
        let mut matchers = HashMap::new();
        let info = p
            .rules
            .iter()
            .enumerate()
            .map(|(ri, rule)| {
                let rec = recursive_atoms(rule, &dep);
                let rec_atom = rec.first().copied();
                let mut ri_ = RuleInfo { rec_atom, eqs: Vec::new(), drx: Vec::new(), subs: Vec::new(), decreasing: false };
                for (ai, atom) in rule.body.iter().enumerate() {
                    match atom {
                        Atom::Eq(_) => ri_.eqs.push(ai),
                        Atom::Drx { regex, .. } => {
                            ri_.drx.push(ai);
                            matchers.insert((ri, ai), ConstraintMatcher::new(regex));
                        }
                        Atom::Rel { .. } if Some(ai) != rec_atom => ri_.subs.push(ai),
                        Atom::Rel { .. } => {}
                    }
                }
                ri_.decreasing = rec_atom.is_some() && !ri_.eqs.is_empty();
                ri_
            })
            .collect();
        ChainEvaluator { p, dep, info, lookup: lookup_unchecked(p), matchers, mode, tier }
    }

    /// The rule selection table in use.
    pub fn lookup(&self) -> &RuleLookup {
        &self.lookup
    }

    /// Evaluates the program on `w`, handing over to the memoized evaluator
    /// when a rule choice depends on values not computed yet.
    pub fn eval(&self, w: &str, opts: TopDownOptions) -> Result<Outcome> {
        let p = self.p;
        let chars = check_word(p, w)?;
        let mut c = Chains {
            e: self,
            p,
            text: Text::new(chars),
            opts,
            start: Instant::now(),
            calls: HashMap::new(),
            applied: Vec::new(),
            trace: EvalTrace::default(),
        };
        match c.chain(p.ans(), Vec::new()) {
            Ok(r) => {
                if r.is_some() && opts.verify {
                    c.verify()?;
                }
                Ok(Outcome { verdict: Verdict::from_bool(r.is_some()), tier: self.tier, trace: c.trace })
            }
            Err(Stop::Err(e)) => Err(e),
            Err(Stop::Fallback(why)) => {
                let mut out = eval_memoized_with(p, w, opts)?;
                out.trace.fallback = Some(why);
                Ok(out)
            }
        }
    }
}

struct Chains<'a> {
    e: &'a ChainEvaluator<'a>,
    p: &'a Program,
    text: Text,
    opts: TopDownOptions,
    start: Instant,
    calls: HashMap<CallKey, CallResults>,
    applied: Vec<(usize, Vec<Option<Span>>)>,
    trace: EvalTrace,
}

impl<'a> Chains<'a> {
    fn check_time(&self) -> Flow<()> {
        if self.start.elapsed() > self.opts.budget.max_time {
            return Err(Stop::Err(Error::Budget(format!("evaluation exceeded {:?}", self.opts.budget.max_time))));
        }
        Ok(())
    }

    /// Binds head arguments and resolves what can be resolved before the
    /// recursive call. `None` if the rule cannot apply.
    fn prepare(&mut self, ri: usize, args: &[Option<Span>]) -> Flow<Option<Frame>> {
        let rule = &self.p.rules[ri];
        let mut b = vec![None; rule.var_count()];
        b[UNIVERSE] = Some(self.text.full());
        for (&v, a) in rule.head_args.iter().zip(args) {
            if let Some(s) = a {
                match b[v] {
                    Some(old) if !self.text.same(old, *s) => return Ok(None),
                    _ => b[v] = Some(*s),
                }
            }
        }
        let info = &self.e.info[ri];
        let mut f = Frame { rule: ri, b, eqs: info.eqs.clone(), drx: info.drx.clone(), subs: info.subs.clone() };
        let partial_calls = info.rec_atom.is_none();
        Ok(self.resolve(&mut f, partial_calls)?.then_some(f))
    }

    /// Solves pending equations, checks regex constraints and calls
    /// subroutines until nothing changes. Returns false if the rule fails.
    fn resolve(&mut self, f: &mut Frame, partial_calls: bool) -> Flow<bool> {
        let p = self.p;
        let rule = &p.rules[f.rule];
        loop {
            let mut progress = false;
            let mut i = 0;
            while i < f.eqs.len() {
                let eq = rule.body[f.eqs[i]].as_equation().expect("equation");
                match solve(eq, &f.b, &self.text) {
                    Solved::Fail => return Ok(false),
                    Solved::Holds => {
                        f.eqs.swap_remove(i);
                        progress = true;
                    }
                    Solved::Bound(v, s) => {
                        f.b[v] = Some(s);
                        f.eqs.swap_remove(i);
                        progress = true;
                    }
                    Solved::Stuck => i += 1,
                }
            }
            let mut i = 0;
            while i < f.drx.len() {
                let ai = f.drx[i];
                let Atom::Drx { var, .. } = &rule.body[ai] else { unreachable!() };
                match f.b[*var] {
                    Some(s) => {
                        if !self.e.matchers[&(f.rule, ai)].is_match(s.slice(&self.text.w)) {
                            return Ok(false);
                        }
                        f.drx.swap_remove(i);
                        progress = true;
                    }
                    None => i += 1,
                }
            }
            if progress {
                continue;
            }
            // subroutine calls: fully ground ones first, then (if allowed)
            // the one with the most known arguments
            let known = |ai: usize, b: &[Option<Span>]| match &rule.body[ai] {
                Atom::Rel { args, .. } => args.iter().filter(|&&v| b[v].is_some()).count(),
                _ => 0,
            };
            let arity = |ai: usize| match &rule.body[ai] {
                Atom::Rel { args, .. } => args.len(),
                _ => 0,
            };
            let pick = f
                .subs
                .iter()
                .enumerate()
                .filter(|(_, &ai)| partial_calls || known(ai, &f.b) == arity(ai))
                .max_by_key(|(_, &ai)| (known(ai, &f.b) == arity(ai), known(ai, &f.b)))
                .map(|(i, _)| i);
            let Some(i) = pick else { return Ok(true) };
            let ai = f.subs.swap_remove(i);
            let Atom::Rel { rel, args } = &rule.body[ai] else { unreachable!() };
            let vals: Vec<Option<Span>> = args.iter().map(|&v| f.b[v]).collect();
            match self.call(*rel, vals)? {
                None => return Ok(false),
                Some(res) => {
                    for (&v, s) in args.iter().zip(res) {
                        match f.b[v] {
                            Some(old) if !self.text.same(old, s) => return Ok(false),
                            _ => f.b[v] = Some(s),
                        }
                    }
                }
            }
        }
    }

    /// A subroutine call, memoized by argument contents.
    fn call(&mut self, rel: RelId, args: Vec<Option<Span>>) -> Flow<Option<Vec<Span>>> {
        self.trace.subroutine_calls += 1;
        let key = (rel, self.text.fingerprint(&args));
        if let Some(list) = self.calls.get(&key) {
            if let Some((_, r)) = list.iter().find(|(a, _)| self.text.same_tuple(a, &args)) {
                return Ok(r.clone());
            }
        }
        let r = self.chain(rel, args.clone())?;
        self.calls.entry(key).or_default().push((args, r.clone()));
        Ok(r)
    }

    fn record(&mut self, f: &Frame, at: usize) {
        let rule = &self.p.rules[f.rule];
        self.trace.rule_applications += 1;
        if self.e.dep.is_recursive(rule.head) {
            self.trace.recursive_steps += 1;
        }
        if self.opts.trace {
            let bindings = (0..rule.var_count())
                .filter(|&v| v != UNIVERSE)
                .map(|v| (rule.var_name(v).to_string(), f.b[v].map(|s| self.text.render(s))))
                .collect();
            self.trace.steps.insert(at, TraceStep { rule: f.rule, head: self.p.rel_name(rule.head).to_string(), bindings });
        }
    }

    /// Runs the chain from `sym(args)`; `None` if it fails, otherwise the
    /// values of all arguments.
    fn chain(&mut self, sym: RelId, args: Vec<Option<Span>>) -> Flow<Option<Vec<Span>>> {
        let mut stack: Vec<Frame> = Vec::new();
        let mut sym = sym;
        let mut args = args;
        let mut visited: HashMap<CallKey, Vec<Vec<Option<Span>>>> = HashMap::new();
        let limit = self.text.n() + self.p.relations.len() + 1;
        let mut decreasing_steps = 0usize;
        let mut flat_run = 0usize;
        let result: Option<Vec<Span>> = loop {
            self.check_time()?;
            if self.e.mode == Mode::Deterministic && self.e.dep.is_recursive(sym) {
                let key = (sym, self.text.fingerprint(&args));
                let seen = visited.entry(key).or_default();
                if seen.iter().any(|a| self.text.same_tuple(a, &args)) {
                    break None;
                }
                seen.push(args.clone());
            }
            let ground = args.iter().all(Option::is_some);
            let cands = self.e.lookup.candidates(sym, &args, &self.text);
            // subroutine chains run while candidates are prepared; the chosen
            // rule is listed before them
            let mark = self.trace.steps.len();
            let mut passing: Vec<Frame> = Vec::new();
            for ri in cands {
                if let Some(f) = self.prepare(ri, &args)? {
                    passing.push(f);
                    if passing.len() == 2 {
                        break;
                    }
                }
            }
            if passing.len() >= 2 {
                let (a, b) = (&passing[0], &passing[1]);
                if ground && a.settled() && b.settled() {
                    return Err(Stop::Err(Error::Internal(format!(
                        "rules {} and {} of {} both apply to the same arguments; the program is not deterministic",
                        a.rule,
                        b.rule,
                        self.p.rel_name(sym)
                    ))));
                }
                return Err(Stop::Fallback(format!(
                    "rule choice for {} depends on values not yet computed",
                    self.p.rel_name(sym)
                )));
            }
            let Some(f) = passing.pop() else { break None };
            self.record(&f, mark);
            let info = &self.e.info[f.rule];
            if self.e.mode == Mode::StrictlyDecreasing && info.rec_atom.is_some() {
                if info.decreasing {
                    decreasing_steps += 1;
                    flat_run = 0;
                } else {
                    flat_run += 1;
                }
                if decreasing_steps > limit || flat_run > self.p.relations.len() {
                    return Err(Stop::Err(Error::Internal(
                        "program not actually SD: the recursion exceeded its step budget".into(),
                    )));
                }
            }
            match info.rec_atom {
                Some(ai) => {
                    let Atom::Rel { rel, args: vars } = &self.p.rules[f.rule].body[ai] else { unreachable!() };
                    sym = *rel;
                    args = vars.iter().map(|&v| f.b[v]).collect();
                    stack.push(f);
                }
                None => {
                    let mut f = f;
                    if !self.resolve(&mut f, true)? {
                        break None;
                    }
                    break self.finish(f)?;
                }
            }
        };
        // unwind: every frame had exactly one applicable rule
        let Some(mut values) = result else { return Ok(None) };
        while let Some(mut f) = stack.pop() {
            let rule = &self.p.rules[f.rule];
            let ai = self.e.info[f.rule].rec_atom.expect("frames on the stack recurse");
            let Atom::Rel { args: vars, .. } = &rule.body[ai] else { unreachable!() };
            for (&v, s) in vars.iter().zip(&values) {
                match f.b[v] {
                    Some(old) if !self.text.same(old, *s) => return Ok(None),
                    _ => f.b[v] = Some(*s),
                }
            }
            if !self.resolve(&mut f, true)? {
                return Ok(None);
            }
            match self.finish(f)? {
                Some(v) => values = v,
                None => return Ok(None),
            }
        }
        Ok(Some(values))
    }

    /// Head values of a frame whose body is fully resolved.
    fn finish(&mut self, f: Frame) -> Flow<Option<Vec<Span>>> {
        if !f.settled() {
            return Err(Stop::Fallback(format!("rule {} has constraints on values that are never computed", f.rule)));
        }
        let rule = &self.p.rules[f.rule];
        let mut out = Vec::with_capacity(rule.head_args.len());
        for &v in &rule.head_args {
            match f.b[v] {
                Some(s) => out.push(s),
                None => {
                    return Err(Stop::Fallback(format!(
                        "variable {} of rule {} is never computed",
                        rule.var_name(v),
                        f.rule
                    )))
                }
            }
        }
        if self.opts.verify {
            self.applied.push((f.rule, f.b));
        }
        Ok(Some(out))
    }

    /// Re-checks every equation and constraint of every applied rule.
    fn verify(&self) -> Result<()> {
        for (ri, b) in &self.applied {
            let rule = &self.p.rules[*ri];
            for (ai, atom) in rule.body.iter().enumerate() {
                let ok = match atom {
                    Atom::Eq(eq) => {
                        eq.vars().iter().all(|&v| b[v].is_some()) && matches!(solve(eq, b, &self.text), Solved::Holds)
                    }
                    Atom::Drx { var, .. } => {
                        b[*var].is_some_and(|s| self.e.matchers[&(*ri, ai)].is_match(s.slice(&self.text.w)))
                    }
                    Atom::Rel { args, .. } => args.iter().all(|&v| b[v].is_some()),
                };
                if !ok {
                    return Err(Error::Internal(format!("re-check failed for atom {ai} of applied rule {ri}")));
                }
            }
        }
        Ok(())
    }
}

fn require_tier(rep: &FragmentReport, allowed: &[Tier], what: &str) -> Result<()> {
    if allowed.contains(&rep.tier) {
        Ok(())
    } else {
        Err(Error::precondition(format!("{what} needs tier {}, but the program's tier is {}", allowed[0], rep.tier)))
    }
}

/// Chain evaluation with cycle detection, for DOLLA and DOLLA+ programs.
pub fn eval_deterministic(p: &Program, w: &str, opts: TopDownOptions) -> Result<Outcome> {
    ChainEvaluator::deterministic(p)?.eval(w, opts)
}

/// Chain evaluation without cycle detection, for strictly decreasing
/// programs: a step budget replaces the visited set.
pub fn eval_sd(p: &Program, w: &str, opts: TopDownOptions) -> Result<Outcome> {
    ChainEvaluator::strictly_decreasing(p)?.eval(w, opts)
}

/// Whether `value` belongs to the language of a deterministic regex.
pub fn eval_drx_constraint(value: &str, gamma: &DrxAst) -> Result<bool> {
    drx_match(gamma, value)
}

/// Tabled top-down search over ground goals; works for every program.
pub fn eval_memoized(p: &Program, w: &str, opts: TopDownOptions) -> Result<Outcome> {
    eval_memoized_with(p, w, opts)
}

fn eval_memoized_with(p: &Program, w: &str, opts: TopDownOptions) -> Result<Outcome> {
    if !p.is_boolean() {
        return Err(Error::precondition("the top-down evaluators answer Boolean programs only"));
    }
    let table = FactorTable::intern(w, &p.alphabet)?;
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(512 << 20)
            .spawn_scoped(s, || {
                let mut m = Memo::new(p, &table, opts);
                let accepted = m.solve()?;
                let mut trace = EvalTrace { goals: m.memo.len(), ..Default::default() };
                trace.rule_applications = m.applications;
                Ok(Outcome { verdict: Verdict::from_bool(accepted), tier: Tier::MemoizedTopdown, trace })
            })
            .expect("spawn evaluation thread")
            .join()
            .expect("evaluation thread panicked")
    })
}

type Goal = (RelId, Vec<FactorId>);

struct Memo<'a> {
    p: &'a Program,
    table: &'a FactorTable,
    opts: TopDownOptions,
    start: Instant,
    /// Settled goals: true = proven, false = failed for good.
    memo: HashMap<Goal, bool>,
    in_progress: HashSet<Goal>,
    tentative: HashSet<Goal>,
    changed: bool,
    applications: usize,
    matchers: HashMap<(usize, usize), ConstraintMatcher>,
    plans: Vec<Vec<usize>>,
}

impl<'a> Memo<'a> {
    fn new(p: &'a Program, table: &'a FactorTable, opts: TopDownOptions) -> Self {
        let mut matchers = HashMap::new();
        for (ri, rule) in p.rules.iter().enumerate() {
            for (ai, atom) in rule.body.iter().enumerate() {
                if let Atom::Drx { regex, .. } = atom {
                    matchers.insert((ri, ai), ConstraintMatcher::new(regex));
                }
            }
        }
        let plans = p.rules.iter().map(memo_plan).collect();
        Memo {
            p,
            table,
            opts,
            start: Instant::now(),
            memo: HashMap::new(),
            in_progress: HashSet::new(),
            tentative: HashSet::new(),
            changed: false,
            applications: 0,
            matchers,
            plans,
        }
    }

    /// Re-runs the query until a pass proves nothing new.
    fn solve(&mut self) -> Result<bool> {
        let goal: Goal = (self.p.ans(), Vec::new());
        loop {
            self.changed = false;
            self.tentative.clear();
            let (ok, _) = self.prove(&goal)?;
            if ok {
                return Ok(true);
            }
            if !self.changed {
                return Ok(false);
            }
        }
    }

    /// `(proven, depends on an unfinished goal)`.
    fn prove(&mut self, g: &Goal) -> Result<(bool, bool)> {
        if let Some(&v) = self.memo.get(g) {
            return Ok((v, false));
        }
        if self.in_progress.contains(g) || self.tentative.contains(g) {
            return Ok((false, true));
        }
        if self.memo.len() + self.in_progress.len() > self.opts.budget.max_tuples {
            return Err(Error::Budget(format!("more than {} goals tabled", self.opts.budget.max_tuples)));
        }
        if self.start.elapsed() > self.opts.budget.max_time {
            return Err(Error::Budget(format!("evaluation exceeded {:?}", self.opts.budget.max_time)));
        }
        self.in_progress.insert(g.clone());
        let mut dep = false;
        let mut proven = false;
        for ri in self.p.rules_for(g.0) {
            let rule = &self.p.rules[ri];
            let mut theta = Substitution::with_universe(rule.var_count(), self.table);
            let mut clash = false;
            for (&v, &f) in rule.head_args.iter().zip(&g.1) {
                match theta.get(v) {
                    Some(old) if old != f => clash = true,
                    _ => theta.set(v, f),
                }
            }
            if clash {
                continue;
            }
            let (ok, d) = self.body(ri, 0, &theta)?;
            dep |= d;
            if ok {
                proven = true;
                self.applications += 1;
                break;
            }
        }
        self.in_progress.remove(g);
        if proven {
            self.memo.insert(g.clone(), true);
            self.changed = true;
            Ok((true, false))
        } else if dep {
            self.tentative.insert(g.clone());
            Ok((false, true))
        } else {
            self.memo.insert(g.clone(), false);
            Ok((false, false))
        }
    }

    /// Whether the body of rule `ri` from plan step `k` is satisfiable
    /// extending `theta`.
    fn body(&mut self, ri: usize, k: usize, theta: &Substitution) -> Result<(bool, bool)> {
        let p = self.p;
        let plan = &self.plans[ri];
        if k == plan.len() {
            return Ok((true, false));
        }
        let ai = plan[k];
        let table = self.table;
        let mut dep = false;
        match &p.rules[ri].body[ai] {
            Atom::Eq(eq) => {
                let mut exts = Vec::new();
                for_each_match(eq, theta, table, &mut |t| exts.push(t.clone()));
                for t in exts {
                    let (ok, d) = self.body(ri, k + 1, &t)?;
                    dep |= d;
                    if ok {
                        return Ok((true, dep));
                    }
                }
            }
            Atom::Drx { var, .. } => {
                let cands: Vec<FactorId> = match theta.get(*var) {
                    Some(f) => vec![f],
                    None => table.ids().collect(),
                };
                for f in cands {
                    if self.matchers[&(ri, ai)].is_match(table.get(f)) {
                        let mut t = theta.clone();
                        t.set(*var, f);
                        let (ok, d) = self.body(ri, k + 1, &t)?;
                        dep |= d;
                        if ok {
                            return Ok((true, dep));
                        }
                    }
                }
            }
            Atom::Rel { rel, args } => {
                let free: Vec<VarId> = {
                    let mut v: Vec<VarId> = args.iter().copied().filter(|&v| theta.get(v).is_none()).collect();
                    v.sort_unstable();
                    v.dedup();
                    v
                };
                let mut t = theta.clone();
                let mut counter = vec![0 as FactorId; free.len()];
                let n = table.len() as FactorId;
                loop {
                    for (&v, &f) in free.iter().zip(&counter) {
                        t.set(v, f);
                    }
                    let goal: Goal = (*rel, args.iter().map(|&v| t.get(v).expect("bound")).collect());
                    let (ok, d) = self.prove(&goal)?;
                    dep |= d;
                    if ok {
                        let (ok, d) = self.body(ri, k + 1, &t)?;
                        dep |= d;
                        if ok {
                            return Ok((true, dep));
                        }
                    }
                    // next assignment of the free variables
                    let mut i = 0;
                    loop {
                        if i == counter.len() {
                            return Ok((false, dep));
                        }
                        counter[i] += 1;
                        if counter[i] < n {
                            break;
                        }
                        counter[i] = 0;
                        i += 1;
                    }
                }
            }
        }
        Ok((false, dep))
    }
}

/// Body order for the memoized evaluator: equations and constraints as
/// soon as their inputs are known, relation atoms once their arguments are
/// bound (or when nothing else remains).
fn memo_plan(rule: &crate::program::Rule) -> Vec<usize> {
    let mut bound = vec![false; rule.var_count()];
    bound[UNIVERSE] = true;
    for &v in &rule.head_args {
        bound[v] = true;
    }
    let mut left: Vec<usize> = (0..rule.body.len()).collect();
    let mut order = Vec::new();
    while !left.is_empty() {
        let score = |ai: usize| -> (u8, usize) {
            let atom = &rule.body[ai];
            let unbound = atom.vars().iter().filter(|&&v| !bound[v]).count();
            let class = match atom {
                _ if unbound == 0 => 0,
                Atom::Eq(e) if bound[e.lhs] => 1,
                Atom::Eq(e) if e.rhs.vars().iter().all(|&v| bound[v]) => 1,
                Atom::Eq(_) => 3,
                Atom::Rel { .. } => 4,
                Atom::Drx { .. } => 2,
            };
            (class, unbound)
        };
        let pos = (0..left.len()).min_by_key(|&i| (score(left[i]), left[i])).expect("non-empty");
        let ai = left.remove(pos);
        for v in rule.body[ai].vars() {
            bound[v] = true;
        }
        order.push(ai);
    }
    order
}
