//! Abstract syntax of FC-Datalog programs, substitutions and validation.
//!
//! Variables are scoped per rule: every [`Rule`] owns a variable table whose
//! entry [`UNIVERSE`] is the universe variable `univ`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::drx::DrxAst;
use crate::error::{Error, Result, SourceSpan};
use crate::word::{Alphabet, FactorId, FactorTable};

/// Index of a relation symbol in [`Program::relations`].
pub type RelId = usize;
/// Index of a variable in a rule's variable table.
pub type VarId = usize;
/// The universe variable; slot 0 of every rule's variable table.
pub const UNIVERSE: VarId = 0;
/// Spelling of the universe variable.
pub const UNIVERSE_NAME: &str = "univ";
/// Name of the distinguished answer relation.
pub const ANS: &str = "Ans";

/// One item of a pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Item {
    Term(char),
    Var(VarId),
}

/// A word over terminals and variables; the empty pattern is ε.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Pattern {
    pub items: Vec<Item>,
}

impl Pattern {
    pub fn new(items: Vec<Item>) -> Self {
        Pattern { items }
    }

    pub fn epsilon() -> Self {
        Pattern::default()
    }

    pub fn is_epsilon(&self) -> bool {
        self.items.is_empty()
    }

    /// Variables in order of first occurrence, without repetition.
    pub fn vars(&self) -> Vec<VarId> {
        let mut seen = Vec::new();
        for it in &self.items {
            if let Item::Var(v) = it {
                if !seen.contains(v) {
                    seen.push(*v);
                }
            }
        }
        seen
    }

    pub fn contains_var(&self, v: VarId) -> bool {
        self.items.contains(&Item::Var(v))
    }

    pub fn occurrences(&self, v: VarId) -> usize {
        self.items.iter().filter(|i| **i == Item::Var(v)).count()
    }

    pub fn terminal_count(&self) -> usize {
        self.items.iter().filter(|i| matches!(i, Item::Term(_))).count()
    }

    pub fn terminals(&self) -> impl Iterator<Item = char> + '_ {
        self.items.iter().filter_map(|i| match i {
            Item::Term(c) => Some(*c),
            Item::Var(_) => None,
        })
    }
}

/// A pattern equation `lhs ≐ rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Equation {
    pub lhs: VarId,
    pub rhs: Pattern,
}

impl Equation {
    /// All variables, lhs first.
    pub fn vars(&self) -> Vec<VarId> {
        let mut v = vec![self.lhs];
        for x in self.rhs.vars() {
            if x != self.lhs {
                v.push(x);
            }
        }
        v
    }
}

/// A body atom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Atom {
    Eq(Equation),
    Rel { rel: RelId, args: Vec<VarId> },
    Drx { var: VarId, regex: DrxAst },
}

impl Atom {
    pub fn vars(&self) -> Vec<VarId> {
        match self {
            Atom::Eq(e) => e.vars(),
            Atom::Rel { args, .. } => {
                let mut out: Vec<VarId> = Vec::new();
                for a in args {
                    if !out.contains(a) {
                        out.push(*a);
                    }
                }
                out
            }
            Atom::Drx { var, .. } => vec![*var],
        }
    }

    pub fn as_equation(&self) -> Option<&Equation> {
        match self {
            Atom::Eq(e) => Some(e),
            _ => None,
        }
    }
}

/// A rule `head(head_args) ← body`.
#[derive(Clone, Debug)]
pub struct Rule {
    pub head: RelId,
    pub head_args: Vec<VarId>,
    pub body: Vec<Atom>,
    /// Variable names; index [`UNIVERSE`] is always `univ`.
    pub vars: Vec<String>,
    pub span: Option<SourceSpan>,
}

impl Rule {
    pub fn var_name(&self, v: VarId) -> &str {
        &self.vars[v]
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    /// Pattern equations of the body, in order.
    pub fn equations(&self) -> impl Iterator<Item = &Equation> {
        self.body.iter().filter_map(Atom::as_equation)
    }

    /// Relation atoms of the body as `(body index, symbol, args)`.
    pub fn relation_atoms(&self) -> impl Iterator<Item = (usize, RelId, &[VarId])> {
        self.body.iter().enumerate().filter_map(|(i, a)| match a {
            Atom::Rel { rel, args } => Some((i, *rel, args.as_slice())),
            _ => None,
        })
    }

    /// Variables occurring in the body.
    pub fn body_vars(&self) -> BTreeSet<VarId> {
        self.body.iter().flat_map(Atom::vars).collect()
    }

    /// Variables occurring anywhere in the rule (head or body), excluding
    /// the universe variable unless it is used.
    pub fn used_vars(&self) -> BTreeSet<VarId> {
        let mut s = self.body_vars();
        s.extend(self.head_args.iter().copied());
        s
    }
}

/// A relation symbol with its arity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Relation {
    pub name: String,
    pub arity: usize,
}

/// An FC-Datalog program: alphabet, relation symbols, rules.
#[derive(Clone, Debug)]
pub struct Program {
    pub alphabet: Alphabet,
    pub relations: Vec<Relation>,
    pub rules: Vec<Rule>,
}

impl Program {
    /// Id of the `Ans` relation.
    pub fn ans(&self) -> RelId {
        self.relation_id(ANS).expect("validated program has Ans")
    }

    /// True iff `Ans` has arity 0.
    pub fn is_boolean(&self) -> bool {
        self.relation_id(ANS).map(|r| self.relations[r].arity == 0).unwrap_or(false)
    }

    pub fn relation_id(&self, name: &str) -> Option<RelId> {
        self.relations.iter().position(|r| r.name == name)
    }

    pub fn rel_name(&self, r: RelId) -> &str {
        &self.relations[r].name
    }

    pub fn arity(&self, r: RelId) -> usize {
        self.relations[r].arity
    }

    /// Indices of the rules with head symbol `r` (Φ_R).
    pub fn rules_for(&self, r: RelId) -> Vec<usize> {
        (0..self.rules.len()).filter(|&i| self.rules[i].head == r).collect()
    }

    /// Returns a copy with rules permuted by `order` (a permutation of
    /// rule indices).
    pub fn with_rule_order(&self, order: &[usize]) -> Program {
        let mut p = self.clone();
        p.rules = order.iter().map(|&i| self.rules[i].clone()).collect();
        p
    }

    /// Name-based canonical form used for structural equality.
    fn canonical(&self) -> (Vec<char>, BTreeMap<&str, usize>, Vec<CanonRule<'_>>) {
        let rels = self.relations.iter().map(|r| (r.name.as_str(), r.arity)).collect();
        let rules = self
            .rules
            .iter()
            .map(|r| {
                let name = |v: &VarId| r.vars[*v].as_str();
                let body = r
                    .body
                    .iter()
                    .map(|a| match a {
                        Atom::Eq(e) => CanonAtom::Eq(
                            name(&e.lhs),
                            e.rhs
                                .items
                                .iter()
                                .map(|it| match it {
                                    Item::Term(c) => CanonItem::T(*c),
                                    Item::Var(v) => CanonItem::V(name(v)),
                                })
                                .collect(),
                        ),
                        Atom::Rel { rel, args } => {
                            CanonAtom::Rel(self.rel_name(*rel), args.iter().map(name).collect())
                        }
                        Atom::Drx { var, regex } => CanonAtom::Drx(name(var), regex),
                    })
                    .collect();
                CanonRule {
                    head: self.rel_name(r.head),
                    args: r.head_args.iter().map(name).collect(),
                    body,
                }
            })
            .collect();
        (self.alphabet.symbols().collect(), rels, rules)
    }
}

#[derive(PartialEq)]
enum CanonItem<'a> {
    T(char),
    V(&'a str),
}

#[derive(PartialEq)]
enum CanonAtom<'a> {
    Eq(&'a str, Vec<CanonItem<'a>>),
    Rel(&'a str, Vec<&'a str>),
    Drx(&'a str, &'a DrxAst),
}

#[derive(PartialEq)]
struct CanonRule<'a> {
    head: &'a str,
    args: Vec<&'a str>,
    body: Vec<CanonAtom<'a>>,
}

/// Structural equality: same alphabet, same relation signatures, and the
/// same rules in the same order, comparing variables and symbols by name.
/// Source spans are ignored.
impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }
}

/// Partial map from a rule's variables to factor ids (θ).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Substitution {
    pub bindings: Vec<Option<FactorId>>,
}

impl Substitution {
    /// Empty substitution for a rule with `var_count` variables.
    pub fn empty(var_count: usize) -> Self {
        Substitution { bindings: vec![None; var_count] }
    }

    /// Substitution binding only the universe variable to `w`.
    pub fn with_universe(var_count: usize, table: &FactorTable) -> Self {
        let mut s = Self::empty(var_count);
        s.bindings[UNIVERSE] = Some(table.universe());
        s
    }

    pub fn get(&self, v: VarId) -> Option<FactorId> {
        self.bindings[v]
    }

    pub fn set(&mut self, v: VarId, f: FactorId) {
        self.bindings[v] = Some(f);
    }

    pub fn is_bound(&self, v: VarId) -> bool {
        self.bindings[v].is_some()
    }
}

/// The image θ(p) of a pattern.
pub fn apply_substitution(p: &Pattern, theta: &Substitution, table: &FactorTable) -> Result<Vec<char>> {
    let mut out = Vec::new();
    for it in &p.items {
        match it {
            Item::Term(c) => out.push(*c),
            Item::Var(v) => match theta.get(*v) {
                Some(f) => out.extend_from_slice(table.get(f)),
                None => {
                    return Err(Error::precondition(format!(
                        "incomplete substitution: variable #{v} is unbound"
                    )))
                }
            },
        }
    }
    Ok(out)
}

/// Checks every well-formedness condition of a program.
///
/// Conditions: `Ans` is declared; every rule references declared symbols
/// with matching arity; bodies are non-empty; every head variable other
/// than `univ` occurs in the body; no equation has its lhs in its rhs;
/// all terminals (including those inside regex constraints) belong to the
/// alphabet; regex constraints only recall bound memories.
pub fn validate_program(p: &Program) -> Result<()> {
    if p.relation_id(ANS).is_none() {
        return Err(Error::validation("program has no Ans relation", None));
    }
    let mut names: HashMap<&str, usize> = HashMap::new();
    for (i, r) in p.relations.iter().enumerate() {
        if names.insert(r.name.as_str(), i).is_some() {
            return Err(Error::validation(format!("relation {} declared twice", r.name), None));
        }
    }
    for (ri, rule) in p.rules.iter().enumerate() {
        let span = rule.span;
        let here = |msg: String| Error::validation(format!("rule {ri}: {msg}"), span);
        if rule.vars.first().map(String::as_str) != Some(UNIVERSE_NAME) {
            return Err(here("variable table must start with univ".into()));
        }
        if rule.head >= p.relations.len() {
            return Err(here(format!("undeclared head symbol #{}", rule.head)));
        }
        if rule.head_args.len() != p.arity(rule.head) {
            return Err(here(format!(
                "arity mismatch: {} has arity {} but head has {} arguments",
                p.rel_name(rule.head),
                p.arity(rule.head),
                rule.head_args.len()
            )));
        }
        if rule.body.is_empty() {
            return Err(here("empty body".into()));
        }
        let nvars = rule.vars.len();
        let check_var = |v: VarId| -> Result<()> {
            if v >= nvars {
                Err(here(format!("unknown variable #{v}")))
            } else {
                Ok(())
            }
        };
        for &v in &rule.head_args {
            check_var(v)?;
        }
        for atom in &rule.body {
            match atom {
                Atom::Eq(e) => {
                    check_var(e.lhs)?;
                    for it in &e.rhs.items {
                        match it {
                            Item::Var(v) => check_var(*v)?,
                            Item::Term(c) => {
                                if !p.alphabet.contains(*c) {
                                    return Err(here(format!(
                                        "terminal '{c}' is not in the alphabet {}",
                                        p.alphabet
                                    )));
                                }
                            }
                        }
                    }
                    if e.rhs.contains_var(e.lhs) {
                        return Err(here(format!(
                            "equation {0} = ... mentions {0} on both sides; such equations are not \
                             normalizable and are rejected",
                            rule.var_name(e.lhs)
                        )));
                    }
                }
                Atom::Rel { rel, args } => {
                    if *rel >= p.relations.len() {
                        return Err(here(format!("undeclared relation symbol #{rel}")));
                    }
                    if args.len() != p.arity(*rel) {
                        return Err(here(format!(
                            "arity mismatch: {} has arity {} but is used with {} arguments",
                            p.rel_name(*rel),
                            p.arity(*rel),
                            args.len()
                        )));
                    }
                    for &a in args {
                        check_var(a)?;
                    }
                }
                Atom::Drx { var, regex } => {
                    check_var(*var)?;
                    for c in regex.terminals() {
                        if !p.alphabet.contains(c) {
                            return Err(here(format!(
                                "regex terminal '{c}' is not in the alphabet {}",
                                p.alphabet
                            )));
                        }
                    }
                    regex.check_recalls_bound().map_err(&here)?;
                }
            }
        }
        let body_vars = rule.body_vars();
        for &v in &rule.head_args {
            if v != UNIVERSE && !body_vars.contains(&v) {
                return Err(here(format!("head variable {} not in body", rule.var_name(v))));
            }
        }
    }
    Ok(())
}

/// One symbol of a pattern given to [`RuleBuilder::eq`].
#[derive(Clone, Copy, Debug)]
pub enum Sym<'a> {
    V(&'a str),
    T(char),
}

/// Incremental construction of programs, used by the compilers.
#[derive(Debug)]
pub struct ProgramBuilder {
    alphabet: Alphabet,
    relations: Vec<Relation>,
    rules: Vec<Rule>,
}

impl ProgramBuilder {
    pub fn new(alphabet: Alphabet) -> Self {
        ProgramBuilder { alphabet, relations: Vec::new(), rules: Vec::new() }
    }

    /// Declares (or looks up) a relation symbol.
    pub fn relation(&mut self, name: &str, arity: usize) -> RelId {
        if let Some(i) = self.relations.iter().position(|r| r.name == name) {
            assert_eq!(self.relations[i].arity, arity, "arity clash for {name}");
            return i;
        }
        self.relations.push(Relation { name: name.to_string(), arity });
        self.relations.len() - 1
    }

    /// Adds a rule; `build` fills the body through the [`RuleBuilder`].
    pub fn rule(&mut self, head: &str, args: &[&str], build: impl FnOnce(&mut RuleBuilder<'_>)) {
        let head_id = self.relation(head, args.len());
        let mut rb = RuleBuilder { prog: self, vars: vec![UNIVERSE_NAME.to_string()], body: Vec::new() };
        let head_args: Vec<VarId> = args.iter().map(|a| rb.var(a)).collect();
        build(&mut rb);
        let RuleBuilder { vars, body, .. } = rb;
        self.rules.push(Rule { head: head_id, head_args, body, vars, span: None });
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    /// Finishes and validates the program.
    pub fn build(self) -> Result<Program> {
        let p = Program { alphabet: self.alphabet, relations: self.relations, rules: self.rules };
        validate_program(&p)?;
        Ok(p)
    }
}

/// Body construction for one rule.
#[derive(Debug)]
pub struct RuleBuilder<'a> {
    prog: &'a mut ProgramBuilder,
    vars: Vec<String>,
    body: Vec<Atom>,
}

impl RuleBuilder<'_> {
    /// Interns a variable name (`univ` maps to the universe variable).
    pub fn var(&mut self, name: &str) -> VarId {
        if let Some(i) = self.vars.iter().position(|v| v == name) {
            return i;
        }
        self.vars.push(name.to_string());
        self.vars.len() - 1
    }

    /// Adds the equation `lhs ≐ rhs`.
    pub fn eq(&mut self, lhs: &str, rhs: &[Sym<'_>]) {
        let lhs = self.var(lhs);
        let items = rhs
            .iter()
            .map(|s| match s {
                Sym::V(n) => Item::Var(self.var(n)),
                Sym::T(c) => Item::Term(*c),
            })
            .collect();
        self.body.push(Atom::Eq(Equation { lhs, rhs: Pattern::new(items) }));
    }

    /// Adds the relation atom `name(args)`.
    pub fn rel(&mut self, name: &str, args: &[&str]) {
        let rel = self.prog.relation(name, args.len());
        let args = args.iter().map(|a| self.var(a)).collect();
        self.body.push(Atom::Rel { rel, args });
    }

    /// Adds the regex constraint `var in /regex/`.
    pub fn drx(&mut self, var: &str, regex: DrxAst) {
        let var = self.var(var);
        self.body.push(Atom::Drx { var, regex });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn homomorphic_image() {
        let t = FactorTable::intern_unchecked("abaab");
        let mut th = Substitution::empty(2);
        th.set(1, t.id_of_str("ab").unwrap());
        let p = Pattern::new(vec![Item::Var(1), Item::Term('a'), Item::Var(1)]);
        assert_eq!(apply_substitution(&p, &th, &t).unwrap().iter().collect::<String>(), "abaab");
        let q = Pattern::new(vec![Item::Term('a'), Item::Term('b')]);
        assert_eq!(apply_substitution(&q, &Substitution::empty(2), &t).unwrap(), vec!['a', 'b']);
        assert!(apply_substitution(&p, &Substitution::empty(2), &t).is_err());
    }

    #[test]
    fn homomorphism_on_concatenation() {
        let t = FactorTable::intern_unchecked("abba");
        let alpha = Pattern::new(vec![Item::Var(1), Item::Term('b')]);
        let beta = Pattern::new(vec![Item::Term('a'), Item::Var(2), Item::Var(1)]);
        let mut both = alpha.items.clone();
        both.extend(beta.items.iter().copied());
        let both = Pattern::new(both);
        for x in t.ids() {
            for y in t.ids() {
                let mut th = Substitution::empty(3);
                th.set(1, x);
                th.set(2, y);
                let mut l = apply_substitution(&alpha, &th, &t).unwrap();
                l.extend(apply_substitution(&beta, &th, &t).unwrap());
                assert_eq!(l, apply_substitution(&both, &th, &t).unwrap());
            }
        }
    }

    #[test]
    fn builder_validates_head_vars() {
        let mut b = ProgramBuilder::new(Alphabet::new(['a']).unwrap());
        b.rule("R", &["x"], |r| r.eq("y", &[]));
        b.rule("Ans", &[], |r| r.rel("R", &["univ"]));
        let err = b.build().unwrap_err();
        assert!(err.to_string().contains("head variable x not in body"), "{err}");
    }
}
