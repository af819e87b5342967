//! The strictly-decreasing test: every recursive step with equations
//! shrinks a designated argument, and these arguments line up along the
//! recursion.

use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::is_cyclic_directed;
use petgraph::graph::DiGraph;
use serde::Serialize;

use crate::analysis::deps::{DependencyInfo, RuleCtx};
use crate::analysis::Diagnostic;
use crate::program::{Atom, Item, Program, RelId, Rule, VarId};

/// Evidence for one rule with equations and a recursive atom: the head
/// position of the shrinking top variable and the body position of the
/// smaller bottom variable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decrease {
    pub rule: usize,
    pub top: String,
    pub bottom: String,
    pub head_pos: usize,
    pub body_pos: usize,
}

/// Outcome of the strictly-decreasing test.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SdReport {
    pub sd: bool,
    /// Decreasing head positions per recursive symbol with equations.
    pub positions: BTreeMap<String, Vec<usize>>,
    pub evidence: Vec<Decrease>,
    pub diagnostics: Vec<Diagnostic>,
}

/// `ne[r][i]`: argument `i` of `r` is non-empty in every top-down call.
pub fn nonempty_arguments(p: &Program) -> Vec<Vec<bool>> {
    let mut called = vec![false; p.relations.len()];
    for rule in &p.rules {
        for (_, r, _) in rule.relation_atoms() {
            called[r] = true;
        }
    }
    let mut ne: Vec<Vec<bool>> = p.relations.iter().enumerate().map(|(r, rel)| vec![called[r]; rel.arity]).collect();
    loop {
        let mut changed = false;
        for rule in &p.rules {
            let m = must_nonempty(rule, &ne[rule.head]);
            for (_, r, args) in rule.relation_atoms() {
                for (i, a) in args.iter().enumerate() {
                    if ne[r][i] && !m.contains(a) {
                        ne[r][i] = false;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return ne;
        }
    }
}

/// Variables of `rule` that are non-empty under every satisfying
/// substitution, given which head arguments are known to be non-empty.
pub fn must_nonempty(rule: &Rule, head_ne: &[bool]) -> BTreeSet<VarId> {
    let mut m: BTreeSet<VarId> = BTreeSet::new();
    for (i, &v) in rule.head_args.iter().enumerate() {
        if head_ne[i] {
            m.insert(v);
        }
    }
    for atom in &rule.body {
        if let Atom::Drx { var, regex } = atom {
            if !regex.nullable() {
                m.insert(*var);
            }
        }
    }
    loop {
        let before = m.len();
        for eq in rule.equations() {
            let items = &eq.rhs.items;
            let grows = items.iter().any(|it| match it {
                Item::Term(_) => true,
                Item::Var(v) => m.contains(v),
            });
            if grows {
                m.insert(eq.lhs);
            }
            if m.contains(&eq.lhs) {
                if let [Item::Var(v)] = items.as_slice() {
                    m.insert(*v);
                }
            }
        }
        if m.len() == before {
            return m;
        }
    }
}

/// `(head position, body position)` pairs for which an equation `x ≐ α`
/// guarantees `|θ(y)| < |θ(x)|`, where `x` is the head argument and `y` the
/// argument of the recursive atom.
fn witnesses(rule: &Rule, ctx: &RuleCtx, must: &BTreeSet<VarId>) -> Vec<(usize, usize, VarId, VarId)> {
    let mut out = Vec::new();
    let Some(rec) = ctx.tb.rec_atom else { return out };
    let Atom::Rel { args: body_args, .. } = &rule.body[rec] else { return out };
    for eq in rule.equations() {
        let x = eq.lhs;
        let heads: Vec<usize> = (0..rule.head_args.len()).filter(|&i| rule.head_args[i] == x).collect();
        if heads.is_empty() {
            continue;
        }
        let terms = eq.rhs.terminal_count();
        for y in eq.rhs.vars() {
            let bodies: Vec<usize> = (0..body_args.len()).filter(|&j| body_args[j] == y).collect();
            if bodies.is_empty() {
                continue;
            }
            let others_nonempty = eq.rhs.items.iter().any(|it| matches!(it, Item::Var(z) if *z != y && must.contains(z)));
            let strict = terms > 0 || others_nonempty || (eq.rhs.occurrences(y) >= 2 && must.contains(&y));
            if strict {
                for &i in &heads {
                    for &j in &bodies {
                        out.push((i, j, x, y));
                    }
                }
            }
        }
    }
    out
}

/// Syntactic strictly-decreasing test (sound, incomplete).
///
/// Rules with a recursive atom and at least one equation (Φ′) must each
/// have a witness whose head position lies in the decreasing set of the
/// head symbol and whose body position lies in the decreasing set of the
/// callee; the sets are the greatest solution of these constraints.
/// Recursive rules without equations must not form a cycle among
/// themselves.
pub fn check_strictly_decreasing(p: &Program, dep: &DependencyInfo, ctxs: &[RuleCtx]) -> SdReport {
    let ne = nonempty_arguments(p);
    let phi_prime: Vec<bool> = p
        .rules
        .iter()
        .zip(ctxs)
        .map(|(r, c)| c.tb.rec_atom.is_some() && r.equations().next().is_some())
        .collect();
    let wit: Vec<Vec<(usize, usize, VarId, VarId)>> = p
        .rules
        .iter()
        .enumerate()
        .map(|(i, r)| {
            if phi_prime[i] {
                witnesses(r, &ctxs[i], &must_nonempty(r, &ne[r.head]))
            } else {
                Vec::new()
            }
        })
        .collect();
    let callee = |ri: usize| -> RelId {
        let rule = &p.rules[ri];
        match &rule.body[ctxs[ri].tb.rec_atom.expect("rule in Φ′")] {
            Atom::Rel { rel, .. } => *rel,
            _ => unreachable!("recursive atom is a relation atom"),
        }
    };
    let mut d: BTreeMap<RelId, BTreeSet<usize>> = BTreeMap::new();
    for (ri, rule) in p.rules.iter().enumerate() {
        if phi_prime[ri] {
            d.entry(rule.head).or_insert_with(|| (0..p.arity(rule.head)).collect());
        }
    }
    loop {
        let mut changed = false;
        for (ri, rule) in p.rules.iter().enumerate() {
            if !phi_prime[ri] {
                continue;
            }
            let r2 = callee(ri);
            let keep: BTreeSet<usize> = d[&rule.head]
                .iter()
                .copied()
                .filter(|&i| wit[ri].iter().any(|&(hi, bj, _, _)| hi == i && d.get(&r2).is_none_or(|s| s.contains(&bj))))
                .collect();
            if keep.len() != d[&rule.head].len() {
                d.insert(rule.head, keep);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut rep = SdReport { sd: true, ..Default::default() };
    for (&r, set) in &d {
        rep.positions.insert(p.rel_name(r).to_string(), set.iter().copied().collect());
        if set.is_empty() {
            rep.sd = false;
        }
    }
    for (ri, rule) in p.rules.iter().enumerate() {
        if !phi_prime[ri] {
            continue;
        }
        let r2 = callee(ri);
        let chosen = wit[ri].iter().find(|&&(hi, bj, _, _)| {
            d[&rule.head].contains(&hi) && d.get(&r2).is_none_or(|s| s.contains(&bj))
        });
        match chosen {
            Some(&(hi, bj, x, y)) => rep.evidence.push(Decrease {
                rule: ri,
                top: rule.var_name(x).to_string(),
                bottom: rule.var_name(y).to_string(),
                head_pos: hi,
                body_pos: bj,
            }),
            None => rep.diagnostics.push(Diagnostic::rule(
                "strictly_decreasing",
                ri,
                rule,
                if wit[ri].is_empty() {
                    "no top variable provably shrinks into the recursive atom".to_string()
                } else {
                    format!("decreasing arguments do not line up with the calls of {}", p.rel_name(r2))
                },
            )),
        }
    }
    // recursive rules without equations must not cycle among themselves
    let mut g: DiGraph<(), ()> = DiGraph::new();
    let nodes: Vec<_> = (0..p.relations.len()).map(|_| g.add_node(())).collect();
    let mut any = false;
    for (ri, rule) in p.rules.iter().enumerate() {
        if let Some(rec) = ctxs[ri].tb.rec_atom {
            if !phi_prime[ri] {
                if let Atom::Rel { rel, .. } = &rule.body[rec] {
                    g.add_edge(nodes[rule.head], nodes[*rel], ());
                    any = true;
                }
            }
        }
    }
    if any && is_cyclic_directed(&g) {
        rep.sd = false;
        rep.diagnostics.push(Diagnostic::program(
            "strictly_decreasing",
            "recursive rules without equations form a cycle; nothing shrinks along it".into(),
        ));
    }
    let _ = dep;
    rep
}
