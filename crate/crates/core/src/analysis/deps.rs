//! Dependency graph, linearity and top/bottom variables.

use std::collections::BTreeSet;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::analysis::Diagnostic;
use crate::error::{Error, Result};
use crate::program::{Program, RelId, Rule, VarId, UNIVERSE};

/// The "R ← R′" graph over relation symbols with its strongly connected
/// components.
#[derive(Clone, Debug)]
pub struct DependencyInfo {
    /// `edges[r]`: symbols occurring in bodies of rules with head `r`.
    pub edges: Vec<BTreeSet<RelId>>,
    /// Component index of each symbol.
    pub scc_of: Vec<usize>,
    /// Components in reverse topological order (callees before callers).
    pub sccs: Vec<Vec<RelId>>,
    /// Whether a component is recursive (more than one symbol or a self-loop).
    pub recursive: Vec<bool>,
}

impl DependencyInfo {
    /// `r` and `s` are mutually recursive: each reaches the other in one or
    /// more steps.
    pub fn mutually_recursive(&self, r: RelId, s: RelId) -> bool {
        let c = self.scc_of[r];
        c == self.scc_of[s] && self.recursive[c]
    }

    /// `r` lies on a recursion cycle.
    pub fn is_recursive(&self, r: RelId) -> bool {
        self.recursive[self.scc_of[r]]
    }

    /// Symbols mutually recursive with `r` (empty when `r` is not recursive).
    pub fn mutual_set(&self, r: RelId) -> Vec<RelId> {
        if self.is_recursive(r) {
            self.sccs[self.scc_of[r]].clone()
        } else {
            Vec::new()
        }
    }
}

/// Builds the dependency graph and its components.
pub fn dependency_info(p: &Program) -> DependencyInfo {
    let n = p.relations.len();
    let mut edges = vec![BTreeSet::new(); n];
    for rule in &p.rules {
        for (_, rel, _) in rule.relation_atoms() {
            edges[rule.head].insert(rel);
        }
    }
    let mut g: DiGraph<RelId, ()> = DiGraph::new();
    let nodes: Vec<_> = (0..n).map(|r| g.add_node(r)).collect();
    for (r, out) in edges.iter().enumerate() {
        for &s in out {
            g.add_edge(nodes[r], nodes[s], ());
        }
    }
    let comps = tarjan_scc(&g);
    let mut scc_of = vec![0; n];
    let mut sccs = Vec::with_capacity(comps.len());
    let mut recursive = Vec::with_capacity(comps.len());
    for (i, comp) in comps.into_iter().enumerate() {
        let mut members: Vec<RelId> = comp.into_iter().map(|ix| g[ix]).collect();
        members.sort_unstable();
        for &m in &members {
            scc_of[m] = i;
        }
        recursive.push(members.len() > 1 || edges[members[0]].contains(&members[0]));
        sccs.push(members);
    }
    DependencyInfo { edges, scc_of, sccs, recursive }
}

/// Index of the body atoms mutually recursive with the head of `rule`.
pub fn recursive_atoms(rule: &Rule, dep: &DependencyInfo) -> Vec<usize> {
    rule.relation_atoms().filter(|(_, rel, _)| dep.mutually_recursive(rule.head, *rel)).map(|(i, _, _)| i).collect()
}

/// A program is linear iff every rule has at most one body atom mutually
/// recursive with its head.
pub fn check_linear(p: &Program, dep: &DependencyInfo) -> (bool, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    for (i, rule) in p.rules.iter().enumerate() {
        let rec = recursive_atoms(rule, dep);
        if rec.len() > 1 {
            diags.push(Diagnostic::rule(
                "linear",
                i,
                rule,
                format!(
                    "rule has {} body atoms mutually recursive with {}",
                    rec.len(),
                    p.rel_name(rule.head)
                ),
            ));
        }
    }
    (diags.is_empty(), diags)
}

/// Top and bottom variables of a linear rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TopBottom {
    /// Head arguments followed by the universe variable.
    pub top: Vec<VarId>,
    /// Arguments of the mutually recursive body atom (empty if none).
    pub bottom: Vec<VarId>,
    /// Body index of the mutually recursive atom.
    pub rec_atom: Option<usize>,
}

/// Computes `top(ρ)` and `bottom(ρ)`; fails on non-linear rules.
pub fn top_bottom(rule: &Rule, dep: &DependencyInfo) -> Result<TopBottom> {
    let rec = recursive_atoms(rule, dep);
    if rec.len() > 1 {
        return Err(Error::precondition("top/bottom variables are only defined for linear rules"));
    }
    let mut top = rule.head_args.clone();
    top.push(UNIVERSE);
    let rec_atom = rec.first().copied();
    let bottom = match rec_atom {
        Some(i) => match &rule.body[i] {
            crate::program::Atom::Rel { args, .. } => args.clone(),
            _ => unreachable!("relation atom index"),
        },
        None => Vec::new(),
    };
    Ok(TopBottom { top, bottom, rec_atom })
}

/// Per-rule facts shared by the fragment checks.
#[derive(Clone, Debug)]
pub struct RuleCtx {
    pub tb: TopBottom,
    pub top: BTreeSet<VarId>,
    pub bottom: BTreeSet<VarId>,
    /// Arguments of body atoms that are not mutually recursive with the head.
    pub sub_args: BTreeSet<VarId>,
    /// Variables occurring exactly once in the rule, inside an equation.
    pub dangling: BTreeSet<VarId>,
}

impl RuleCtx {
    pub fn new(rule: &Rule, dep: &DependencyInfo) -> Result<Self> {
        let tb = top_bottom(rule, dep)?;
        let top: BTreeSet<VarId> = tb.top.iter().copied().collect();
        let bottom: BTreeSet<VarId> = tb.bottom.iter().copied().collect();
        let mut sub_args = BTreeSet::new();
        for (i, _, args) in rule.relation_atoms() {
            if Some(i) != tb.rec_atom {
                sub_args.extend(args.iter().copied());
            }
        }
        let mut count = vec![0usize; rule.var_count()];
        let mut in_eq = vec![false; rule.var_count()];
        for &a in &rule.head_args {
            count[a] += 1;
        }
        for atom in &rule.body {
            match atom {
                crate::program::Atom::Eq(e) => {
                    count[e.lhs] += 1;
                    in_eq[e.lhs] = true;
                    for v in e.rhs.items.iter().filter_map(|it| match it {
                        crate::program::Item::Var(v) => Some(*v),
                        _ => None,
                    }) {
                        count[v] += 1;
                        in_eq[v] = true;
                    }
                }
                crate::program::Atom::Rel { args, .. } => {
                    for &a in args {
                        count[a] += 1;
                    }
                }
                crate::program::Atom::Drx { var, .. } => count[*var] += 1,
            }
        }
        let dangling = (0..rule.var_count())
            .filter(|&v| v != UNIVERSE && count[v] == 1 && in_eq[v] && !top.contains(&v) && !bottom.contains(&v))
            .collect();
        Ok(RuleCtx { tb, top, bottom, sub_args, dangling })
    }

    /// Variables that may take the "added letter" role: bottom variables,
    /// subroutine arguments and dangling variables.
    pub fn is_passdown(&self, v: VarId) -> bool {
        self.bottom.contains(&v) || self.sub_args.contains(&v) || self.dangling.contains(&v)
    }
}
