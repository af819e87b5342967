//! Brute-force determinism oracle: computes the relations W_ρ on a fixed
//! word by exhaustive enumeration.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::analysis::deps::{dependency_info, top_bottom};
use crate::compilers::ConstraintMatcher;
use crate::error::{Error, Result};
use crate::matching::match_equation;
use crate::program::{Atom, Program, Rule, Substitution, VarId};
use crate::word::{FactorId, FactorTable};

/// Default bound on the word length accepted by the oracle.
pub const ORACLE_MAX_LEN: usize = 8;

/// W_ρ for one rule: pairs of (top tuple, bottom tuple) as strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WRelation {
    pub rule: usize,
    pub pairs: Vec<(Vec<String>, Vec<String>)>,
    pub partial_function: bool,
}

/// Two rules with the same head share a top tuple.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Overlap {
    pub head: String,
    pub rules: (usize, usize),
    pub top: Vec<String>,
}

/// Outcome of the oracle on one word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SemanticDetReport {
    pub word: String,
    pub relations: Vec<WRelation>,
    pub overlaps: Vec<Overlap>,
    pub locally_deterministic: bool,
    pub globally_deterministic: bool,
}

/// Oracle with the default length bound.
pub fn semantic_determinism_oracle(p: &Program, w: &str) -> Result<SemanticDetReport> {
    semantic_determinism_oracle_bounded(p, w, ORACLE_MAX_LEN)
}

/// Computes every W_ρ on `w` and the two determinism flags.
pub fn semantic_determinism_oracle_bounded(p: &Program, w: &str, max_len: usize) -> Result<SemanticDetReport> {
    let len = w.chars().count();
    if len > max_len {
        return Err(Error::precondition(format!(
            "the determinism oracle enumerates all factors; |w| = {len} exceeds the bound {max_len} (raise the bound explicitly for longer words)"
        )));
    }
    let table = FactorTable::intern(w, &p.alphabet)?;
    let dep = dependency_info(p);
    let mut relations = Vec::with_capacity(p.rules.len());
    let mut tops: Vec<BTreeSet<Vec<FactorId>>> = Vec::with_capacity(p.rules.len());
    for (ri, rule) in p.rules.iter().enumerate() {
        let tb = top_bottom(rule, &dep)?;
        let pairs = w_relation(rule, &tb.top, &tb.bottom, &table);
        let mut map: BTreeMap<&Vec<FactorId>, BTreeSet<&Vec<FactorId>>> = BTreeMap::new();
        for (t, b) in &pairs {
            map.entry(t).or_default().insert(b);
        }
        let partial_function = map.values().all(|s| s.len() <= 1);
        tops.push(pairs.iter().map(|(t, _)| t.clone()).collect());
        let render = |v: &Vec<FactorId>| v.iter().map(|&f| table.text(f)).collect::<Vec<_>>();
        relations.push(WRelation {
            rule: ri,
            pairs: pairs.iter().map(|(t, b)| (render(t), render(b))).collect(),
            partial_function,
        });
    }
    let mut overlaps = Vec::new();
    for i in 0..p.rules.len() {
        for j in i + 1..p.rules.len() {
            if p.rules[i].head != p.rules[j].head {
                continue;
            }
            if let Some(t) = tops[i].intersection(&tops[j]).next() {
                overlaps.push(Overlap {
                    head: p.rel_name(p.rules[i].head).to_string(),
                    rules: (i, j),
                    top: t.iter().map(|&f| table.text(f)).collect(),
                });
            }
        }
    }
    Ok(SemanticDetReport {
        word: w.to_string(),
        locally_deterministic: relations.iter().all(|r| r.partial_function),
        globally_deterministic: overlaps.is_empty(),
        relations,
        overlaps,
    })
}

/// All (θ(top), θ(bottom)) over substitutions satisfying the pattern
/// equations and regex constraints of `rule`.
fn w_relation(
    rule: &Rule,
    top: &[VarId],
    bottom: &[VarId],
    table: &FactorTable,
) -> BTreeSet<(Vec<FactorId>, Vec<FactorId>)> {
    let mut thetas = vec![Substitution::with_universe(rule.var_count(), table)];
    for eq in rule.equations() {
        thetas = thetas.iter().flat_map(|t| match_equation(eq, t, table)).collect();
    }
    let extend = |thetas: Vec<Substitution>, v: VarId| -> Vec<Substitution> {
        thetas
            .into_iter()
            .flat_map(|t| {
                if t.is_bound(v) {
                    vec![t]
                } else {
                    table
                        .ids()
                        .map(|f| {
                            let mut t2 = t.clone();
                            t2.set(v, f);
                            t2
                        })
                        .collect()
                }
            })
            .collect()
    };
    for atom in &rule.body {
        if let Atom::Drx { var, regex } = atom {
            let m = ConstraintMatcher::new(regex);
            thetas = extend(thetas, *var);
            thetas.retain(|t| m.is_match(table.get(t.get(*var).expect("bound"))));
        }
    }
    for &v in top.iter().chain(bottom) {
        thetas = extend(thetas, v);
    }
    thetas
        .into_iter()
        .map(|t| {
            let get = |v: &VarId| t.get(*v).expect("bound");
            (top.iter().map(get).collect(), bottom.iter().map(get).collect())
        })
        .collect()
}
