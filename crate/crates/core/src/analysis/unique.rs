//! Uniquely defined variables: the variables a top-down evaluator can
//! compute from the top variables by solving equations with one unknown.

use std::collections::BTreeSet;

use crate::analysis::deps::TopBottom;
use crate::program::{Rule, VarId, UNIVERSE};

/// Result of the uniquely-defined fixpoint for one rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniqueDefs {
    /// Defined variables.
    pub defined: BTreeSet<VarId>,
    /// Variables in the order they became defined (after the base set),
    /// with the body index of the defining equation.
    pub order: Vec<(VarId, usize)>,
    /// Number of rounds that defined at least one variable.
    pub rounds: usize,
    /// Every variable of the rule is defined.
    pub all: bool,
}

/// Least fixpoint from `{univ} ∪ top(ρ)`, closing under "an equation with
/// exactly one undefined variable defines it". Variables that occur only in
/// relation atoms or regex constraints never become defined.
pub fn uniquely_defined(rule: &Rule, tb: &TopBottom) -> UniqueDefs {
    let mut defined: BTreeSet<VarId> = tb.top.iter().copied().collect();
    defined.insert(UNIVERSE);
    let mut order = Vec::new();
    let mut rounds = 0;
    loop {
        let mut fresh = Vec::new();
        for (i, atom) in rule.body.iter().enumerate() {
            let Some(eq) = atom.as_equation() else { continue };
            let undefined: Vec<VarId> = eq.vars().into_iter().filter(|v| !defined.contains(v)).collect();
            if let [v] = undefined.as_slice() {
                if !fresh.iter().any(|(f, _)| f == v) {
                    fresh.push((*v, i));
                }
            }
        }
        if fresh.is_empty() {
            break;
        }
        rounds += 1;
        for (v, i) in fresh {
            defined.insert(v);
            order.push((v, i));
        }
    }
    let all = rule.used_vars().iter().all(|v| defined.contains(v));
    UniqueDefs { defined, order, rounds, all }
}
