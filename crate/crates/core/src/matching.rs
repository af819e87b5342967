//! Satisfaction and enumeration of pattern equations over a factor table.

use crate::program::{Equation, Item, Substitution, UNIVERSE};
use crate::word::{FactorId, FactorTable};

/// All extensions θ' of `theta` that bind every variable of `eq` to a factor
/// of the word and satisfy θ'(lhs) = θ'(rhs).
///
/// When the lhs value is known the rhs is matched against it by choosing
/// split points left to right; otherwise candidate lhs factors are
/// enumerated by length feasibility first. The universe variable is bound
/// to the word if `theta` leaves it unbound. The result has no duplicates.
pub fn match_equation(eq: &Equation, theta: &Substitution, table: &FactorTable) -> Vec<Substitution> {
    let mut out = Vec::new();
    for_each_match(eq, theta, table, &mut |s| out.push(s.clone()));
    out
}

/// Callback form of [`match_equation`]; avoids allocating the result set.
pub fn for_each_match(
    eq: &Equation,
    theta: &Substitution,
    table: &FactorTable,
    f: &mut dyn FnMut(&Substitution),
) {
    let mut th = theta.clone();
    if th.get(UNIVERSE).is_none() {
        th.set(UNIVERSE, table.universe());
    }
    match th.get(eq.lhs) {
        Some(target) => {
            let target = table.get(target).to_vec();
            split(&eq.rhs.items, 0, &target, 0, &mut th, table, f);
        }
        None => {
            let (fixed, all_bound) = fixed_length(&eq.rhs.items, &th, table);
            if all_bound {
                let mut image = Vec::with_capacity(fixed);
                for it in &eq.rhs.items {
                    match it {
                        Item::Term(c) => image.push(*c),
                        Item::Var(v) => image.extend_from_slice(table.get(th.get(*v).unwrap())),
                    }
                }
                if let Some(id) = table.id_of(&image) {
                    th.set(eq.lhs, id);
                    f(&th);
                }
                return;
            }
            for cand in table.ids_with_len(fixed, usize::MAX) {
                th.set(eq.lhs, cand);
                let target = table.get(cand).to_vec();
                split(&eq.rhs.items, 0, &target, 0, &mut th, table, f);
            }
            th.bindings[eq.lhs] = None;
        }
    }
}

/// Total length of terminals and bound variables, and whether every
/// variable is bound.
fn fixed_length(items: &[Item], th: &Substitution, table: &FactorTable) -> (usize, bool) {
    let mut len = 0;
    let mut all = true;
    for it in items {
        match it {
            Item::Term(_) => len += 1,
            Item::Var(v) => match th.get(*v) {
                Some(f) => len += table.factor_len(f),
                None => all = false,
            },
        }
    }
    (len, all)
}

fn split(
    items: &[Item],
    idx: usize,
    target: &[char],
    pos: usize,
    th: &mut Substitution,
    table: &FactorTable,
    f: &mut dyn FnMut(&Substitution),
) {
    if idx == items.len() {
        if pos == target.len() {
            f(th);
        }
        return;
    }
    match items[idx] {
        Item::Term(c) => {
            if target.get(pos) == Some(&c) {
                split(items, idx + 1, target, pos + 1, th, table, f);
            }
        }
        Item::Var(v) => match th.get(v) {
            Some(id) => {
                let val = table.get(id);
                if target.len() >= pos + val.len() && &target[pos..pos + val.len()] == val {
                    split(items, idx + 1, target, pos + val.len(), th, table, f);
                }
            }
            None => {
                let (rest_min, _) = fixed_length(&items[idx + 1..], th, table);
                let avail = target.len().saturating_sub(pos);
                if avail < rest_min {
                    return;
                }
                for l in 0..=avail - rest_min {
                    let id: FactorId = table
                        .id_of(&target[pos..pos + l])
                        .expect("a substring of a factor is a factor");
                    th.set(v, id);
                    split(items, idx + 1, target, pos + l, th, table, f);
                }
                th.bindings[v] = None;
            }
        },
    }
}

/// Whether a total substitution satisfies the equation.
pub fn satisfies(eq: &Equation, theta: &Substitution, table: &FactorTable) -> bool {
    let lhs = match theta.get(eq.lhs) {
        Some(f) => table.get(f),
        None => return false,
    };
    let mut pos = 0;
    for it in &eq.rhs.items {
        let piece: &[char] = match it {
            Item::Term(c) => std::slice::from_ref(c),
            Item::Var(v) => match theta.get(*v) {
                Some(f) => table.get(f),
                None => return false,
            },
        };
        if lhs.len() < pos + piece.len() || &lhs[pos..pos + piece.len()] != piece {
            return false;
        }
        pos += piece.len();
    }
    pos == lhs.len()
}
