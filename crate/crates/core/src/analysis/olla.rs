//! One-letter-lookahead equation forms, orientation, guardedness and the
//! local-determinism coverage test.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::analysis::deps::{DependencyInfo, RuleCtx};
use crate::analysis::Diagnostic;
use crate::program::{Atom, Equation, Item, Program, RelId, VarId, UNIVERSE};

/// Where the letter of an OLLA equation sits relative to the variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// The permitted shapes of a pattern equation in an OLLA rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum EqForm {
    /// `x ≐ ε` with `x` a top variable.
    Epsilon,
    /// `x ≐ x′` with both top variables.
    Alias,
    /// `x ≐ y·a`, `x ≐ a·y` or `x ≐ y`: a top variable loses a letter.
    Delete(Option<(Side, char)>),
    /// `y ≐ x·a`, `y ≐ a·x` or `y ≐ x`: a letter is added to a top variable.
    Add(Option<(Side, char)>),
    /// `y ≐ ε` for a variable that is handed down to a body atom.
    PassEpsilon,
    /// `univ ≐ x·a·z` (right: the letter after `x`) or `univ ≐ z·a·x`
    /// (left: the letter before `x`).
    Look(Side, char),
}

impl EqForm {
    /// Side of a letter-carrying add/delete form (ε-forms have none).
    pub fn side(&self) -> Option<Side> {
        match self {
            EqForm::Delete(Some((s, _))) | EqForm::Add(Some((s, _))) => Some(*s),
            _ => None,
        }
    }
}

/// Label of one equation: its form and the variables playing each role.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EqLabel {
    /// Body index of the equation.
    pub atom: usize,
    pub form: EqForm,
    /// The top variable the form is about (`x` in the definitions).
    pub top: VarId,
    /// The other variable (`y`, `x′` or the lookahead's `z`), if any.
    pub other: Option<VarId>,
}

/// Labels for every rule; `None` marks an equation that fits no form.
#[derive(Clone, Debug, Default)]
pub struct OllaInfo {
    pub labels: Vec<Vec<(usize, Option<EqLabel>)>>,
    pub olla: bool,
    pub guarded: bool,
    pub diagnostics: Vec<Diagnostic>,
    pub guard_diagnostics: Vec<Diagnostic>,
}

/// `Some((var, letter, side))` if the pattern is `var·a` / `a·var`, and
/// `Some((var, None))` for a lone variable.
fn var_letter(items: &[Item]) -> Option<(VarId, Option<(Side, char)>)> {
    match items {
        [Item::Var(v)] => Some((*v, None)),
        [Item::Var(v), Item::Term(a)] => Some((*v, Some((Side::Right, *a)))),
        [Item::Term(a), Item::Var(v)] => Some((*v, Some((Side::Left, *a)))),
        _ => None,
    }
}

/// Labels one equation of a rule, trying the interpretations in a fixed
/// order (a variable may be top and bottom at once).
pub fn label_equation(eq: &Equation, atom: usize, ctx: &RuleCtx) -> Option<EqLabel> {
    let x = eq.lhs;
    let items = &eq.rhs.items;
    let is_top = |v: VarId| ctx.top.contains(&v);
    let lower = |v: VarId| ctx.is_passdown(v);
    if items.is_empty() {
        if is_top(x) {
            return Some(EqLabel { atom, form: EqForm::Epsilon, top: x, other: None });
        }
        if lower(x) {
            return Some(EqLabel { atom, form: EqForm::PassEpsilon, top: x, other: None });
        }
        return None;
    }
    if let Some((v, letter)) = var_letter(items) {
        if letter.is_none() && is_top(x) && is_top(v) {
            return Some(EqLabel { atom, form: EqForm::Alias, top: x, other: Some(v) });
        }
        if is_top(x) && lower(v) {
            return Some(EqLabel { atom, form: EqForm::Delete(letter), top: x, other: Some(v) });
        }
        if lower(x) && is_top(v) {
            return Some(EqLabel { atom, form: EqForm::Add(letter), top: v, other: Some(x) });
        }
        return None;
    }
    if x == UNIVERSE {
        if let [Item::Var(a), Item::Term(c), Item::Var(b)] = items.as_slice() {
            let free = |z: VarId| ctx.dangling.contains(&z);
            if is_top(*a) && *a != UNIVERSE && free(*b) {
                return Some(EqLabel { atom, form: EqForm::Look(Side::Right, *c), top: *a, other: Some(*b) });
            }
            if is_top(*b) && *b != UNIVERSE && free(*a) {
                return Some(EqLabel { atom, form: EqForm::Look(Side::Left, *c), top: *b, other: Some(*a) });
            }
        }
    }
    None
}

/// Labels every equation, checks left/right consistency and guardedness.
///
/// Orientation of a top variable is tracked per head symbol and head
/// argument position across all rules of the symbol; every other variable
/// (univ, bottom, pass-down) per rule. Lookahead equations have their own
/// before/after orientation.
pub fn classify_olla(p: &Program, ctxs: &[RuleCtx]) -> OllaInfo {
    let mut info = OllaInfo { olla: true, guarded: true, ..Default::default() };
    // (head symbol, position, lookahead?) → sides seen, with the rule
    let mut by_pos: BTreeMap<(RelId, usize, bool), BTreeMap<Side, usize>> = BTreeMap::new();
    for (ri, rule) in p.rules.iter().enumerate() {
        let ctx = &ctxs[ri];
        let mut labels = Vec::new();
        let mut per_var: BTreeMap<(VarId, bool), BTreeSet<Side>> = BTreeMap::new();
        for (ai, atom) in rule.body.iter().enumerate() {
            let Atom::Eq(eq) = atom else { continue };
            let label = label_equation(eq, ai, ctx);
            match &label {
                None => {
                    info.olla = false;
                    info.diagnostics.push(Diagnostic::rule(
                        "olla",
                        ri,
                        rule,
                        format!(
                            "equation {} fits none of the one-letter-lookahead forms",
                            crate::syntax::print_atom(p, rule, atom)
                        ),
                    ));
                }
                Some(l) => {
                    let oriented = match l.form {
                        EqForm::Look(s, _) => Some((s, true)),
                        f => f.side().map(|s| (s, false)),
                    };
                    if let Some((side, look)) = oriented {
                        let mut vars = vec![l.top];
                        if !look {
                            vars.extend(l.other);
                        }
                        for v in vars {
                            per_var.entry((v, look)).or_default().insert(side);
                            for (pos, _) in rule.head_args.iter().enumerate().filter(|(_, &a)| a == v) {
                                by_pos.entry((rule.head, pos, look)).or_default().entry(side).or_insert(ri);
                            }
                        }
                    }
                }
            }
            labels.push((ai, label));
        }
        for ((v, look), sides) in &per_var {
            if sides.len() > 1 {
                info.olla = false;
                info.diagnostics.push(Diagnostic::rule(
                    "olla",
                    ri,
                    rule,
                    format!(
                        "variable {} is used in both left and right {}equations",
                        rule.var_name(*v),
                        if *look { "lookahead " } else { "" }
                    ),
                ));
            }
        }
        info.labels.push(labels);
    }
    for ((rel, pos, look), sides) in &by_pos {
        if sides.len() > 1 {
            info.olla = false;
            let left = sides[&Side::Left];
            let right = sides[&Side::Right];
            info.diagnostics.push(Diagnostic::rule(
                "olla",
                right,
                &p.rules[right],
                format!(
                    "argument {} of {} is used in left {kind}equations (rule {left}) and right {kind}equations (rule {right})",
                    pos + 1,
                    p.rel_name(*rel),
                    kind = if *look { "lookahead " } else { "" }
                ),
            ));
        }
    }
    // guardedness: an alias equation needs a consuming equation unless the
    // head symbol has a single rule
    for (ri, rule) in p.rules.iter().enumerate() {
        if p.rules_for(rule.head).len() <= 1 {
            continue;
        }
        let labels = &info.labels[ri];
        let has_alias = labels.iter().any(|(_, l)| matches!(l, Some(EqLabel { form: EqForm::Alias, .. })));
        let consuming = labels.iter().any(|(_, l)| {
            matches!(
                l,
                Some(EqLabel { form: EqForm::Epsilon, .. }) | Some(EqLabel { form: EqForm::Delete(_), .. })
            )
        });
        if has_alias && !consuming {
            info.guarded = false;
            info.guard_diagnostics.push(Diagnostic::rule(
                "guarded",
                ri,
                rule,
                "alias equation without an ε or letter-deleting equation in a symbol with several rules".into(),
            ));
        }
    }
    info
}

/// The coverage test for local determinism of OLLA rules: every top
/// variable (other than univ) occurs in an equation or among the bottom
/// variables, and every bottom variable occurs in an equation or among the
/// top variables. Arguments of subroutine atoms and regex-constrained
/// variables also count as covered. Inert rules are skipped.
pub fn local_determinism_olla(p: &Program, ctxs: &[RuleCtx], inert: &[bool]) -> (bool, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    for (ri, rule) in p.rules.iter().enumerate() {
        if inert[ri] {
            continue;
        }
        let ctx = &ctxs[ri];
        let mut in_eq: BTreeSet<VarId> = BTreeSet::new();
        let mut in_drx: BTreeSet<VarId> = BTreeSet::new();
        for atom in &rule.body {
            match atom {
                Atom::Eq(e) => in_eq.extend(e.vars()),
                Atom::Drx { var, .. } => {
                    in_drx.insert(*var);
                }
                Atom::Rel { .. } => {}
            }
        }
        for &v in &ctx.top {
            if v == UNIVERSE {
                continue;
            }
            if !(in_eq.contains(&v) || ctx.bottom.contains(&v) || ctx.sub_args.contains(&v) || in_drx.contains(&v)) {
                diags.push(Diagnostic::rule(
                    "locally_deterministic",
                    ri,
                    rule,
                    format!("top variable {} occurs in no equation", rule.var_name(v)),
                ));
            }
        }
        for &v in &ctx.bottom {
            if !(in_eq.contains(&v) || ctx.top.contains(&v) || ctx.sub_args.contains(&v)) {
                diags.push(Diagnostic::rule(
                    "locally_deterministic",
                    ri,
                    rule,
                    format!("bottom variable {} is unconstrained", rule.var_name(v)),
                ));
            }
        }
    }
    (diags.is_empty(), diags)
}

/// Symbols with at least one rule, used by callers that iterate heads.
pub fn head_symbols(p: &Program) -> BTreeSet<RelId> {
    p.rules.iter().map(|r| r.head).collect()
}

/// Contexts of all rules, or `None` if some rule is not linear.
pub fn rule_contexts(p: &Program, dep: &DependencyInfo) -> Option<Vec<RuleCtx>> {
    p.rules.iter().map(|r| RuleCtx::new(r, dep).ok()).collect()
}
