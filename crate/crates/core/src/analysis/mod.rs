//! Fragment classification: which syntactic fragment a program belongs to
//! and, from that, which evaluator can run it.

pub mod deps;
pub mod olla;
pub mod oracle;
pub mod sd;
pub mod shape;
pub mod unique;

use std::fmt;

use serde::Serialize;

use crate::compilers::drx_check_deterministic;
use crate::error::SourceSpan;
use crate::program::{validate_program, Atom, Program, Rule};

pub use deps::{check_linear, dependency_info, recursive_atoms, top_bottom, DependencyInfo, RuleCtx, TopBottom};
pub use olla::{classify_olla, local_determinism_olla, EqForm, EqLabel, OllaInfo, Side};
pub use oracle::{semantic_determinism_oracle, semantic_determinism_oracle_bounded, SemanticDetReport, ORACLE_MAX_LEN};
pub use sd::{check_strictly_decreasing, SdReport};
pub use shape::{profile, profiles_conflict, rule_shape, shapes_conflict, ProfileValue, RuleShape};
pub use unique::{uniquely_defined, UniqueDefs};

/// One finding of a check, attached to a rule when it has one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub check: String,
    pub rule: Option<usize>,
    pub span: Option<SourceSpan>,
    pub msg: String,
}

impl Diagnostic {
    pub fn rule(check: &str, index: usize, rule: &Rule, msg: String) -> Self {
        Diagnostic { check: check.to_string(), rule: Some(index), span: rule.span, msg }
    }

    pub fn program(check: &str, msg: String) -> Self {
        Diagnostic { check: check.to_string(), rule: None, span: None, msg }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.check)?;
        if let Some(r) = self.rule {
            write!(f, " rule {r}")?;
        }
        if let Some(s) = self.span {
            write!(f, " at {s}")?;
        }
        write!(f, ": {}", self.msg)
    }
}

/// Membership flags of a program.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FragmentFlags {
    pub valid: bool,
    pub boolean: bool,
    pub linear: bool,
    pub olla: bool,
    pub guarded: bool,
    pub locally_deterministic: bool,
    pub globally_deterministic: bool,
    pub dolla: bool,
    pub uniquely_defined_all: bool,
    pub dolla_plus: bool,
    pub strictly_decreasing: bool,
    pub drx_constraints_legal: bool,
}

/// Evaluation strategies, cheapest first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tier {
    SdFast,
    DeterministicTopdown,
    MemoizedTopdown,
    Fixpoint,
}

impl Tier {
    pub fn as_str(self) -> &'static str {
        match self {
            Tier::SdFast => "sd-fast",
            Tier::DeterministicTopdown => "deterministic-topdown",
            Tier::MemoizedTopdown => "memoized-topdown",
            Tier::Fixpoint => "fixpoint",
        }
    }

    pub fn parse(s: &str) -> Option<Tier> {
        [Tier::SdFast, Tier::DeterministicTopdown, Tier::MemoizedTopdown, Tier::Fixpoint]
            .into_iter()
            .find(|t| t.as_str() == s)
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of global determinism checking for every head symbol.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GlobalDeterminism {
    pub deterministic: bool,
    /// Classic profiles (only for OLLA programs).
    pub profiles: Option<Vec<Vec<ProfileValue>>>,
    /// `(i, j)` pairs of same-head rules proven disjoint.
    pub conflicts: Vec<(usize, usize)>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Everything `classify` computes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FragmentReport {
    pub flags: FragmentFlags,
    pub tier: Tier,
    pub diagnostics: Vec<Diagnostic>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decreasing: Option<SdReport>,
}

impl FragmentReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// Pairwise disjointness of the rules of every head symbol with at least
/// two rules. Rules are compared by the shapes their equations force on
/// the head arguments (first/last letters, exact values, lookahead letters
/// and aliasing); for OLLA programs the classic profiles are reported too.
pub fn profiles_and_global_determinism(p: &Program, olla: Option<&OllaInfo>, shapes: &[RuleShape]) -> GlobalDeterminism {
    let mut out = GlobalDeterminism { deterministic: true, ..Default::default() };
    let profiles: Option<Vec<Vec<ProfileValue>>> =
        olla.filter(|o| o.olla).map(|o| p.rules.iter().zip(&o.labels).map(|(r, l)| profile(r, l)).collect());
    for r in 0..p.relations.len() {
        let rules = p.rules_for(r);
        for (a, &i) in rules.iter().enumerate() {
            for &j in &rules[a + 1..] {
                let by_profile = profiles.as_ref().is_some_and(|pr| profiles_conflict(&pr[i], &pr[j]));
                if by_profile || shapes_conflict(&shapes[i], &shapes[j], p.arity(r)) {
                    out.conflicts.push((i, j));
                } else {
                    out.deterministic = false;
                    out.diagnostics.push(Diagnostic::rule(
                        "globally_deterministic",
                        j,
                        &p.rules[j],
                        format!("cannot show that rules {i} and {j} of {} never apply to the same arguments", p.rel_name(r)),
                    ));
                }
            }
        }
    }
    out.profiles = profiles;
    out
}

/// Regex constraints may only occur in rules whose head symbol has exactly
/// one rule, and every embedded regex must be deterministic.
pub fn check_drx_constraints(p: &Program) -> (bool, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    for (ri, rule) in p.rules.iter().enumerate() {
        for atom in &rule.body {
            let Atom::Drx { regex, .. } = atom else { continue };
            let n = p.rules_for(rule.head).len();
            if n != 1 {
                diags.push(Diagnostic::rule(
                    "drx_constraints_legal",
                    ri,
                    rule,
                    format!("regex constraint in a rule of {}, which has {n} rules (must have exactly one)", p.rel_name(rule.head)),
                ));
            }
            let det = drx_check_deterministic(regex);
            if !det.deterministic {
                diags.push(Diagnostic::rule(
                    "drx_constraints_legal",
                    ri,
                    rule,
                    format!("regex /{regex}/ is not deterministic: {}", det.diagnostics.join("; ")),
                ));
            }
        }
    }
    (diags.is_empty(), diags)
}

/// Uniquely-defined test for every rule plus global determinism.
pub fn check_dolla_plus(p: &Program) -> (bool, Vec<Diagnostic>) {
    let dep = dependency_info(p);
    let (linear, mut diags) = check_linear(p, &dep);
    if !linear {
        return (false, diags);
    }
    let (all, d) = unique_all(p, &dep);
    diags.extend(d);
    let g = profiles_and_global_determinism(p, None, &shape::program_shapes(p));
    diags.extend(g.diagnostics);
    (all && g.deterministic, diags)
}

fn unique_all(p: &Program, dep: &DependencyInfo) -> (bool, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    for (ri, rule) in p.rules.iter().enumerate() {
        let Ok(tb) = top_bottom(rule, dep) else { continue };
        let u = uniquely_defined(rule, &tb);
        if !u.all {
            let missing: Vec<&str> =
                rule.used_vars().into_iter().filter(|v| !u.defined.contains(v)).map(|v| rule.var_name(v)).collect();
            diags.push(Diagnostic::rule(
                "uniquely_defined_all",
                ri,
                rule,
                format!("not uniquely defined: {}", missing.join(", ")),
            ));
        }
    }
    (diags.is_empty(), diags)
}

/// Computes every fragment flag and the recommended evaluator.
pub fn classify(p: &Program) -> FragmentReport {
    let mut flags = FragmentFlags { boolean: p.is_boolean(), ..Default::default() };
    let mut diagnostics = Vec::new();
    if let Err(e) = validate_program(p) {
        diagnostics.push(Diagnostic { check: "valid".into(), rule: None, span: e.span(), msg: e.to_string() });
        return FragmentReport { flags, tier: Tier::Fixpoint, diagnostics, decreasing: None };
    }
    flags.valid = true;
    let (drx_legal, d) = check_drx_constraints(p);
    flags.drx_constraints_legal = drx_legal;
    diagnostics.extend(d);
    let dep = dependency_info(p);
    let (linear, d) = check_linear(p, &dep);
    flags.linear = linear;
    diagnostics.extend(d);
    let mut decreasing = None;
    if linear {
        let ctxs = olla::rule_contexts(p, &dep).expect("linear program has rule contexts");
        let info = classify_olla(p, &ctxs);
        flags.olla = info.olla;
        flags.guarded = info.olla && info.guarded;
        diagnostics.extend(info.diagnostics.iter().cloned());
        diagnostics.extend(info.guard_diagnostics.iter().cloned());
        let shapes = shape::program_shapes(p);
        if info.olla {
            let inert: Vec<bool> = shapes.iter().map(|s| s.inert).collect();
            let (local, d) = local_determinism_olla(p, &ctxs, &inert);
            flags.locally_deterministic = local;
            diagnostics.extend(d);
        }
        let g = profiles_and_global_determinism(p, Some(&info), &shapes);
        flags.globally_deterministic = g.deterministic;
        diagnostics.extend(g.diagnostics);
        flags.dolla = flags.olla && flags.locally_deterministic && flags.globally_deterministic;
        let (all, d) = unique_all(p, &dep);
        flags.uniquely_defined_all = all;
        diagnostics.extend(d);
        flags.dolla_plus = all && flags.globally_deterministic;
        if flags.dolla || flags.dolla_plus {
            let rep = check_strictly_decreasing(p, &dep, &ctxs);
            flags.strictly_decreasing = rep.sd;
            diagnostics.extend(rep.diagnostics.iter().cloned());
            decreasing = Some(rep);
        }
    }
    let tier = select_tier(&flags);
    FragmentReport { flags, tier, diagnostics, decreasing }
}

/// The cheapest evaluator whose preconditions the flags establish.
pub fn select_tier(f: &FragmentFlags) -> Tier {
    if !f.valid || !f.linear || !f.boolean {
        Tier::Fixpoint
    } else if (f.dolla || f.dolla_plus) && f.drx_constraints_legal {
        if f.strictly_decreasing {
            Tier::SdFast
        } else {
            Tier::DeterministicTopdown
        }
    } else {
        Tier::MemoizedTopdown
    }
}
