//! Evaluators: the bottom-up fixpoint reference and the goal-directed
//! top-down tiers.

pub mod crosscheck;
pub mod fixpoint;
pub mod topdown;

use std::fmt;
use std::time::Duration;

use serde::Serialize;

use crate::error::{Error, Result};

pub use crosscheck::{CrossCheck, CrossChecker, EvaluatorAnswer};
pub use fixpoint::{evaluate, evaluate_semi_naive, evaluate_with, model_check, model_check_with, FixpointOptions, RelationStore};
pub use topdown::{
    build_rule_lookup, eval_deterministic, ChainEvaluator, eval_drx_constraint, eval_memoized, eval_sd, solve_unique_equation, EvalTrace, Field,
    Outcome, RuleLookup, Span, TopDownOptions, TraceStep,
};

/// Answer of a Boolean program on a word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accept,
    Reject,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Accept
        } else {
            Verdict::Reject
        }
    }

    pub fn is_accept(self) -> bool {
        self == Verdict::Accept
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Accept => "accept",
            Verdict::Reject => "reject",
        })
    }
}

/// Resource guard shared by the evaluators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Maximum number of stored tuples (fixpoint) or memo entries (top-down).
    pub max_tuples: usize,
    pub max_time: Duration,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_tuples: 10_000_000, max_time: Duration::from_secs(30) }
    }
}

impl Budget {
    /// Parses `"<tuples>"`, `"<tuples>,<seconds>"` or key-value pairs
    /// `"tuples=<n>,time=<seconds>"`.
    pub fn parse(s: &str) -> Result<Budget> {
        let mut b = Budget::default();
        for (i, part) in s.split(',').map(str::trim).filter(|p| !p.is_empty()).enumerate() {
            let (key, value) = match part.split_once('=') {
                Some((k, v)) => (k.trim(), v.trim()),
                None if i == 0 => ("tuples", part),
                None => ("time", part),
            };
            let bad = || Error::Precondition(format!("malformed budget `{s}`"));
            match key {
                "tuples" => b.max_tuples = value.parse().map_err(|_| bad())?,
                "time" => b.max_time = Duration::from_secs_f64(value.parse().map_err(|_| bad())?),
                _ => return Err(bad()),
            }
        }
        Ok(b)
    }
}

/// Checks that an input word uses only symbols of the program's alphabet.
pub(crate) fn check_word(p: &crate::program::Program, w: &str) -> Result<Vec<char>> {
    p.alphabet.check_word(w)?;
    Ok(w.chars().collect())
}
