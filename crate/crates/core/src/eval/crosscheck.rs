//! Runs every evaluator applicable to a program on the same word and
//! compares the answers.

use serde::Serialize;

use crate::analysis::{classify, FragmentReport, Tier};
use crate::error::Result;
use crate::eval::fixpoint::{evaluate_with, FixpointOptions};
use crate::eval::topdown::{eval_memoized, ChainEvaluator, TopDownOptions};
use crate::eval::{Budget, Verdict};
use crate::program::Program;

/// Answer of one evaluator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EvaluatorAnswer {
    pub evaluator: &'static str,
    pub verdict: Verdict,
    /// Set when a chain evaluator handed over to the memoized one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fallback: Option<String>,
}

/// All answers on one word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrossCheck {
    pub word: String,
    pub answers: Vec<EvaluatorAnswer>,
    /// Verdicts coincide and, for non-Boolean programs, so do the naive and
    /// semi-naive relation stores.
    pub agree: bool,
}

impl CrossCheck {
    /// The reference (naive fixpoint) verdict.
    pub fn verdict(&self) -> Verdict {
        self.answers[0].verdict
    }
}

/// A program prepared for repeated cross-checking.
pub struct CrossChecker<'p> {
    p: &'p Program,
    report: FragmentReport,
    det: Option<ChainEvaluator<'p>>,
    sd: Option<ChainEvaluator<'p>>,
    budget: Budget,
}

impl<'p> CrossChecker<'p> {
    pub fn new(p: &'p Program) -> Result<Self> {
        Self::with_budget(p, Budget::default())
    }

    pub fn with_budget(p: &'p Program, budget: Budget) -> Result<Self> {
        let report = classify(p);
        let det = match report.tier {
            Tier::SdFast | Tier::DeterministicTopdown => Some(ChainEvaluator::deterministic(p)?),
            _ => None,
        };
        let sd = match report.tier {
            Tier::SdFast => Some(ChainEvaluator::strictly_decreasing(p)?),
            _ => None,
        };
        Ok(CrossChecker { p, report, det, sd, budget })
    }

    pub fn report(&self) -> &FragmentReport {
        &self.report
    }

    /// Names of the evaluators [`CrossChecker::run`] consults, in order.
    pub fn evaluators(&self) -> Vec<&'static str> {
        let mut v = vec!["fixpoint", "semi-naive"];
        if self.p.is_boolean() {
            v.push("memoized");
        }
        if self.det.is_some() {
            v.push("deterministic");
        }
        if self.sd.is_some() {
            v.push("sd");
        }
        v
    }

    pub fn run(&self, w: &str) -> Result<CrossCheck> {
        let naive = evaluate_with(self.p, w, FixpointOptions { budget: self.budget, semi_naive: false })?;
        let semi = evaluate_with(self.p, w, FixpointOptions { budget: self.budget, semi_naive: true })?;
        let answer = |evaluator, verdict| EvaluatorAnswer { evaluator, verdict, fallback: None };
        let mut answers = vec![
            answer("fixpoint", Verdict::from_bool(naive.accepts(self.p))),
            answer("semi-naive", Verdict::from_bool(semi.accepts(self.p))),
        ];
        let mut agree = naive.snapshot() == semi.snapshot();
        if self.p.is_boolean() {
            let opts = TopDownOptions { budget: self.budget, ..Default::default() };
            answers.push(answer("memoized", eval_memoized(self.p, w, opts)?.verdict));
            for (name, e) in [("deterministic", &self.det), ("sd", &self.sd)] {
                if let Some(e) = e {
                    let out = e.eval(w, opts)?;
                    answers.push(EvaluatorAnswer { evaluator: name, verdict: out.verdict, fallback: out.trace.fallback });
                }
            }
        }
        agree &= answers.iter().all(|a| a.verdict == answers[0].verdict);
        Ok(CrossCheck { word: w.to_string(), answers, agree })
    }
}
