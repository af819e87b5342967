mod common;

use common::{ab_words, ab_words_exact, corpus_program, palindrome_from_half};
use fcdl::eval::{
    eval_deterministic, eval_memoized, eval_sd, evaluate, evaluate_semi_naive, model_check, Budget, ChainEvaluator, CrossChecker,
    TopDownOptions, Verdict,
};
use fcdl::{parse_program, Error, Tier};

fn traced() -> TopDownOptions {
    TopDownOptions { trace: true, ..Default::default() }
}

#[test]
fn anbn_by_halves() {
    let p = corpus_program("anbn.fcd");
    assert_eq!(model_check(&p, "aabb").unwrap(), Verdict::Accept);
    assert_eq!(model_check(&p, "abab").unwrap(), Verdict::Reject);
    assert_eq!(eval_memoized(&p, "aaabbb", Default::default()).unwrap().verdict, Verdict::Accept);
}

#[test]
fn squares_trace_follows_the_unique_rule_choices() {
    let p = corpus_program("squares.fcd");
    let out = eval_deterministic(&p, "abab", traced()).unwrap();
    assert_eq!(out.verdict, Verdict::Accept);
    let rules: Vec<usize> = out.trace.steps.iter().map(|s| s.rule).collect();
    // Ans, then R(x) <- x = y 'b', then R(x) <- x = y 'a', then R(x) <- x = ''.
    assert_eq!(rules, vec![0, 3, 1, 2]);
    let xs: Vec<Option<String>> = out.trace.steps[1..].iter().map(|s| s.bindings["x"].clone()).collect();
    assert_eq!(xs, vec![Some("ab".into()), Some("a".into()), Some("".into())]);
}

#[test]
fn palindrome_rejects_ab() {
    let p = corpus_program("palindrome.fcd");
    assert_eq!(eval_sd(&p, "ab", Default::default()).unwrap().verdict, Verdict::Reject);
}

#[test]
fn palindrome_recursive_steps() {
    let p = corpus_program("palindrome.fcd");
    let sd = ChainEvaluator::strictly_decreasing(&p).unwrap();
    for len in 0..=12usize {
        for half in ab_words_exact(len.div_ceil(2)) {
            let w = palindrome_from_half(&half, len);
            let out = sd.eval(&w, Default::default()).unwrap();
            assert!(out.verdict.is_accept(), "{w}");
            // One R application per peeled pair plus the closing ε or letter rule.
            assert_eq!(out.trace.recursive_steps, len / 2 + 1, "{w}");
            if len % 2 == 0 {
                assert_eq!(out.trace.recursive_steps, len.div_ceil(2) + 1, "{w}");
            }
        }
    }
}

#[test]
fn evenlen_relations_agree_between_fixpoint_modes() {
    let p = corpus_program("evenlen.fcd");
    for w in ab_words(6) {
        let naive = evaluate(&p, &w).unwrap();
        let semi = evaluate_semi_naive(&p, &w).unwrap();
        assert_eq!(naive.snapshot(), semi.snapshot(), "{w}");
        let ans = naive.relation("Ans").unwrap();
        assert!(ans.iter().all(|t| !t[0].is_empty() && t[0].chars().count() % 2 == 0), "{w}: {ans:?}");
    }
    let store = evaluate(&p, "abab").unwrap();
    let mut ans: Vec<String> = store.relation("Ans").unwrap().into_iter().map(|t| t[0].clone()).collect();
    ans.sort();
    assert_eq!(ans, vec!["ab", "abab", "ba"]);
}

#[test]
fn top_down_needs_a_boolean_program() {
    let p = corpus_program("evenlen.fcd");
    assert!(matches!(eval_memoized(&p, "ab", Default::default()), Err(Error::Precondition(_))));
}

#[test]
fn tier_preconditions_are_enforced() {
    let p = corpus_program("anbn.fcd");
    let e = eval_sd(&p, "ab", Default::default()).unwrap_err();
    assert!(matches!(e, Error::Precondition(_)), "{e}");
    let p = corpus_program("self_loop.fcd");
    assert!(eval_sd(&p, "", Default::default()).is_err());
    assert_eq!(eval_deterministic(&p, "ab", Default::default()).unwrap().verdict, Verdict::Reject);
}

#[test]
fn foreign_letters_are_input_errors() {
    let p = corpus_program("palindrome.fcd");
    assert!(model_check(&p, "abc").is_err());
    assert!(eval_memoized(&p, "abc", Default::default()).is_err());
}

#[test]
fn tuple_budget_is_reported() {
    let p = corpus_program("evenlen.fcd");
    let opts = fcdl::eval::FixpointOptions { budget: Budget { max_tuples: 5, ..Default::default() }, semi_naive: false };
    let e = fcdl::eval::evaluate_with(&p, "abababab", opts).unwrap_err();
    assert!(matches!(e, Error::Budget(_)), "{e}");
}

#[test]
fn cross_checker_consults_every_applicable_tier() {
    let p = corpus_program("palindrome.fcd");
    let cc = CrossChecker::new(&p).unwrap();
    assert_eq!(cc.report().tier, Tier::SdFast);
    assert_eq!(cc.evaluators(), vec!["fixpoint", "semi-naive", "memoized", "deterministic", "sd"]);
    let r = cc.run("abba").unwrap();
    assert!(r.agree && r.verdict().is_accept());
    let p = corpus_program("astar_bstar.fcd");
    assert_eq!(CrossChecker::new(&p).unwrap().evaluators(), vec!["fixpoint", "semi-naive", "memoized"]);
}

#[test]
fn lookahead_program_runs_on_the_chain_evaluator() {
    let p = corpus_program("followed_by_b.fcd");
    let e = ChainEvaluator::deterministic(&p).unwrap();
    for w in ab_words(8) {
        let want = w.split('a').skip(1).all(|s| s.starts_with('b'));
        let out = e.eval(&w, Default::default()).unwrap();
        assert_eq!(out.verdict.is_accept(), want, "{w}");
        assert!(out.trace.fallback.is_none(), "{w}");
    }
}

#[test]
fn drx_constraint_program() {
    let p = corpus_program("ac_bb.fcd");
    assert_eq!(eval_sd(&p, "abcacbc", Default::default()).unwrap().verdict, Verdict::Accept);
    assert_eq!(eval_sd(&p, "abcacb", Default::default()).unwrap().verdict, Verdict::Reject);
    let p = parse_program("alphabet \"ab\". Ans() <- univ in /<x:(a|b)+> a &x/.").unwrap();
    assert_eq!(model_check(&p, "bab").unwrap(), Verdict::Accept);
    assert_eq!(model_check(&p, "baa").unwrap(), Verdict::Reject);
}
