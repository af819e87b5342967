mod common;

use common::{corpus_program, corpus_programs};
use fcdl::analysis::{semantic_determinism_oracle, semantic_determinism_oracle_bounded};
use fcdl::{classify, parse_program, Error, Tier};

#[test]
fn corpus_tiers() {
    let expected = [
        ("abstar.fcd", Tier::SdFast),
        ("ac_bb.fcd", Tier::SdFast),
        ("anbn.fcd", Tier::MemoizedTopdown),
        ("anbn_dollaplus.fcd", Tier::SdFast),
        ("any.fcd", Tier::SdFast),
        ("astar_bstar.fcd", Tier::MemoizedTopdown),
        ("even_a.fcd", Tier::SdFast),
        ("evenlen.fcd", Tier::Fixpoint),
        ("followed_by_b.fcd", Tier::SdFast),
        ("palindrome.fcd", Tier::SdFast),
        ("self_loop.fcd", Tier::DeterministicTopdown),
        ("squares.fcd", Tier::SdFast),
    ];
    let got: Vec<(String, Tier)> = corpus_programs().into_iter().map(|(n, _, p)| (n, classify(&p).tier)).collect();
    let want: Vec<(String, Tier)> = expected.iter().map(|(n, t)| (n.to_string(), *t)).collect();
    assert_eq!(got, want);
}

#[test]
fn anbn_split_is_not_uniquely_defined() {
    let r = classify(&corpus_program("anbn.fcd"));
    assert!(r.flags.linear && !r.flags.dolla_plus && !r.flags.uniquely_defined_all);
    assert!(r.diagnostics.iter().any(|d| d.check == "uniquely_defined_all"), "{:?}", r.diagnostics);
}

#[test]
fn squares_fits_no_olla_form_but_is_dolla_plus() {
    let r = classify(&corpus_program("squares.fcd"));
    assert!(!r.flags.olla);
    assert!(r.diagnostics.iter().any(|d| d.check == "olla" && d.rule == Some(0)), "{:?}", r.diagnostics);
    assert!(r.flags.dolla_plus && r.flags.globally_deterministic);
}

#[test]
fn evenlen_is_not_linear() {
    let r = classify(&corpus_program("evenlen.fcd"));
    assert!(!r.flags.linear && !r.flags.boolean);
    let d = r.diagnostics.iter().find(|d| d.check == "linear").expect("linearity diagnostic");
    assert_eq!(d.rule, Some(0));
}

#[test]
fn palindrome_is_strictly_decreasing() {
    let r = classify(&corpus_program("palindrome.fcd"));
    assert!(r.flags.dolla_plus && r.flags.strictly_decreasing);
    let sd = r.decreasing.expect("decreasing report");
    assert_eq!(sd.positions["R"], vec![0]);
}

#[test]
fn a_self_loop_is_not_strictly_decreasing() {
    let r = classify(&corpus_program("self_loop.fcd"));
    assert!(r.flags.dolla && !r.flags.strictly_decreasing);
}

#[test]
fn overlapping_rules_break_global_determinism() {
    let p = parse_program("alphabet \"ab\". Ans() <- R(univ). R(x) <- x = ''. R(x) <- x = 'a' y, R(y). R(x) <- x = 'a' y, S(y). S(x) <- x = 'b' y, R(y).").unwrap();
    let r = classify(&p);
    assert!(r.flags.olla && !r.flags.globally_deterministic);
    assert_eq!(r.tier, Tier::MemoizedTopdown);
    let oracle = semantic_determinism_oracle(&p, "a").unwrap();
    assert!(!oracle.globally_deterministic);
    assert_eq!(oracle.overlaps[0].rules, (2, 3));
}

#[test]
fn oracle_refuses_long_words() {
    let p = corpus_program("palindrome.fcd");
    assert!(matches!(semantic_determinism_oracle(&p, "abababababab"), Err(Error::Precondition(_))));
    assert!(semantic_determinism_oracle_bounded(&p, "abababababab", 12).unwrap().globally_deterministic);
}

#[test]
fn report_json_has_flags_and_tier() {
    let v = classify(&corpus_program("palindrome.fcd")).to_json();
    assert_eq!(v["tier"], "sd-fast");
    assert_eq!(v["flags"]["dolla_plus"], true);
    assert!(v["diagnostics"].is_array());
}
