mod common;

use common::{drx_counts, read_corpus};
use fcdl::analysis::{check_linear, dependency_info};
use fcdl::compilers::{compile_2dfa, compile_drx, compile_drx_dolla, compile_drx_dollaplus, drx_check_deterministic, generate_pspace_instance, DrxTarget};
use fcdl::eval::{model_check, Verdict};
use fcdl::syntax::{parse_automaton, parse_turing};
use fcdl::{classify, parse_drx, parse_program, print_program, Error, Tier};

#[test]
fn copy_with_separator_fits_its_bounds() {
    let g = parse_drx("<x:(a|b)+> d &x").unwrap();
    assert_eq!(drx_counts(&g), (1, 4));
    let (p, s) = compile_drx_dollaplus(&g, None).unwrap();
    assert!(p.relations.len() <= 6 && p.rules.len() <= 29, "{s:?}");
    assert_eq!(s.rules, p.rules.len());
    assert_eq!(s.symbols, p.relations.len());
    let (p, s) = compile_drx_dolla(&g, None).unwrap();
    assert!(s.within_bounds());
    assert_eq!(classify(&p).tier, Tier::SdFast);
    assert_eq!(model_check(&p, "abdab").unwrap(), Verdict::Accept);
    assert_eq!(model_check(&p, "abdba").unwrap(), Verdict::Reject);
}

#[test]
fn unbounded_copy_is_not_deterministic() {
    let g = parse_drx("<x:(a|b)*> &x").unwrap();
    assert!(!drx_check_deterministic(&g).deterministic);
    for target in [DrxTarget::Dolla, DrxTarget::DollaPlus] {
        let e = compile_drx(&g, None, target).unwrap_err();
        assert!(matches!(e, Error::Precondition(_)), "{e}");
        assert!(e.to_string().contains("not deterministic"), "{e}");
    }
}

#[test]
fn linear_target_accepts_nondeterministic_regexes() {
    let g = parse_drx("<x:(a|b)*> &x").unwrap();
    let (p, _) = compile_drx(&g, None, DrxTarget::Linear).unwrap();
    assert!(classify(&p).flags.linear);
    for (w, want) in [("", true), ("abab", true), ("aba", false), ("bb", true)] {
        assert_eq!(model_check(&p, w).unwrap().is_accept(), want, "{w}");
    }
}

#[test]
fn compiled_programs_reparse_to_themselves() {
    let g = parse_drx("<x:a+> b <y:(a|b)> &x &y").unwrap();
    for target in [DrxTarget::Dolla, DrxTarget::DollaPlus] {
        let (p, _) = compile_drx(&g, None, target).unwrap();
        let text = print_program(&p);
        assert_eq!(parse_program(&text).unwrap(), p, "{text}");
    }
}

#[test]
fn astar_compiles_to_a_deterministic_program() {
    let m = parse_automaton(&read_corpus("astar.json")).unwrap();
    let p = compile_2dfa(&m).unwrap();
    let r = classify(&p);
    assert!(r.flags.dolla, "{:?}", r.diagnostics);
    assert_eq!(model_check(&p, "").unwrap(), Verdict::Accept);
    assert_eq!(model_check(&p, "aab").unwrap(), Verdict::Reject);
}

#[test]
fn pspace_word_for_tiny_space() {
    let t = parse_turing(&read_corpus("step_and_accept.tm.json")).unwrap();
    let (_, w) = generate_pspace_instance(&t, 1).unwrap();
    assert_eq!(w, "aa");
    let (p, w) = generate_pspace_instance(&t, 4).unwrap();
    assert_eq!(w, "aaaa");
    assert!(check_linear(&p, &dependency_info(&p)).0);
    // One cell is too little room for the step to the right.
    let (p, w) = generate_pspace_instance(&t, 1).unwrap();
    assert_eq!(model_check(&p, &w).unwrap(), Verdict::Reject);
}
