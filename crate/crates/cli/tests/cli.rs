use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn fcdl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fcdl")).args(args).env_remove("FCDL_BUDGET").output().expect("run fcdl")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Runs with `--json`, checks the exit code and the fields every report has.
fn report(args: &[&str], want_code: i32) -> Value {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let o = fcdl(&all);
    assert_eq!(code(&o), want_code, "{args:?}\nstdout: {}\nstderr: {}", stdout(&o), stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap_or_else(|e| panic!("{args:?}: invalid JSON ({e}): {}", stdout(&o)));
    assert!(v["command"].is_string(), "{v}");
    if want_code == 0 {
        assert!(v.get("error").is_none(), "{v}");
    } else {
        assert_eq!(v["error"]["exitCode"], want_code, "{v}");
        assert!(v["error"]["message"].is_string());
    }
    v
}

fn path(name: &str) -> String {
    corpus(name).display().to_string()
}

#[test]
fn check_palindrome() {
    let v = report(&["check", &path("palindrome.fcd")], 0);
    let flags = &v["report"]["flags"];
    assert_eq!(flags["linear"], true);
    assert_eq!(flags["dolla_plus"], true);
    assert_eq!(flags["strictly_decreasing"], true);
    assert_eq!(v["tier"], "sd-fast");
}

#[test]
fn check_evenlen_is_fixpoint_tier() {
    let v = report(&["check", &path("evenlen.fcd")], 0);
    assert_eq!(v["report"]["flags"]["linear"], false);
    assert_eq!(v["tier"], "fixpoint");
}

#[test]
fn malformed_program_exits_2_with_span() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.fcd");
    std::fs::write(&bad, "Ans() <- R(univ).\nR(x <- x = ''.\n").unwrap();
    let v = report(&["check", bad.to_str().unwrap()], 2);
    assert_eq!(v["error"]["kind"], "parse");
    assert_eq!(v["error"]["span"]["line"], 2);
    let o = fcdl(&["check", bad.to_str().unwrap()]);
    assert!(stderr(&o).contains("parse error at 2:"), "{}", stderr(&o));
}

#[test]
fn missing_file_exits_2() {
    assert_eq!(code(&fcdl(&["check", "/nonexistent/x.fcd"])), 2);
}

#[test]
fn eval_anbn() {
    let v = report(&["eval", &path("anbn.fcd"), "aabb"], 0);
    assert_eq!(v["verdicts"][0]["verdict"], "accept");
    assert_eq!(v["verdicts"][0]["tier"], "memoized-topdown");
    assert!(v["timing"]["wallMs"].is_number());
}

#[test]
fn eval_squares_trace() {
    let v = report(&["eval", &path("squares.fcd"), "abab", "--trace"], 0);
    let steps = v["verdicts"][0]["trace"]["steps"].as_array().unwrap();
    let rules: Vec<u64> = steps.iter().map(|s| s["rule"].as_u64().unwrap()).collect();
    assert_eq!(rules, vec![0, 3, 1, 2]);
    assert_eq!(steps[0]["bindings"]["y"], "ab");
    let o = fcdl(&["eval", &path("squares.fcd"), "abab", "--trace"]);
    assert!(stdout(&o).starts_with("abab\taccept\n  rule 0 Ans: y=ab\n"), "{}", stdout(&o));
}

#[test]
fn eval_palindrome_rejects_ab() {
    let o = fcdl(&["eval", &path("palindrome.fcd"), "ab"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "ab\treject\n");
}

#[test]
fn verify_never_changes_verdicts() {
    let words = ["", "a", "ab", "aba", "abba", "abab", "babbab"];
    for tier in ["auto", "fixpoint", "memo", "det", "sd"] {
        let mut args = vec!["eval", "--tier", tier];
        let p = path("palindrome.fcd");
        args.push(&p);
        args.extend(words);
        let plain = report(&args, 0);
        args.push("--verify");
        let verified = report(&args, 0);
        for (a, b) in plain["verdicts"].as_array().unwrap().iter().zip(verified["verdicts"].as_array().unwrap()) {
            assert_eq!(a["verdict"], b["verdict"], "{tier}");
            assert_eq!(b["verified"], true);
        }
    }
}

#[test]
fn tier_precondition_exits_3() {
    let v = report(&["eval", "--tier", "sd", &path("anbn.fcd"), "ab"], 3);
    assert_eq!(v["error"]["kind"], "precondition");
}

#[test]
fn words_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let words = dir.path().join("words.txt");
    std::fs::write(&words, "ab\naabb\nba\n").unwrap();
    let arg = format!("@{}", words.display());
    let v = report(&["eval", &path("anbn_dollaplus.fcd"), &arg], 0);
    let got: Vec<&str> = v["verdicts"].as_array().unwrap().iter().map(|x| x["verdict"].as_str().unwrap()).collect();
    assert_eq!(got, vec!["accept", "accept", "reject"]);
}

#[test]
fn foreign_symbol_exits_2() {
    assert_eq!(code(&fcdl(&["eval", &path("palindrome.fcd"), "abc"])), 2);
}

#[test]
fn budget_from_environment_exits_5() {
    let o = Command::new(env!("CARGO_BIN_EXE_fcdl"))
        .args(["eval", &path("evenlen.fcd"), "abababab"])
        .env("FCDL_BUDGET", "tuples=5")
        .output()
        .unwrap();
    assert_eq!(code(&o), 5, "{}", stderr(&o));
    let o = Command::new(env!("CARGO_BIN_EXE_fcdl")).args(["check", &path("anbn.fcd")]).env("FCDL_BUDGET", "lots").output().unwrap();
    assert_eq!(code(&o), 3);
}

#[test]
fn non_boolean_program_lists_answers() {
    let v = report(&["eval", &path("evenlen.fcd"), "abab"], 0);
    assert_eq!(v["answers"][0]["answers"], serde_json::json!([["ab"], ["abab"], ["ba"]]));
    assert!(v.get("verdicts").is_none());
    report(&["eval", "--tier", "memo", &path("evenlen.fcd"), "abab"], 3);
}

#[test]
fn bench_reports_median() {
    let o = fcdl(&["eval", &path("palindrome.fcd"), "abba", "--bench", "3"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("median") && stdout(&o).contains("rule applications"), "{}", stdout(&o));
}

#[test]
fn compile_copy_regex_for_dollaplus() {
    let v = report(&["compile", "--drx", "<x:(a|b)+> d &x", "--target", "dollaplus"], 0);
    assert!(v["symbols"].as_u64().unwrap() <= 6);
    assert!(v["rules"].as_u64().unwrap() <= 29);
    assert_eq!(v["stats"]["boundRules"], 29);
    assert_eq!(v["stats"]["boundSymbols"], 6);
    assert_eq!(v["report"]["flags"]["dolla_plus"], true);
    assert_eq!(v["tier"], "sd-fast");
}

#[test]
fn compiled_program_round_trips_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("copy.fcd");
    let o = fcdl(&["compile", "--drx", "<x:(a|b)+> d &x", "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
    let o = fcdl(&["eval", out.to_str().unwrap(), "abdab", "abdba", "--verify"]);
    assert_eq!(stdout(&o), "abdab\taccept\nabdba\treject\n");
}

#[test]
fn compile_astar_automaton() {
    let v = report(&["compile", "--automaton", &path("astar.json"), "--target", "dolla"], 0);
    assert_eq!(v["report"]["flags"]["dolla"], true);
    report(&["compile", "--automaton", &path("astar.json"), "--target", "dollaplus"], 3);
}

#[test]
fn nondeterministic_regex_exits_3() {
    let o = fcdl(&["compile", "--drx", "<x:(a|b)*> &x"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("not deterministic"), "{}", stderr(&o));
}

#[test]
fn gen_pspace_instance() {
    let v = report(&["gen-pspace", &path("step_and_accept.tm.json"), "-k", "2"], 0);
    assert_eq!(v["word"], "aa");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tm.fcd");
    assert_eq!(code(&fcdl(&["gen-pspace", &path("loop.tm.json"), "-k", "2", "-o", out.to_str().unwrap()])), 0);
    let v = report(&["eval", out.to_str().unwrap(), "aa"], 0);
    assert_eq!(v["verdicts"][0]["verdict"], "reject");
}

#[test]
fn shipped_corpus_agrees() {
    let dir = corpus("");
    let v = report(&["corpus", "--dir", dir.to_str().unwrap(), "--max-len", "4"], 0);
    assert_eq!(v["agree"], true);
    assert!(v["cases"].as_array().unwrap().len() >= 20);
}

#[test]
fn broken_program_yields_minimal_counterexample() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("abstar.fcd"),
        "# expect-drx: (a b)*\nalphabet \"ab\".\nAns() <- R(univ).\nR(x) <- x = ''.\nR(x) <- x = 'a' y, S(y).\nS(x) <- x = 'a' y, R(y).\n",
    )
    .unwrap();
    let v = report(&["corpus", "--dir", dir.path().to_str().unwrap(), "--max-len", "6"], 4);
    let c = &v["cases"][0];
    assert_eq!(c["agree"], false);
    assert!(c["counterexample"].as_str().unwrap().starts_with("\"aa\""), "{c}");
}

#[test]
fn empty_corpus_warns() {
    let dir = tempfile::tempdir().unwrap();
    let o = fcdl(&["corpus", "--dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("warning"));
    assert!(stdout(&o).contains("0 cases"));
}
