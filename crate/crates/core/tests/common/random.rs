//! Seeded generator of small linear programs built from one-letter-lookahead
//! equation forms. Not every output is OLLA or guarded; callers filter with
//! `classify`.

use rand::seq::SliceRandom;
use rand::Rng;

const LETTERS: [char; 2] = ['a', 'b'];

fn letter(rng: &mut impl Rng) -> char {
    LETTERS[rng.gen_range(0..2)]
}

fn head_vars(arity: usize) -> Vec<String> {
    (1..=arity).map(|i| format!("x{i}")).collect()
}

/// A random program with at most `max_rules` rules and relations of arity
/// at most `max_arity`, as program text.
pub fn random_program(rng: &mut impl Rng, max_rules: usize, max_arity: usize) -> String {
    let rel_count = rng.gen_range(1..=2);
    let arities: Vec<usize> = (0..rel_count).map(|_| rng.gen_range(1..=max_arity)).collect();
    let mut rules = Vec::new();

    // Ans hands the whole word (or ε) to R1.
    let mut body = Vec::new();
    let mut args = Vec::new();
    for j in 0..arities[0] {
        if j == 0 || rng.gen_bool(0.5) {
            args.push("univ".to_string());
        } else {
            args.push(format!("y{j}"));
            body.push(format!("y{j} = ''"));
        }
    }
    body.insert(0, format!("R1({})", args.join(", ")));
    rules.push(format!("Ans() <- {}.", body.join(", ")));

    let extra = rng.gen_range(1..max_rules);
    for _ in 0..extra {
        let h = rng.gen_range(0..rel_count);
        let xs = head_vars(arities[h]);
        let mut body = Vec::new();
        if rng.gen_bool(0.35) {
            for (j, x) in xs.iter().enumerate() {
                if j > 0 && rng.gen_bool(0.2) {
                    body.push(format!("{x} = x1"));
                } else {
                    body.push(format!("{x} = ''"));
                }
            }
        } else {
            let t = rng.gen_range(0..rel_count);
            let ys: Vec<String> = (1..=arities[t]).map(|j| format!("y{j}")).collect();
            for (j, y) in ys.iter().enumerate() {
                match xs.get(j) {
                    Some(x) => {
                        let c = letter(rng);
                        body.push(match rng.gen_range(0..6) {
                            0 | 1 => format!("{x} = '{c}' {y}"),
                            2 | 3 => format!("{x} = {y} '{c}'"),
                            4 => format!("{x} = {y}"),
                            _ => format!("{y} = {x} '{c}'"),
                        });
                    }
                    None => body.push(format!("{y} = ''")),
                }
            }
            for x in xs.iter().skip(ys.len()) {
                body.push(format!("{x} = ''"));
            }
            body.push(format!("R{}({})", t + 1, ys.join(", ")));
        }
        if rng.gen_bool(0.3) {
            let x = xs.choose(rng).unwrap();
            let c = letter(rng);
            body.push(if rng.gen_bool(0.5) { format!("univ = {x} '{c}' z") } else { format!("univ = z '{c}' {x}") });
        }
        body.shuffle(rng);
        rules.push(format!("R{}({}) <- {}.", h + 1, xs.join(", "), body.join(", ")));
    }
    format!("alphabet \"ab\".\n{}\n", rules.join("\n"))
}
