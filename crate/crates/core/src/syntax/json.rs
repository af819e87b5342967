//! JSON formats for multi-head automata and Turing machines.
//!
//! Automaton:
//! `{"states":[…], "k":2, "alphabet":["a","b"], "headSelector":{"q0":1,…},
//!   "transitions":[{"from":"q0","symbol":"<","to":"q1","move":1},…],
//!   "start":"q0", "accept":"qf"}` — head numbers are 1-based, `<` and `>`
//! are the left and right endmarkers.
//!
//! Turing machine:
//! `{"states":[…], "tape":["_","1"], "blank":"_",
//!   "delta":[{"state":"s","read":"_","to":"t","write":"1","move":"R"},…],
//!   "start":"s", "omega":"acc"}`.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::error::{Error, Result, SourceSpan};
use crate::machines::{MultiHeadAutomaton, TapeSymbol, TmMove, TuringSpec};
use crate::word::Alphabet;

/// A JSON scalar used as a name: string or number.
#[derive(Deserialize, Debug, Clone)]
#[serde(untagged)]
enum Name {
    S(String),
    N(i64),
}

impl Name {
    fn text(&self) -> String {
        match self {
            Name::S(s) => s.clone(),
            Name::N(n) => n.to_string(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AutomatonJson {
    states: Vec<Name>,
    k: usize,
    alphabet: Vec<String>,
    #[serde(rename = "headSelector")]
    head_selector: BTreeMap<String, usize>,
    transitions: Vec<TransitionJson>,
    start: Name,
    accept: Name,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionJson {
    from: Name,
    symbol: String,
    to: Name,
    #[serde(rename = "move")]
    mv: i8,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TuringJson {
    states: Vec<Name>,
    tape: Vec<String>,
    blank: String,
    delta: Vec<DeltaJson>,
    start: Name,
    omega: Option<Name>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DeltaJson {
    state: Name,
    read: String,
    to: Name,
    write: String,
    #[serde(rename = "move")]
    mv: String,
}

fn json_err(text: &str, e: serde_json::Error) -> Error {
    let mut offset = 0;
    for (i, line) in text.split_inclusive('\n').enumerate() {
        if i + 1 == e.line() {
            offset += e.column().saturating_sub(1).min(line.len());
            break;
        }
        offset += line.len();
    }
    let offset = offset.min(text.len());
    Error::Parse { msg: e.to_string(), span: SourceSpan::new(text, offset, offset) }
}

fn single_char(s: &str, what: &str) -> Result<char> {
    let mut it = s.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(Error::validation(format!("{what} \"{s}\" must be a single character"), None)),
    }
}

fn lookup(states: &[String], n: &Name) -> Result<usize> {
    let t = n.text();
    states
        .iter()
        .position(|s| *s == t)
        .ok_or_else(|| Error::validation(format!("unknown state \"{t}\""), None))
}

/// Parses and validates an automaton description.
pub fn parse_automaton(text: &str) -> Result<MultiHeadAutomaton> {
    let j: AutomatonJson = serde_json::from_str(text).map_err(|e| json_err(text, e))?;
    let states: Vec<String> = j.states.iter().map(Name::text).collect();
    let mut syms = Vec::new();
    for s in &j.alphabet {
        let c = single_char(s, "alphabet symbol")?;
        if c == '<' || c == '>' {
            return Err(Error::validation("'<' and '>' are reserved for the endmarkers", None));
        }
        syms.push(c);
    }
    let alphabet = Alphabet::new(syms)?;
    let mut head = vec![0usize; states.len()];
    for (s, &h) in &j.head_selector {
        let i = lookup(&states, &Name::S(s.clone()))?;
        if h == 0 || h > j.k {
            return Err(Error::validation(format!("head {h} of state {s} is not in 1..{}", j.k), None));
        }
        head[i] = h - 1;
    }
    let mut transitions: BTreeMap<(usize, TapeSymbol), Vec<(usize, i8)>> = BTreeMap::new();
    for t in &j.transitions {
        let from = lookup(&states, &t.from)?;
        let to = lookup(&states, &t.to)?;
        let sym = match t.symbol.as_str() {
            "<" => TapeSymbol::Left,
            ">" => TapeSymbol::Right,
            s => {
                let c = single_char(s, "transition symbol")?;
                if !alphabet.contains(c) {
                    return Err(Error::validation(format!("unknown symbol \"{s}\" in transition"), None));
                }
                TapeSymbol::Letter(c)
            }
        };
        transitions.entry((from, sym)).or_default().push((to, t.mv));
    }
    let start = lookup(&states, &j.start)?;
    let accept = lookup(&states, &j.accept)?;
    MultiHeadAutomaton::new(states, j.k, alphabet, head, transitions, start, accept)
}

/// Parses and validates a Turing machine description.
pub fn parse_turing(text: &str) -> Result<TuringSpec> {
    let j: TuringJson = serde_json::from_str(text).map_err(|e| json_err(text, e))?;
    let states: Vec<String> = j.states.iter().map(Name::text).collect();
    let tape: Vec<char> = j.tape.iter().map(|s| single_char(s, "tape symbol")).collect::<Result<_>>()?;
    let sym = |s: &str| -> Result<usize> {
        let c = single_char(s, "tape symbol")?;
        tape.iter()
            .position(|&t| t == c)
            .ok_or_else(|| Error::validation(format!("symbol \"{s}\" is not in the tape alphabet"), None))
    };
    let blank = sym(&j.blank)?;
    let omega = match &j.omega {
        Some(o) => lookup(&states, o)?,
        None => return Err(Error::validation("missing accepting state \"omega\"", None)),
    };
    let start = lookup(&states, &j.start)?;
    let mut delta = BTreeMap::new();
    for d in &j.delta {
        let q = lookup(&states, &d.state)?;
        let a = sym(&d.read)?;
        let mv = match d.mv.as_str() {
            "L" => TmMove::L,
            "R" => TmMove::R,
            m => return Err(Error::validation(format!("move \"{m}\" must be \"L\" or \"R\""), None)),
        };
        let entry = (lookup(&states, &d.to)?, sym(&d.write)?, mv);
        if delta.insert((q, a), entry).is_some() {
            return Err(Error::validation(
                format!("nondeterministic: two transitions for ({}, {})", d.state.text(), d.read),
                None,
            ));
        }
    }
    TuringSpec::new(states, tape, blank, delta, start, omega)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ASTAR: &str = r#"{"states":["q0","qf"],"k":1,"alphabet":["a"],"headSelector":{"q0":1,"qf":1},
      "transitions":[{"from":"q0","symbol":"<","to":"q0","move":1},
                     {"from":"q0","symbol":"a","to":"q0","move":1},
                     {"from":"q0","symbol":">","to":"qf","move":0}],
      "start":"q0","accept":"qf"}"#;

    #[test]
    fn astar_is_deterministic() {
        let m = parse_automaton(ASTAR).unwrap();
        assert!(m.deterministic);
        assert!(m.accepts("") && m.accepts("aaa"));
    }

    #[test]
    fn duplicated_transition_is_nondeterministic() {
        let text = ASTAR.replace(
            r#"{"from":"q0","symbol":"a","to":"q0","move":1},"#,
            r#"{"from":"q0","symbol":"a","to":"q0","move":1},{"from":"q0","symbol":"a","to":"qf","move":0},"#,
        );
        assert!(!parse_automaton(&text).unwrap().deterministic);
    }

    #[test]
    fn left_move_on_left_endmarker_is_rejected() {
        let text = ASTAR.replace(r#""symbol":"<","to":"q0","move":1"#, r#""symbol":"<","to":"q0","move":-1"#);
        assert!(parse_automaton(&text).unwrap_err().to_string().contains("left endmarker"));
    }

    const TRIVIAL: &str = r#"{"states":["s","acc"],"tape":["_","1"],"blank":"_",
      "delta":[{"state":"s","read":"_","to":"acc","write":"_","move":"R"}],"start":"s","omega":"acc"}"#;

    #[test]
    fn turing_specs() {
        assert!(parse_turing(TRIVIAL).is_ok());
        let dup = TRIVIAL.replace(
            r#""delta":["#,
            r#""delta":[{"state":"s","read":"_","to":"s","write":"1","move":"R"},"#,
        );
        assert!(parse_turing(&dup).unwrap_err().to_string().contains("nondeterministic"));
        let no_omega = TRIVIAL.replace(r#","omega":"acc""#, "");
        assert!(parse_turing(&no_omega).unwrap_err().to_string().contains("omega"));
    }

    #[test]
    fn malformed_json_has_span() {
        let text = "{\"states\": [}";
        let e = parse_automaton(text).unwrap_err();
        assert!(e.span().unwrap().end <= text.len());
    }
}
