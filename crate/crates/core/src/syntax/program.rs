//! Parser and canonical printer for FC-Datalog program text.
//!
//! ```text
//! program := header? rule+
//! header  := "alphabet" DQSTRING "."
//! rule    := REL "(" vars? ")" "<-" atom ("," atom)* "."
//! atom    := VAR "=" pattern | REL "(" vars? ")" | VAR "in" "/" drx "/"
//! pattern := (VAR | STRING)+
//! ```
//!
//! `REL` starts with an uppercase letter, `VAR` with a lowercase letter;
//! `univ` is the universe variable; `'abc'` is three terminals and `''` is
//! ε; `#` starts a comment that runs to the end of the line.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result, SourceSpan};
use crate::program::{
    validate_program, Atom, Equation, Item, Pattern, Program, Relation, Rule, VarId, UNIVERSE_NAME,
};
use crate::syntax::drx::parse_drx_at;
use crate::word::Alphabet;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Rel(String),
    Var(String),
    /// Single-quoted terminal string.
    Str(Vec<char>),
    /// Double-quoted string (alphabet header).
    DStr(Vec<char>),
    Arrow,
    LParen,
    RParen,
    Comma,
    Dot,
    Equals,
    /// Raw regex text between slashes, with its byte offset.
    Regex(String, usize),
    In,
    Alphabet,
}

struct Lexer<'a> {
    text: &'a str,
    pos: usize,
    toks: Vec<(Tok, SourceSpan)>,
}

impl<'a> Lexer<'a> {
    fn err(&self, msg: impl Into<String>, start: usize, end: usize) -> Error {
        Error::Parse { msg: msg.into(), span: SourceSpan::new(self.text, start, end) }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn quoted(&mut self, q: char) -> Result<Vec<char>> {
        let start = self.pos;
        self.bump();
        let mut out = Vec::new();
        loop {
            match self.bump() {
                None | Some('\n') => return Err(self.err("unterminated string", start, self.pos)),
                Some('\\') => match self.bump() {
                    Some(c) => out.push(c),
                    None => return Err(self.err("unterminated string", start, self.pos)),
                },
                Some(c) if c == q => return Ok(out),
                Some(c) => out.push(c),
            }
        }
    }

    fn run(mut self) -> Result<Vec<(Tok, SourceSpan)>> {
        let mut after_in = false;
        while let Some(c) = self.peek() {
            let start = self.pos;
            if c.is_whitespace() {
                self.bump();
                continue;
            }
            if c == '#' {
                while self.peek().is_some_and(|c| c != '\n') {
                    self.bump();
                }
                continue;
            }
            let tok = match c {
                '(' => {
                    self.bump();
                    Tok::LParen
                }
                ')' => {
                    self.bump();
                    Tok::RParen
                }
                ',' => {
                    self.bump();
                    Tok::Comma
                }
                '.' => {
                    self.bump();
                    Tok::Dot
                }
                '=' => {
                    self.bump();
                    Tok::Equals
                }
                '<' => {
                    self.bump();
                    if self.peek() == Some('-') {
                        self.bump();
                        Tok::Arrow
                    } else {
                        return Err(self.err("expected '<-'", start, self.pos));
                    }
                }
                '\'' => Tok::Str(self.quoted('\'')?),
                '"' => Tok::DStr(self.quoted('"')?),
                '/' if after_in => {
                    self.bump();
                    let body_start = self.pos;
                    let mut in_quote = false;
                    loop {
                        match self.bump() {
                            None => return Err(self.err("unterminated regex", start, self.pos)),
                            Some('\'') => in_quote = !in_quote,
                            Some('\\') if in_quote => {
                                self.bump();
                            }
                            Some('/') if !in_quote => break,
                            Some(_) => {}
                        }
                    }
                    Tok::Regex(self.text[body_start..self.pos - 1].to_string(), body_start)
                }
                c if c.is_alphabetic() || c == '_' => {
                    while self.peek().is_some_and(|c| c.is_alphanumeric() || c == '_') {
                        self.bump();
                    }
                    let word = &self.text[start..self.pos];
                    match word {
                        "in" => Tok::In,
                        "alphabet" if self.toks.is_empty() => Tok::Alphabet,
                        _ if c.is_uppercase() => Tok::Rel(word.to_string()),
                        _ if c.is_lowercase() || c == '_' => Tok::Var(word.to_string()),
                        _ => return Err(self.err(format!("identifier '{word}' must start with a letter of known case"), start, self.pos)),
                    }
                }
                other => return Err(self.err(format!("unexpected character '{other}'"), start, self.pos)),
            };
            after_in = tok == Tok::In;
            let span = SourceSpan::new(self.text, start, self.pos);
            self.toks.push((tok, span));
        }
        Ok(self.toks)
    }
}

struct Parser<'a> {
    text: &'a str,
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
    relations: Vec<Relation>,
    rel_spans: Vec<SourceSpan>,
}

/// Per-rule variable scope.
struct Scope {
    vars: Vec<String>,
}

impl Scope {
    fn new() -> Self {
        Scope { vars: vec![UNIVERSE_NAME.to_string()] }
    }

    fn var(&mut self, name: &str) -> VarId {
        if let Some(i) = self.vars.iter().position(|v| v == name) {
            return i;
        }
        self.vars.push(name.to_string());
        self.vars.len() - 1
    }
}

impl Parser<'_> {
    fn eof_span(&self) -> SourceSpan {
        SourceSpan::new(self.text, self.text.len(), self.text.len())
    }

    fn span(&self) -> SourceSpan {
        self.toks.get(self.pos).map_or_else(|| self.eof_span(), |t| t.1)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { msg: msg.into(), span: self.span() }
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn relation(&mut self, name: &str, arity: usize, span: SourceSpan) -> Result<usize> {
        if let Some(i) = self.relations.iter().position(|r| r.name == name) {
            if self.relations[i].arity != arity {
                return Err(Error::validation(
                    format!(
                        "arity mismatch: {name} used with {arity} arguments but first used at {} with {}",
                        self.rel_spans[i], self.relations[i].arity
                    ),
                    Some(span),
                ));
            }
            return Ok(i);
        }
        self.relations.push(Relation { name: name.to_string(), arity });
        self.rel_spans.push(span);
        Ok(self.relations.len() - 1)
    }

    fn var_list(&mut self, scope: &mut Scope) -> Result<Vec<VarId>> {
        self.expect(Tok::LParen, "'('")?;
        let mut out = Vec::new();
        if self.peek() == Some(&Tok::RParen) {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            match self.next() {
                Some(Tok::Var(v)) => out.push(scope.var(&v)),
                _ => {
                    self.pos -= 1;
                    return Err(self.err("expected a variable"));
                }
            }
            match self.next() {
                Some(Tok::Comma) => continue,
                Some(Tok::RParen) => return Ok(out),
                _ => {
                    self.pos -= 1;
                    return Err(self.err("expected ',' or ')'"));
                }
            }
        }
    }

    fn rule(&mut self, scope: &mut Scope) -> Result<Rule> {
        let start = self.span();
        let head_name = match self.next() {
            Some(Tok::Rel(r)) => r,
            _ => {
                self.pos -= 1;
                return Err(self.err("expected a relation symbol starting a rule"));
            }
        };
        let head_args = self.var_list(scope)?;
        let head = self.relation(&head_name, head_args.len(), start)?;
        self.expect(Tok::Arrow, "'<-'")?;
        let mut body = Vec::new();
        loop {
            body.push(self.atom(scope)?);
            match self.next() {
                Some(Tok::Comma) => continue,
                Some(Tok::Dot) => break,
                _ => {
                    self.pos -= 1;
                    return Err(self.err("expected ',' or '.'"));
                }
            }
        }
        let end = self.toks[self.pos - 1].1;
        Ok(Rule {
            head,
            head_args,
            body,
            vars: std::mem::take(&mut scope.vars),
            span: Some(start.join(end)),
        })
    }

    fn atom(&mut self, scope: &mut Scope) -> Result<Atom> {
        let span = self.span();
        match self.next() {
            Some(Tok::Rel(r)) => {
                let args = self.var_list(scope)?;
                let rel = self.relation(&r, args.len(), span)?;
                Ok(Atom::Rel { rel, args })
            }
            Some(Tok::Var(v)) => {
                let var = scope.var(&v);
                match self.next() {
                    Some(Tok::Equals) => {
                        let mut items = Vec::new();
                        loop {
                            match self.peek() {
                                Some(Tok::Var(x)) => {
                                    let x = x.clone();
                                    items.push(Item::Var(scope.var(&x)));
                                    self.pos += 1;
                                }
                                Some(Tok::Str(s)) => {
                                    items.extend(s.iter().map(|c| Item::Term(*c)));
                                    self.pos += 1;
                                }
                                _ => break,
                            }
                        }
                        let pattern_present = self.toks[self.pos - 1].0 != Tok::Equals;
                        if !pattern_present {
                            return Err(self.err("expected a pattern (use '' for the empty word)"));
                        }
                        Ok(Atom::Eq(Equation { lhs: var, rhs: Pattern::new(items) }))
                    }
                    Some(Tok::In) => match self.next() {
                        Some(Tok::Regex(body, offset)) => {
                            let regex = parse_drx_at(self.text, &body, offset)?;
                            Ok(Atom::Drx { var, regex })
                        }
                        _ => {
                            self.pos -= 1;
                            Err(self.err("expected '/regex/' after 'in'"))
                        }
                    },
                    _ => {
                        self.pos -= 1;
                        Err(self.err("expected '=' or 'in' after a variable"))
                    }
                }
            }
            _ => {
                self.pos -= 1;
                Err(self.err("expected an atom"))
            }
        }
    }
}

/// Parses and validates program text.
pub fn parse_program(text: &str) -> Result<Program> {
    let toks = Lexer { text, pos: 0, toks: Vec::new() }.run()?;
    let mut p = Parser { text, toks, pos: 0, relations: Vec::new(), rel_spans: Vec::new() };
    let mut declared = None;
    if p.peek() == Some(&Tok::Alphabet) {
        let span = p.span();
        p.pos += 1;
        match p.next() {
            Some(Tok::DStr(s)) => {
                let alpha = Alphabet::new(s.iter().copied()).map_err(|e| Error::Validation {
                    msg: e.to_string(),
                    span: Some(span),
                })?;
                declared = Some(alpha);
            }
            _ => {
                p.pos -= 1;
                return Err(p.err("expected a double-quoted alphabet string"));
            }
        }
        p.expect(Tok::Dot, "'.' after the alphabet header")?;
    }
    let mut rules = Vec::new();
    while p.peek().is_some() {
        let mut scope = Scope::new();
        rules.push(p.rule(&mut scope)?);
    }
    if rules.is_empty() {
        return Err(p.err("a program needs at least one rule"));
    }
    let alphabet = match declared {
        Some(a) => a,
        None => {
            let mut syms = BTreeSet::new();
            for r in &rules {
                for a in &r.body {
                    match a {
                        Atom::Eq(e) => syms.extend(e.rhs.terminals()),
                        Atom::Drx { regex, .. } => syms.extend(regex.terminals()),
                        Atom::Rel { .. } => {}
                    }
                }
            }
            Alphabet::inferred(syms)
        }
    };
    let prog = Program { alphabet, relations: p.relations, rules };
    validate_program(&prog)?;
    Ok(prog)
}

fn quote_terminals(chars: &[char], out: &mut String) {
    out.push('\'');
    for &c in chars {
        if c == '\'' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('\'');
}

/// Prints a pattern in program syntax (`''` for ε).
pub fn print_pattern(rule: &Rule, p: &Pattern) -> String {
    if p.is_epsilon() {
        return "''".into();
    }
    let mut out = String::new();
    let mut run: Vec<char> = Vec::new();
    let flush = |run: &mut Vec<char>, out: &mut String| {
        if !run.is_empty() {
            if !out.is_empty() {
                out.push(' ');
            }
            quote_terminals(run, out);
            run.clear();
        }
    };
    for it in &p.items {
        match it {
            Item::Term(c) => run.push(*c),
            Item::Var(v) => {
                flush(&mut run, &mut out);
                if !out.is_empty() {
                    out.push(' ');
                }
                out.push_str(rule.var_name(*v));
            }
        }
    }
    flush(&mut run, &mut out);
    out
}

/// Prints one body atom.
pub fn print_atom(p: &Program, rule: &Rule, atom: &Atom) -> String {
    match atom {
        Atom::Eq(e) => format!("{} = {}", rule.var_name(e.lhs), print_pattern(rule, &e.rhs)),
        Atom::Rel { rel, args } => {
            let args: Vec<&str> = args.iter().map(|a| rule.var_name(*a)).collect();
            format!("{}({})", p.rel_name(*rel), args.join(", "))
        }
        Atom::Drx { var, regex } => format!("{} in /{}/", rule.var_name(*var), regex),
    }
}

/// Prints one rule (terminated by `.`).
pub fn print_rule(p: &Program, rule: &Rule) -> String {
    let args: Vec<&str> = rule.head_args.iter().map(|a| rule.var_name(*a)).collect();
    let body: Vec<String> = rule.body.iter().map(|a| print_atom(p, rule, a)).collect();
    format!("{}({}) <- {}.", p.rel_name(rule.head), args.join(", "), body.join(", "))
}

/// Canonical program text; `parse_program(print_program(p)) == p`.
pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    if !p.alphabet.is_empty() {
        out.push_str("alphabet \"");
        for c in p.alphabet.symbols() {
            if c == '"' || c == '\\' {
                out.push('\\');
            }
            out.push(c);
        }
        out.push_str("\".\n");
    }
    for r in &p.rules {
        let _ = writeln!(out, "{}", print_rule(p, r));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX11: &str = "Ans() <- univ = y z, E(y,z). E(x,y) <- x = '', y = ''. E(x,y) <- x = 'a' u, y = 'b' v, E(u,v).";

    #[test]
    fn parses_example_1_1() {
        let p = parse_program(EX11).unwrap();
        assert_eq!(p.rules.len(), 3);
        assert_eq!(p.relations, vec![Relation { name: "Ans".into(), arity: 0 }, Relation { name: "E".into(), arity: 2 }]);
        assert!(p.is_boolean());
    }

    #[test]
    fn smallest_program() {
        let p = parse_program("Ans() <- univ = ''.").unwrap();
        assert_eq!(p.rules.len(), 1);
        assert!(p.alphabet.is_empty());
    }

    #[test]
    fn head_var_missing_from_body() {
        let e = parse_program("Ans() <- R(univ). R(x) <- y = ''.").unwrap_err();
        assert!(e.to_string().contains("head variable x not in body"), "{e}");
    }

    #[test]
    fn round_trip_and_spelling() {
        let p = parse_program(EX11).unwrap();
        let text = print_program(&p);
        assert!(text.contains("x = ''"));
        assert_eq!(parse_program(&text).unwrap(), p);
        let q = parse_program("alphabet \"abd\". Ans() <- univ in /<m:(a|b)+> d &m/.").unwrap();
        assert!(print_program(&q).contains("univ in /<m:(a|b)+> d &m/"));
        assert_eq!(parse_program(&print_program(&q)).unwrap(), q);
    }

    #[test]
    fn rejects_self_referential_equation() {
        let e = parse_program("Ans() <- x = x 'a', univ = x.").unwrap_err();
        assert!(matches!(e, Error::Validation { .. }));
    }

    #[test]
    fn arity_mismatch_and_spans() {
        let e = parse_program("Ans() <- R(univ). R(x, y) <- x = y.").unwrap_err();
        assert!(e.to_string().contains("arity mismatch"), "{e}");
        for bad in ["Ans() <- univ = 'a'", "Ans( <- univ = ''.", "Ans() <- univ = .", "Ans() <- univ in /(a/.", "Ans() <- univ = 'a"] {
            let e = parse_program(bad).unwrap_err();
            let sp = e.span().expect("span");
            assert!(sp.start <= sp.end && sp.end <= bad.len(), "{bad}: {sp:?}");
        }
    }

    #[test]
    fn declared_alphabet_checks_terminals() {
        assert!(parse_program("alphabet \"a\". Ans() <- univ = 'b'.").is_err());
        assert!(parse_program("alphabet \"ab\". Ans() <- univ = 'b'.").is_ok());
    }
}
