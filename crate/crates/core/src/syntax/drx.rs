//! Parser for regexes with memories.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! union   := concat ("|" concat)*
//! concat  := postfix*
//! postfix := primary ("+" | "*")*
//! primary := "(" union ")" | "<" IDENT ":" union ">" | "&" IDENT | "'" CHAR "'" | CHAR
//! ```

use crate::compilers::drx_automaton::check_recall_order;
use crate::drx::DrxAst;
use crate::error::{Error, Result, SourceSpan};

/// Parses a regex; spans in errors are relative to `text`.
pub fn parse_drx(text: &str) -> Result<DrxAst> {
    parse_drx_at(text, text, 0)
}

/// Parses the regex `text`, which starts at byte `offset` of `full` (used
/// for regexes embedded in programs so that spans point into the program).
pub(crate) fn parse_drx_at(full: &str, text: &str, offset: usize) -> Result<DrxAst> {
    let mut p = DrxParser { full, chars: text.char_indices().collect(), pos: 0, offset, end: text.len() };
    p.skip_ws();
    if p.at_end() {
        return Err(p.err("empty regex"));
    }
    let ast = p.union()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.err(&format!("unexpected '{}'", p.peek().unwrap())));
    }
    let whole = SourceSpan::new(full, offset, offset + text.len());
    ast.check_recalls_bound().map_err(|msg| Error::Parse { msg, span: whole })?;
    check_recall_order(&ast).map_err(|msg| Error::Parse { msg, span: whole })?;
    Ok(ast)
}

struct DrxParser<'a> {
    full: &'a str,
    chars: Vec<(usize, char)>,
    pos: usize,
    offset: usize,
    end: usize,
}

impl DrxParser<'_> {
    fn byte(&self) -> usize {
        self.offset + self.chars.get(self.pos).map_or(self.end, |(b, _)| *b)
    }

    fn err(&self, msg: &str) -> Error {
        let b = self.byte();
        let e = (b + 1).min(self.offset + self.end);
        Error::Parse { msg: msg.to_string(), span: SourceSpan::new(self.full, b, e) }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|(_, c)| *c)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected '{c}'")))
        }
    }

    fn union(&mut self) -> Result<DrxAst> {
        let mut left = self.concat()?;
        loop {
            self.skip_ws();
            if self.peek() == Some('|') {
                self.pos += 1;
                let right = self.concat()?;
                left = DrxAst::union(left, right);
            } else {
                return Ok(left);
            }
        }
    }

    fn concat(&mut self) -> Result<DrxAst> {
        let mut items = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                None | Some('|') | Some(')') | Some('>') => break,
                _ => items.push(self.postfix()?),
            }
        }
        Ok(DrxAst::concat(items))
    }

    fn postfix(&mut self) -> Result<DrxAst> {
        let mut a = self.primary()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    a = DrxAst::plus(a);
                }
                Some('*') => {
                    self.pos += 1;
                    a = DrxAst::star(a);
                }
                _ => return Ok(a),
            }
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let mut s = String::new();
        while let Some(c) = self.peek() {
            let ok = if s.is_empty() { c.is_ascii_alphabetic() || c == '_' } else { c.is_ascii_alphanumeric() || c == '_' };
            if !ok {
                break;
            }
            s.push(c);
            self.pos += 1;
        }
        if s.is_empty() {
            Err(self.err("expected a memory name"))
        } else {
            Ok(s)
        }
    }

    fn primary(&mut self) -> Result<DrxAst> {
        self.skip_ws();
        let c = self.peek().ok_or_else(|| self.err("unexpected end of regex"))?;
        match c {
            '(' => {
                self.pos += 1;
                let inner = self.union()?;
                self.expect(')')?;
                Ok(inner)
            }
            '<' => {
                self.pos += 1;
                let name = self.ident()?;
                self.expect(':')?;
                let inner = self.union()?;
                self.expect('>')?;
                Ok(DrxAst::Bind(name, Box::new(inner)))
            }
            '&' => {
                self.pos += 1;
                Ok(DrxAst::Recall(self.ident()?))
            }
            '\'' => {
                self.pos += 1;
                let mut ch = self.peek().ok_or_else(|| self.err("unterminated quoted symbol"))?;
                if ch == '\\' {
                    self.pos += 1;
                    ch = self.peek().ok_or_else(|| self.err("unterminated quoted symbol"))?;
                }
                self.pos += 1;
                if self.peek() != Some('\'') {
                    return Err(self.err("quoted symbols hold exactly one character"));
                }
                self.pos += 1;
                Ok(DrxAst::Term(ch))
            }
            '|' | ')' | '>' | '+' | '*' | ':' | '/' | '\\' => Err(self.err(&format!("unexpected '{c}'"))),
            _ => {
                self.pos += 1;
                Ok(DrxAst::Term(c))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_examples_parse() {
        let g = parse_drx("<x:(a|b)+> d &x").unwrap();
        assert_eq!(
            g,
            DrxAst::Concat(vec![
                DrxAst::bind("x", DrxAst::plus(DrxAst::union(DrxAst::Term('a'), DrxAst::Term('b')))),
                DrxAst::Term('d'),
                DrxAst::recall("x"),
            ])
        );
        assert!(parse_drx("<x:(a|b)*> &x").is_ok());
    }

    #[test]
    fn rejects_unbound_and_misordered_recalls() {
        assert!(parse_drx("&y").unwrap_err().to_string().contains("never bound"));
        assert!(parse_drx("&x <x:a>").is_err());
        assert!(parse_drx("<x:a <x:b>>").is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in ["<m:(a|b)+> d &m", "a b", "(a|b)*", "a|b|c", "(a b)+ c", "'|' a", "<x:a*> (b|&x)"] {
            let a = parse_drx(s).unwrap();
            assert_eq!(parse_drx(&a.to_string()).unwrap(), a, "{s} -> {a}");
        }
        assert_eq!(parse_drx("<m:(a|b)+>d&m").unwrap().to_string(), "<m:(a|b)+> d &m");
    }

    #[test]
    fn error_spans_inside_text() {
        for s in ["(a", "a)", "<x a>", "''", "+a", "<:a>"] {
            let e = parse_drx(s).unwrap_err();
            let sp = e.span().unwrap();
            assert!(sp.start <= sp.end && sp.end <= s.len(), "{s}: {sp:?}");
        }
    }
}
