//! Abstract syntax of regular expressions with memory bindings and recalls.

use std::collections::BTreeSet;
use std::fmt;

/// A regex with memories: `<m: δ>` binds memory `m`, `&m` recalls it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DrxAst {
    Term(char),
    /// Concatenation; the empty concatenation denotes ε.
    Concat(Vec<DrxAst>),
    Union(Box<DrxAst>, Box<DrxAst>),
    Plus(Box<DrxAst>),
    Star(Box<DrxAst>),
    Bind(String, Box<DrxAst>),
    Recall(String),
}

impl DrxAst {
    /// Builds a concatenation, collapsing the one-element case.
    pub fn concat(mut items: Vec<DrxAst>) -> DrxAst {
        if items.len() == 1 {
            items.pop().unwrap()
        } else {
            DrxAst::Concat(items)
        }
    }

    pub fn union(a: DrxAst, b: DrxAst) -> DrxAst {
        DrxAst::Union(Box::new(a), Box::new(b))
    }

    pub fn plus(a: DrxAst) -> DrxAst {
        DrxAst::Plus(Box::new(a))
    }

    pub fn star(a: DrxAst) -> DrxAst {
        DrxAst::Star(Box::new(a))
    }

    pub fn bind(m: &str, a: DrxAst) -> DrxAst {
        DrxAst::Bind(m.to_string(), Box::new(a))
    }

    pub fn recall(m: &str) -> DrxAst {
        DrxAst::Recall(m.to_string())
    }

    /// Direct children.
    pub fn children(&self) -> Vec<&DrxAst> {
        match self {
            DrxAst::Term(_) | DrxAst::Recall(_) => vec![],
            DrxAst::Concat(v) => v.iter().collect(),
            DrxAst::Union(a, b) => vec![a, b],
            DrxAst::Plus(a) | DrxAst::Star(a) | DrxAst::Bind(_, a) => vec![a],
        }
    }

    /// Terminal symbols occurring in the expression.
    pub fn terminals(&self) -> BTreeSet<char> {
        let mut out = BTreeSet::new();
        self.walk(&mut |n| {
            if let DrxAst::Term(c) = n {
                out.insert(*c);
            }
        });
        out
    }

    /// Memory names in order of first binding.
    pub fn memories(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        self.walk(&mut |n| {
            if let DrxAst::Bind(m, _) = n {
                if !out.contains(m) {
                    out.push(m.clone());
                }
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a DrxAst)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    /// Whether the expression matches ε (memories aside: recalls count as
    /// possibly empty).
    pub fn nullable(&self) -> bool {
        match self {
            DrxAst::Term(_) => false,
            DrxAst::Recall(_) => true,
            DrxAst::Concat(v) => v.iter().all(DrxAst::nullable),
            DrxAst::Union(a, b) => a.nullable() || b.nullable(),
            DrxAst::Plus(a) | DrxAst::Bind(_, a) => a.nullable(),
            DrxAst::Star(_) => true,
        }
    }

    /// Checks that every recall names a bound memory and that no bind is
    /// nested inside a bind of the same memory.
    pub fn check_recalls_bound(&self) -> Result<(), String> {
        let bound: BTreeSet<String> = self.memories().into_iter().collect();
        let mut err = None;
        self.walk(&mut |n| {
            if let DrxAst::Recall(m) = n {
                if !bound.contains(m) && err.is_none() {
                    err = Some(format!("recall &{m} of a memory that is never bound"));
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        fn nested(n: &DrxAst, open: &mut Vec<String>) -> Result<(), String> {
            if let DrxAst::Bind(m, _) = n {
                if open.contains(m) {
                    return Err(format!("memory {m} is bound inside its own binding"));
                }
                open.push(m.clone());
                for c in n.children() {
                    nested(c, open)?;
                }
                open.pop();
                return Ok(());
            }
            for c in n.children() {
                nested(c, open)?;
            }
            Ok(())
        }
        nested(self, &mut Vec::new())
    }

    fn needs_quote(c: char) -> bool {
        matches!(c, '|' | '(' | ')' | '<' | '>' | '&' | '+' | '*' | '/' | '\'' | ':' | '\\')
            || c.is_whitespace()
    }
}

impl fmt::Display for DrxAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DrxAst::Term(c) => {
                if DrxAst::needs_quote(*c) {
                    write!(f, "'{c}'")
                } else {
                    write!(f, "{c}")
                }
            }
            DrxAst::Concat(v) if v.is_empty() => write!(f, "()"),
            DrxAst::Concat(v) => {
                for (i, c) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    match c {
                        DrxAst::Union(..) | DrxAst::Concat(_) => write!(f, "({c})")?,
                        _ => write!(f, "{c}")?,
                    }
                }
                Ok(())
            }
            DrxAst::Union(a, b) => {
                write!(f, "{a}|")?;
                match **b {
                    DrxAst::Union(..) => write!(f, "({b})"),
                    _ => write!(f, "{b}"),
                }
            }
            DrxAst::Plus(a) | DrxAst::Star(a) => {
                let op = if matches!(self, DrxAst::Plus(_)) { '+' } else { '*' };
                match **a {
                    DrxAst::Union(..) | DrxAst::Concat(_) => write!(f, "({a}){op}"),
                    _ => write!(f, "{a}{op}"),
                }
            }
            DrxAst::Bind(m, a) => write!(f, "<{m}:{a}>"),
            DrxAst::Recall(m) => write!(f, "&{m}"),
        }
    }
}
