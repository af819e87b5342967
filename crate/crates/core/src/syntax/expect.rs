//! Sample words attached to a program file as comments:
//!
//! ```text
//! # expect-accept: ε ab aabb
//! # expect-reject: a ba
//! # expect-drx: (a b)*
//! ```
//!
//! Words are separated by whitespace; `ε` stands for the empty word. The
//! optional regex describes the whole language, for exhaustive checks.

/// Words a program is expected to accept and to reject.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Expectations {
    pub accept: Vec<String>,
    pub reject: Vec<String>,
    /// Regex (with memories) defining the expected language.
    pub drx: Option<String>,
}

impl Expectations {
    pub fn is_empty(&self) -> bool {
        self.accept.is_empty() && self.reject.is_empty() && self.drx.is_none()
    }
}

/// Collects the `expect-accept` / `expect-reject` comment lines of a file.
pub fn parse_expectations(text: &str) -> Expectations {
    let mut e = Expectations::default();
    for line in text.lines() {
        let Some(comment) = line.trim_start().strip_prefix('#') else { continue };
        let Some((key, words)) = comment.split_once(':') else { continue };
        if key.trim() == "expect-drx" {
            e.drx = Some(words.trim().to_string());
            continue;
        }
        let target = match key.trim() {
            "expect-accept" => &mut e.accept,
            "expect-reject" => &mut e.reject,
            _ => continue,
        };
        target.extend(words.split_whitespace().map(|w| if w == "ε" { String::new() } else { w.to_string() }));
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_both_lists() {
        let e = parse_expectations("# expect-accept: ε ab\n#expect-reject: a\nAns() <- R(univ). # expect-accept: zz\n");
        assert_eq!(e.accept, vec!["".to_string(), "ab".to_string()]);
        assert_eq!(e.reject, vec!["a".to_string()]);
    }

    #[test]
    fn language_regex() {
        let e = parse_expectations("# expect-drx: <x:a+> b &x \n");
        assert_eq!(e.drx.as_deref(), Some("<x:a+> b &x"));
    }

    #[test]
    fn other_comments_are_ignored() {
        assert!(parse_expectations("# a comment: with a colon\n").is_empty());
    }
}
