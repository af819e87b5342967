//! Error type shared by every module of the crate.

use std::fmt;

use serde::Serialize;

/// A region of source text: byte offsets plus 1-based line/column of `start`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

impl SourceSpan {
    /// Builds a span for `start..end` inside `text`, computing line and column.
    pub fn new(text: &str, start: usize, end: usize) -> Self {
        let start = start.min(text.len());
        let end = end.clamp(start, text.len());
        let before = &text[..start];
        let line = before.matches('\n').count() + 1;
        let column = before.rfind('\n').map_or(start, |nl| start - nl - 1) + 1;
        SourceSpan { start, end, line, column }
    }

    /// The smallest span covering both `self` and `other`.
    pub fn join(self, other: SourceSpan) -> SourceSpan {
        if other.start < self.start {
            SourceSpan { end: self.end.max(other.end), ..other }
        } else {
            SourceSpan { end: self.end.max(other.end), ..self }
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// All failures reported by the library.
///
/// The variants map onto the CLI exit codes: parse and validation errors
/// (2), precondition and usage errors (3), budget exhaustion (5).
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Lexical or syntactic error in program, regex or JSON text.
    #[error("parse error at {span}: {msg}")]
    Parse { msg: String, span: SourceSpan },
    /// The text parsed but violates a well-formedness rule.
    #[error("invalid program: {msg}")]
    Validation { msg: String, span: Option<SourceSpan> },
    /// An input word contains a symbol outside the alphabet.
    #[error("rejected input: {0}")]
    Input(String),
    /// An operation was invoked outside its precondition.
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// A resource guard (tuples, time, steps) was exceeded.
    #[error("budget exceeded: {0}")]
    Budget(String),
    /// An internal consistency check failed; indicates a bug in an analysis.
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>, span: Option<SourceSpan>) -> Self {
        Error::Validation { msg: msg.into(), span }
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    /// Span attached to the error, if any.
    pub fn span(&self) -> Option<SourceSpan> {
        match self {
            Error::Parse { span, .. } => Some(*span),
            Error::Validation { span, .. } => *span,
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
