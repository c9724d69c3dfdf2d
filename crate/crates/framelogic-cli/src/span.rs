//! Source positions for diagnostics.

use std::fmt;

/// A source span: 1-based line and column, plus a length in characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: u32,
    pub col: u32,
    pub len: u32,
}

impl SourceSpan {
    pub fn new(line: u32, col: u32, len: u32) -> SourceSpan {
        SourceSpan { line, col, len }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// A parse error with its position and the tokens that would have been
/// accepted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    pub expected: Vec<String>,
}

impl ParseError {
    pub fn new(span: SourceSpan, message: impl Into<String>) -> ParseError {
        ParseError { span, message: message.into(), expected: Vec::new() }
    }

    pub fn expecting(span: SourceSpan, expected: &[&str], found: impl Into<String>) -> ParseError {
        ParseError {
            span,
            message: format!("unexpected {}", found.into()),
            expected: expected.iter().map(|s| (*s).to_string()).collect(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}
