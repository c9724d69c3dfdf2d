//! Shared lexer for the text formats. ASCII keywords, `//` line comments.

use crate::span::{ParseError, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    // Punctuation and operators.
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Dot,
    Assign,    // :=
    Define,    // := reused; kept distinct name for read clarity
    Eq,        // =
    Ne,        // !=
    Le,
    Lt,
    Ge,
    Gt,
    AndAnd,
    OrOr,
    Implies, // =>
    Bang,
    Tilde,
    Plus,
    Minus,
    Star,    // *
    Arrow,   // ->
    PtLeft,  // |-
    DotDot,  // ..
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(i) => format!("integer {i}"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Assign | Tok::Define => "`:=`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Ne => "`!=`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::AndAnd => "`&&`".into(),
            Tok::OrOr => "`||`".into(),
            Tok::Implies => "`=>`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::PtLeft => "`|-`".into(),
            Tok::DotDot => "`..`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Spanned {
    pub tok: Tok,
    pub span: SourceSpan,
}

pub fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0usize;
    macro_rules! push {
        ($tok:expr, $len:expr) => {{
            out.push(Spanned { tok: $tok, span: SourceSpan::new(line, col, $len) });
            col += $len;
            i += $len as usize;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
            }
            ' ' | '\t' | '\r' => {
                col += 1;
                i += 1;
            }
            '/' if next == Some('/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                    col += 1;
                }
            }
            '(' => push!(Tok::LParen, 1),
            ')' => push!(Tok::RParen, 1),
            '{' => push!(Tok::LBrace, 1),
            '}' => push!(Tok::RBrace, 1),
            '[' => push!(Tok::LBracket, 1),
            ']' => push!(Tok::RBracket, 1),
            ',' => push!(Tok::Comma, 1),
            ';' => push!(Tok::Semi, 1),
            '.' if next == Some('.') => push!(Tok::DotDot, 2),
            '.' => push!(Tok::Dot, 1),
            ':' if next == Some('=') => push!(Tok::Assign, 2),
            ':' => push!(Tok::Colon, 1),
            '=' if next == Some('>') => push!(Tok::Implies, 2),
            '=' => push!(Tok::Eq, 1),
            '!' if next == Some('=') => push!(Tok::Ne, 2),
            '!' => push!(Tok::Bang, 1),
            '<' if next == Some('=') => push!(Tok::Le, 2),
            '<' => push!(Tok::Lt, 1),
            '>' if next == Some('=') => push!(Tok::Ge, 2),
            '>' => push!(Tok::Gt, 1),
            '&' if next == Some('&') => push!(Tok::AndAnd, 2),
            '|' if next == Some('|') => push!(Tok::OrOr, 2),
            '|' if next == Some('-') => push!(Tok::PtLeft, 2),
            '~' => push!(Tok::Tilde, 1),
            '+' => push!(Tok::Plus, 1),
            '-' if next == Some('>') => push!(Tok::Arrow, 2),
            '-' => push!(Tok::Minus, 1),
            '*' => push!(Tok::Star, 1),
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let len = (i - start) as u32;
                let value: i64 = text.parse().map_err(|_| {
                    ParseError::new(SourceSpan::new(line, col, len), "integer out of range")
                })?;
                out.push(Spanned { tok: Tok::Int(value), span: SourceSpan::new(line, col, len) });
                col += len;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '#')
                {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let len = (i - start) as u32;
                out.push(Spanned {
                    tok: Tok::Ident(text),
                    span: SourceSpan::new(line, col, len),
                });
                col += len;
            }
            other => {
                return Err(ParseError::new(
                    SourceSpan::new(line, col, 1),
                    format!("unexpected character `{other}`"),
                ))
            }
        }
    }
    out.push(Spanned { tok: Tok::Eof, span: SourceSpan::new(line, col, 0) });
    Ok(out)
}
