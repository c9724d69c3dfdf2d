//! The model text format: one line per interpretation entry.
//!
//! ```text
//! fg: 3
//! int: -16..16
//! nil = u0
//! next(u0) = u0
//! next(u1) = u2
//! R(u1, u2)
//! ```
//!
//! Printing is canonical (sorted constants, functions entry by entry in
//! packed order, then relation tuples) and round-trips bit-exactly.

use std::fmt::Write as _;
use std::sync::Arc;

use framelogic::ast::Signature;
use framelogic::model::{ElemSet, PreModel, Value, DEFAULT_INT_RANGE};

use crate::lex::{lex, Spanned, Tok};
use crate::span::ParseError;

fn value_to_string(v: &Value) -> String {
    match v {
        Value::Elem(e) => format!("u{e}"),
        Value::Int(i) => format!("{i}"),
        Value::Bool(b) => format!("{b}"),
        Value::Set(s) => {
            let items: Vec<String> = s.iter().map(|e| format!("u{e}")).collect();
            format!("{{{}}}", items.join(", "))
        }
    }
}

/// Canonical text of a pre-model.
pub fn model_to_string(m: &PreModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "fg: {}", m.fg_size);
    let _ = writeln!(out, "int: {}..{}", m.int_range.0, m.int_range.1);
    for (name, v) in &m.consts {
        let _ = writeln!(out, "{name} = {}", value_to_string(v));
    }
    for (name, table) in &m.funcs {
        let fsig = &m.sig.funcs[name];
        for idx in 0..table.table.len() {
            let args = m.unpack_args(&fsig.args, idx);
            let args_s: Vec<String> = args.iter().map(value_to_string).collect();
            let _ = writeln!(
                out,
                "{name}({}) = {}",
                args_s.join(", "),
                value_to_string(&table.table[idx])
            );
        }
    }
    for (name, rows) in &m.rels {
        for row in rows {
            let args_s: Vec<String> = row.iter().map(value_to_string).collect();
            let _ = writeln!(out, "{name}({})", args_s.join(", "));
        }
    }
    out
}

struct P {
    toks: Vec<Spanned>,
    pos: usize,
}

impl P {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }
    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }
    fn err(&self, msg: &str) -> ParseError {
        ParseError::new(self.toks[self.pos].span, msg.to_string())
    }
    fn eat(&mut self, t: &Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.err(&format!("expected {what}")))
        }
    }
    fn int(&mut self) -> Result<i64, ParseError> {
        let neg = if self.peek() == &Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        match self.bump() {
            Tok::Int(i) => Ok(if neg { -i } else { i }),
            _ => Err(self.err("expected an integer")),
        }
    }

    fn value(&mut self) -> Result<Value, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if s.starts_with('u') && s[1..].parse::<u8>().is_ok() => {
                self.bump();
                Ok(Value::Elem(s[1..].parse().unwrap()))
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(Value::Bool(s == "true"))
            }
            Tok::LBrace => {
                self.bump();
                let mut set = ElemSet::EMPTY;
                while self.peek() != &Tok::RBrace {
                    match self.bump() {
                        Tok::Ident(s) if s.starts_with('u') => {
                            let e: u8 = s[1..]
                                .parse()
                                .map_err(|_| self.err("bad element"))?;
                            set.insert(e);
                        }
                        _ => return Err(self.err("expected an element")),
                    }
                    if self.peek() == &Tok::Comma {
                        self.bump();
                    }
                }
                self.bump();
                Ok(Value::Set(set))
            }
            Tok::Int(_) | Tok::Minus => Ok(Value::Int(self.int()?)),
            _ => Err(self.err("expected a value")),
        }
    }
}

/// Parses a model against a signature. Unmentioned entries keep their
/// defaults.
pub fn parse_model(src: &str, sig: Arc<Signature>) -> Result<PreModel, ParseError> {
    let mut p = P { toks: lex(src)?, pos: 0 };
    // Header: fg: n, then optional int: lo..hi.
    match p.bump() {
        Tok::Ident(s) if s == "fg" => {}
        _ => return Err(p.err("model files start with `fg: n`")),
    }
    p.eat(&Tok::Colon, ":")?;
    let fg = p.int()? as u8;
    let mut int_range = DEFAULT_INT_RANGE;
    if matches!(p.peek(), Tok::Ident(s) if s == "int") {
        p.bump();
        p.eat(&Tok::Colon, ":")?;
        let lo = p.int()?;
        p.eat(&Tok::DotDot, "..")?;
        let hi = p.int()?;
        int_range = (lo, hi);
    }
    let mut m = PreModel::new(sig.clone(), fg, int_range)
        .map_err(|e| p.err(&e.to_string()))?;
    loop {
        match p.peek().clone() {
            Tok::Eof => break,
            Tok::Ident(name) => {
                p.bump();
                if p.peek() == &Tok::LParen {
                    p.bump();
                    let mut args = Vec::new();
                    while p.peek() != &Tok::RParen {
                        args.push(p.value()?);
                        if p.peek() == &Tok::Comma {
                            p.bump();
                        }
                    }
                    p.bump();
                    if p.peek() == &Tok::Eq {
                        p.bump();
                        let v = p.value()?;
                        m.set_fn(&name, &args, v).map_err(|e| p.err(&e.to_string()))?;
                    } else {
                        // Relation tuple.
                        m.rels
                            .get_mut(&name)
                            .ok_or_else(|| p.err(&format!("unknown relation `{name}`")))?
                            .insert(args);
                    }
                } else {
                    p.eat(&Tok::Eq, "=")?;
                    let v = p.value()?;
                    if !m.consts.contains_key(&name) {
                        return Err(p.err(&format!("unknown constant `{name}`")));
                    }
                    m.consts.insert(name, v);
                }
            }
            _ => return Err(p.err("expected an interpretation entry")),
        }
    }
    Ok(m)
}
