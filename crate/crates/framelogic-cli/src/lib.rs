//! Concrete syntax, file formats, and the command-line front end for the
//! frame-logic engine. The formats are documented in `docs/formats.md` at
//! the repository root.

pub mod cli;
pub mod jsonl;
pub mod lex;
pub mod model_text;
pub mod parse;
pub mod print;
pub mod rng;
pub mod span;

pub use parse::{parse_fl, parse_formula_in, parse_program, parse_sl, parse_triple};
pub use print::{fl_file_to_string, formula_to_string, sl_to_string, stmt_to_string};
pub use span::{ParseError, SourceSpan};
