//! Canonical printers. Layout is deterministic and `parse(print(x))`
//! reproduces `x` structurally; sugar is printed back as core forms except
//! for `!=`, which abbreviates a negated equality.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use framelogic::ast::{Definition, DefinitionSet, Formula, Signature, Sort, Term, AVAIL_SET, NIL};
use framelogic::psl::{SlFormula, StackFormula};
use framelogic::whilelang::Stmt;

// Formula precedence levels, mirroring the parser:
// exists 10 < and 20 < comparisons 30 < not 40 < atoms 50.
fn fprec(f: &Formula) -> u8 {
    match f {
        Formula::Exists { .. } => 10,
        Formula::And(..) => 20,
        Formula::Eq(..) | Formula::Rel(..) => 30,
        Formula::Not(inner) => {
            if matches!(**inner, Formula::Eq(..)) {
                30 // printed as `!=`
            } else {
                40
            }
        }
        _ => 50,
    }
}

// Term precedence: cup 3 < cap 4 < additive 5 < unary 6 < atoms 7.
fn tprec(t: &Term) -> u8 {
    match t {
        Term::Union(..) => 3,
        Term::Inter(..) => 4,
        Term::Add(..) | Term::Sub(..) => 5,
        Term::Compl(..) => 6,
        Term::Int(i) if *i < 0 => 6,
        _ => 7,
    }
}

fn fmt_formula(f: &Formula, req: u8, out: &mut String) {
    let prec = fprec(f);
    let parens = prec < req;
    if parens {
        out.push('(');
    }
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Eq(a, b) => {
            fmt_term(a, 3, out);
            out.push_str(" = ");
            fmt_term(b, 3, out);
        }
        Formula::Rel(name, args) => match name.as_str() {
            "in" | "subseteq" | "<=" | "<" | ">=" | ">" if args.len() == 2 => {
                fmt_term(&args[0], 3, out);
                let _ = write!(out, " {name} ");
                fmt_term(&args[1], 3, out);
            }
            _ => fmt_app(name, args, out),
        },
        Formula::Ind(name, args) => fmt_app(name, args, out),
        Formula::Not(inner) => {
            if let Formula::Eq(a, b) = &**inner {
                fmt_term(a, 3, out);
                out.push_str(" != ");
                fmt_term(b, 3, out);
            } else {
                out.push('!');
                fmt_formula(inner, 40, out);
            }
        }
        Formula::And(a, b) => {
            fmt_formula(a, 20, out);
            out.push_str(" && ");
            fmt_formula(b, 30, out);
        }
        Formula::Ite(g, a, b) => {
            out.push_str("ite(");
            fmt_formula(g, 0, out);
            out.push_str(" : ");
            fmt_formula(a, 0, out);
            out.push_str(", ");
            fmt_formula(b, 0, out);
            out.push(')');
        }
        Formula::Exists { var, sort, guard, body } => {
            out.push_str("exists ");
            out.push_str(var);
            if *sort != Sort::Fg {
                let _ = write!(out, "[{sort}]");
            }
            out.push_str(" : ");
            fmt_formula(guard, 0, out);
            out.push_str(". ");
            fmt_formula(body, 0, out);
        }
    }
    if parens {
        out.push(')');
    }
}

fn fmt_app(name: &str, args: &[Term], out: &mut String) {
    out.push_str(name);
    out.push('(');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        fmt_term(a, 0, out);
    }
    out.push(')');
}

fn fmt_term(t: &Term, req: u8, out: &mut String) {
    let prec = tprec(t);
    let parens = prec < req;
    if parens {
        out.push('(');
    }
    match t {
        Term::Const(c) => out.push_str(c),
        Term::Var(v, _) => out.push_str(v),
        Term::Int(i) => {
            let _ = write!(out, "{i}");
        }
        Term::App(f, args) => fmt_app(f, args, out),
        Term::Add(a, b) => {
            fmt_term(a, 5, out);
            out.push_str(" + ");
            fmt_term(b, 6, out);
        }
        Term::Sub(a, b) => {
            fmt_term(a, 5, out);
            out.push_str(" - ");
            fmt_term(b, 6, out);
        }
        Term::Union(a, b) => {
            fmt_term(a, 3, out);
            out.push_str(" cup ");
            fmt_term(b, 4, out);
        }
        Term::Inter(a, b) => {
            fmt_term(a, 4, out);
            out.push_str(" cap ");
            fmt_term(b, 5, out);
        }
        Term::Compl(a) => {
            out.push('~');
            fmt_term(a, 7, out);
        }
        Term::Empty => out.push_str("emptyset"),
        Term::Ite(g, a, b) => {
            out.push_str("ite(");
            fmt_formula(g, 0, out);
            out.push_str(" : ");
            fmt_term(a, 0, out);
            out.push_str(", ");
            fmt_term(b, 0, out);
            out.push(')');
        }
        Term::SpF(f) => {
            out.push_str("Sp(");
            fmt_formula(f, 0, out);
            out.push(')');
        }
        Term::SpT(inner) => {
            out.push_str("Sp(");
            fmt_term(inner, 0, out);
            out.push(')');
        }
    }
    if parens {
        out.push(')');
    }
}

pub fn formula_to_string(f: &Formula) -> String {
    let mut out = String::new();
    fmt_formula(f, 0, &mut out);
    out
}

pub fn term_to_string(t: &Term) -> String {
    let mut out = String::new();
    fmt_term(t, 0, &mut out);
    out
}

pub fn def_to_string(d: &Definition) -> String {
    let mut out = String::from("def ");
    out.push_str(&d.name);
    out.push('(');
    for (i, (p, s)) in d.params.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(p);
        let _ = write!(out, " : {s}");
    }
    out.push_str(") := ");
    fmt_formula(&d.body, 0, &mut out);
    out.push(';');
    out
}

/// Declarations of a signature, skipping the built-in constants.
pub fn signature_to_string(sig: &Signature) -> String {
    let mut out = String::new();
    for (name, fsig) in &sig.funcs {
        let kw = if fsig.mutable { "mutable" } else { "fn" };
        let args: Vec<String> = fsig.args.iter().map(|s| s.to_string()).collect();
        let _ = writeln!(out, "{kw} {name} : {} -> {};", args.join(", "), fsig.ret);
    }
    for (name, sort) in &sig.consts {
        if name == NIL || name == AVAIL_SET {
            continue;
        }
        let _ = writeln!(out, "const {name} : {sort};");
    }
    for (name, args) in &sig.rels {
        let args: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        let _ = writeln!(out, "rel {name} : {};", args.join(", "));
    }
    out
}

/// A whole formula file: declarations, variable declarations for the non-
/// foreground free variables, definitions, and the query formulas. The
/// result parses back to the same context and formulas.
pub fn fl_file_to_string(sig: &Signature, defs: &DefinitionSet, formulas: &[Formula]) -> String {
    let mut out = signature_to_string(sig);
    let mut vars: BTreeSet<(String, Sort)> = BTreeSet::new();
    for f in formulas {
        vars.extend(framelogic::ast::free_vars(f));
    }
    for (name, sort) in vars {
        if sort != Sort::Fg && sig.consts.get(&name).is_none() {
            let _ = writeln!(out, "var {name} : {sort};");
        }
    }
    for d in defs.iter() {
        let _ = writeln!(out, "{}", def_to_string(d));
    }
    for f in formulas {
        let _ = writeln!(out, "formula {};", formula_to_string(f));
    }
    out
}

fn fmt_stmt(s: &Stmt, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match s {
        Stmt::Seq(stmts) => {
            for (i, st) in stmts.iter().enumerate() {
                fmt_stmt(st, indent, out);
                if i + 1 < stmts.len() {
                    out.push(';');
                }
                out.push('\n');
            }
        }
        Stmt::Skip => {
            let _ = write!(out, "{pad}skip");
        }
        Stmt::AssignConst { x, c } => {
            let _ = write!(out, "{pad}{x} := {}", term_to_string(c));
        }
        Stmt::AssignVar { x, y } => {
            let _ = write!(out, "{pad}{x} := {y}");
        }
        Stmt::Lookup { x, y, field } => {
            let _ = write!(out, "{pad}{x} := {y}.{field}");
        }
        Stmt::AssignBg { v, expr } => {
            let _ = write!(out, "{pad}{v} := {}", term_to_string(expr));
        }
        Stmt::Mutate { x, field, y } => {
            let _ = write!(out, "{pad}{x}.{field} := {y}");
        }
        Stmt::Alloc { x } => {
            let _ = write!(out, "{pad}alloc({x})");
        }
        Stmt::Free { x } => {
            let _ = write!(out, "{pad}free({x})");
        }
        Stmt::If { cond, then_branch, else_branch } => {
            let _ = write!(out, "{pad}if ({}) then {{\n", formula_to_string(cond));
            fmt_stmt(then_branch, indent + 1, out);
            let _ = write!(out, "\n{pad}}} else {{\n");
            fmt_stmt(else_branch, indent + 1, out);
            let _ = write!(out, "\n{pad}}}");
        }
        Stmt::While { cond, invariant, body } => {
            let _ = write!(out, "{pad}while ({})", formula_to_string(cond));
            if let Some(inv) = invariant {
                let _ = write!(out, " invariant : ({})", formula_to_string(inv));
            }
            out.push_str(" do {\n");
            fmt_stmt(body, indent + 1, out);
            let _ = write!(out, "\n{pad}}}");
        }
    }
}

pub fn stmt_to_string(s: &Stmt) -> String {
    let mut out = String::new();
    fmt_stmt(s, 0, &mut out);
    out
}

/// One-line statement rendering for traces.
pub fn stmt_to_line(s: &Stmt) -> String {
    stmt_to_string(s).replace('\n', " ")
}

/// A whole triple file: declarations, variables, definitions, and the
/// bracketed triple. Parses back to the same triple.
pub fn triple_file_to_string(t: &framelogic::hoare::Triple) -> String {
    let mut out = signature_to_string(&t.sig);
    for (name, sort) in &t.vars {
        let _ = writeln!(out, "var {name} : {sort};");
    }
    for d in t.defs.iter() {
        let _ = writeln!(out, "{}", def_to_string(d));
    }
    let _ = writeln!(out, "{{ {} }}", formula_to_string(&t.pre));
    let _ = writeln!(out, "{}", stmt_to_string(&t.program));
    let _ = writeln!(out, "{{ {} }}", formula_to_string(&t.post));
    out
}

fn fmt_stack(sf: &StackFormula, req: u8, out: &mut String) {
    // or 1 < and 2 < not 3 < atoms 4
    let prec = match sf {
        StackFormula::Or(..) => 1,
        StackFormula::And(..) => 2,
        StackFormula::Not(inner) if !matches!(**inner, StackFormula::Eq(..)) => 3,
        _ => 4,
    };
    let parens = prec < req;
    if parens {
        out.push('(');
    }
    match sf {
        StackFormula::True => out.push_str("true"),
        StackFormula::False => out.push_str("false"),
        StackFormula::Eq(a, b) => {
            let _ = write!(out, "{a} = {b}");
        }
        StackFormula::And(a, b) => {
            fmt_stack(a, 2, out);
            out.push_str(" && ");
            fmt_stack(b, 3, out);
        }
        StackFormula::Or(a, b) => {
            fmt_stack(a, 1, out);
            out.push_str(" || ");
            fmt_stack(b, 2, out);
        }
        StackFormula::Not(inner) => {
            if let StackFormula::Eq(a, b) = &**inner {
                let _ = write!(out, "{a} != {b}");
            } else {
                out.push('!');
                fmt_stack(inner, 3, out);
            }
        }
    }
    if parens {
        out.push(')');
    }
}

pub fn stack_to_string(sf: &StackFormula) -> String {
    let mut out = String::new();
    fmt_stack(sf, 0, &mut out);
    out
}

fn fmt_sl(f: &SlFormula, req: u8, out: &mut String) {
    // star 1 < and 2 < atoms 3; the guarded existential extends right.
    let prec = match f {
        SlFormula::ExistsPointsTo { .. } => 1,
        SlFormula::Star(..) => 1,
        SlFormula::And(..) => 2,
        _ => 3,
    };
    let parens = prec < req;
    if parens {
        out.push('(');
    }
    match f {
        SlFormula::Stack(sf) => fmt_stack(sf, 4, out),
        SlFormula::Emp => out.push_str("emp"),
        SlFormula::PointsTo { x, field, y } => {
            let _ = write!(out, "{x} |- {field} -> {y}");
        }
        SlFormula::Ite(sf, a, b) => {
            out.push_str("ite(");
            fmt_stack(sf, 0, out);
            out.push_str(", ");
            fmt_sl(a, 0, out);
            out.push_str(", ");
            fmt_sl(b, 0, out);
            out.push(')');
        }
        SlFormula::And(a, b) => {
            fmt_sl(a, 2, out);
            out.push_str(" && ");
            fmt_sl(b, 3, out);
        }
        SlFormula::Star(a, b) => {
            fmt_sl(a, 2, out);
            out.push_str(" * ");
            fmt_sl(b, 2, out);
        }
        SlFormula::Pred { name, arg } => {
            let _ = write!(out, "{name}({arg})");
        }
        SlFormula::ExistsPointsTo { y, x, field, body } => {
            let _ = write!(out, "exists {y}. ({x} |- {field} -> {y}) * ");
            fmt_sl(body, 2, out);
        }
    }
    if parens {
        out.push(')');
    }
}

pub fn sl_to_string(f: &SlFormula) -> String {
    let mut out = String::new();
    fmt_sl(f, 0, &mut out);
    out
}
