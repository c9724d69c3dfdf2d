//! Sorted signatures and abstract syntax for formulas, terms, and recursive
//! definitions, together with well-formedness validation.
//!
//! The logic is multi-sorted: a foreground sort of locations, a sort of sets
//! of locations, and two background sorts (bounded integers and booleans).
//! Terms of the set sort arise from the built-in set operations and from
//! support expressions `Sp(..)`; guards of `ite` and guarded existentials are
//! restricted so that support fixpoints stay well-defined.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Sorts of the logic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    /// Uninterpreted locations (the only sort programs mutate over).
    Fg,
    /// Sets of foreground elements; the sort of support expressions.
    FgSet,
    /// Bounded integers.
    Int,
    /// Booleans.
    Bool,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Fg => write!(f, "fg"),
            Sort::FgSet => write!(f, "set"),
            Sort::Int => write!(f, "int"),
            Sort::Bool => write!(f, "bool"),
        }
    }
}

/// Name of the distinguished nil constant.
pub const NIL: &str = "nil";
/// Name of the allocatable-set constant used by program-logic formulas.
pub const AVAIL_SET: &str = "U";

/// Declared function symbol.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct FnSig {
    pub args: Vec<Sort>,
    pub ret: Sort,
    pub mutable: bool,
}

/// A signature: constants, functions, base relations, and the names and
/// parameter sorts of inductively defined relations.
///
/// Set operations (`cup`, `cap`, `~`, `emptyset`, `in`, `subseteq`), integer
/// arithmetic (`+`, `-`) and integer comparisons are built in and never
/// declared. A `nil` constant of foreground sort is always present, as is the
/// set constant `U` naming the allocatable set in program-logic contexts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Signature {
    pub consts: BTreeMap<String, Sort>,
    pub funcs: BTreeMap<String, FnSig>,
    pub rels: BTreeMap<String, Vec<Sort>>,
    pub inductives: BTreeMap<String, Vec<Sort>>,
}

/// Built-in integer comparison relations.
pub const INT_CMPS: [&str; 4] = ["<=", "<", ">=", ">"];

impl Signature {
    pub fn new() -> Self {
        let mut consts = BTreeMap::new();
        consts.insert(NIL.to_owned(), Sort::Fg);
        consts.insert(AVAIL_SET.to_owned(), Sort::FgSet);
        Signature {
            consts,
            funcs: BTreeMap::new(),
            rels: BTreeMap::new(),
            inductives: BTreeMap::new(),
        }
    }

    pub fn with_const(mut self, name: &str, sort: Sort) -> Self {
        self.consts.insert(name.to_owned(), sort);
        self
    }

    pub fn with_fn(mut self, name: &str, args: &[Sort], ret: Sort, mutable: bool) -> Self {
        self.funcs.insert(
            name.to_owned(),
            FnSig { args: args.to_vec(), ret, mutable },
        );
        self
    }

    /// Unary mutable foreground function, the common shape for pointer fields.
    pub fn with_field(self, name: &str) -> Self {
        self.with_fn(name, &[Sort::Fg], Sort::Fg, true)
    }

    /// Unary mutable data field of integer sort.
    pub fn with_data_field(self, name: &str) -> Self {
        self.with_fn(name, &[Sort::Fg], Sort::Int, true)
    }

    pub fn with_rel(mut self, name: &str, args: &[Sort]) -> Self {
        self.rels.insert(name.to_owned(), args.to_vec());
        self
    }

    pub fn with_inductive(mut self, name: &str, args: &[Sort]) -> Self {
        self.inductives.insert(name.to_owned(), args.to_vec());
        self
    }

    pub fn is_mutable(&self, name: &str) -> bool {
        self.funcs.get(name).map(|f| f.mutable).unwrap_or(false)
    }

    /// Mutable function names in lexicographic order.
    pub fn mutable_fns(&self) -> impl Iterator<Item = &str> {
        self.funcs
            .iter()
            .filter(|(_, s)| s.mutable)
            .map(|(n, _)| n.as_str())
    }

    /// Checks well-formedness of the signature itself: every mutable function
    /// takes at least one foreground argument, and only the built-in set
    /// machinery involves the set sort.
    pub fn check(&self) -> Result<(), AstError> {
        for (name, sig) in &self.funcs {
            if sig.mutable && !sig.args.contains(&Sort::Fg) {
                return Err(AstError::BadSignature(format!(
                    "mutable function {name} has no foreground argument"
                )));
            }
            if sig.args.contains(&Sort::FgSet) || sig.ret == Sort::FgSet {
                return Err(AstError::BadSignature(format!(
                    "function {name} involves the set sort"
                )));
            }
        }
        for (name, args) in self.rels.iter().chain(self.inductives.iter()) {
            if args.contains(&Sort::FgSet) {
                return Err(AstError::BadSignature(format!(
                    "relation {name} involves the set sort"
                )));
            }
        }
        if self.consts.get(NIL) != Some(&Sort::Fg) {
            return Err(AstError::BadSignature("missing nil constant".to_owned()));
        }
        Ok(())
    }
}

impl Default for Signature {
    fn default() -> Self {
        Signature::new()
    }
}

/// Terms, annotated with enough sort information to be checked locally.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(String),
    Var(String, Sort),
    Int(i64),
    App(String, Vec<Term>),
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    /// Guarded conditional term.
    Ite(Box<Formula>, Box<Term>, Box<Term>),
    /// Support of a formula; has set sort.
    SpF(Box<Formula>),
    /// Support of a term; has set sort.
    SpT(Box<Term>),
    Union(Box<Term>, Box<Term>),
    Inter(Box<Term>, Box<Term>),
    Compl(Box<Term>),
    Empty,
}

/// Formulas in core form. `Or`, `Implies` and the like are surface sugar and
/// are expanded by the builders below, so the support semantics needs only
/// these cases.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Eq(Term, Term),
    /// Base relation application, including the built-ins `in`, `subseteq`
    /// and the integer comparisons.
    Rel(String, Vec<Term>),
    /// Inductive relation application.
    Ind(String, Vec<Term>),
    And(Box<Formula>, Box<Formula>),
    Not(Box<Formula>),
    /// `ite(guard : then, else)`.
    Ite(Box<Formula>, Box<Formula>, Box<Formula>),
    /// Guarded existential; the binder scopes over guard and body.
    Exists {
        var: String,
        sort: Sort,
        guard: Box<Formula>,
        body: Box<Formula>,
    },
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_owned(), Sort::Fg)
    }
    pub fn ivar(name: &str) -> Term {
        Term::Var(name.to_owned(), Sort::Int)
    }
    pub fn cst(name: &str) -> Term {
        Term::Const(name.to_owned())
    }
    pub fn nil() -> Term {
        Term::Const(NIL.to_owned())
    }
    pub fn app(f: &str, args: Vec<Term>) -> Term {
        Term::App(f.to_owned(), args)
    }
    pub fn app1(f: &str, arg: Term) -> Term {
        Term::App(f.to_owned(), vec![arg])
    }
    pub fn sp(f: Formula) -> Term {
        Term::SpF(Box::new(f))
    }
    pub fn sp_term(t: Term) -> Term {
        Term::SpT(Box::new(t))
    }
    pub fn union(a: Term, b: Term) -> Term {
        Term::Union(Box::new(a), Box::new(b))
    }
    pub fn inter(a: Term, b: Term) -> Term {
        Term::Inter(Box::new(a), Box::new(b))
    }
    pub fn compl(a: Term) -> Term {
        Term::Compl(Box::new(a))
    }
    pub fn ite(g: Formula, t: Term, e: Term) -> Term {
        Term::Ite(Box::new(g), Box::new(t), Box::new(e))
    }
    pub fn add(a: Term, b: Term) -> Term {
        Term::Add(Box::new(a), Box::new(b))
    }
    pub fn sub(a: Term, b: Term) -> Term {
        Term::Sub(Box::new(a), Box::new(b))
    }
}

impl Formula {
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }
    pub fn not(a: Formula) -> Formula {
        Formula::Not(Box::new(a))
    }
    /// `a || b`, expanded to `!(!a && !b)`.
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::and(Formula::not(a), Formula::not(b)))
    }
    /// `a => b`, expanded to `!(a && !b)`.
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::and(a, Formula::not(b)))
    }
    /// `a <=> b` as a conjunction of two implications.
    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(
            Formula::implies(a.clone(), b.clone()),
            Formula::implies(b, a),
        )
    }
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }
    pub fn ne(a: Term, b: Term) -> Formula {
        Formula::not(Formula::Eq(a, b))
    }
    pub fn rel(name: &str, args: Vec<Term>) -> Formula {
        Formula::Rel(name.to_owned(), args)
    }
    pub fn ind(name: &str, args: Vec<Term>) -> Formula {
        Formula::Ind(name.to_owned(), args)
    }
    pub fn ite(g: Formula, t: Formula, e: Formula) -> Formula {
        Formula::Ite(Box::new(g), Box::new(t), Box::new(e))
    }
    pub fn exists(var: &str, sort: Sort, guard: Formula, body: Formula) -> Formula {
        Formula::Exists {
            var: var.to_owned(),
            sort,
            guard: Box::new(guard),
            body: Box::new(body),
        }
    }
    /// `forall var : guard. body`, expanded to `!(exists var : guard. !body)`.
    pub fn forall(var: &str, sort: Sort, guard: Formula, body: Formula) -> Formula {
        Formula::not(Formula::exists(var, sort, guard, Formula::not(body)))
    }
    /// Membership atom `t in s`.
    pub fn member(t: Term, s: Term) -> Formula {
        Formula::Rel("in".to_owned(), vec![t, s])
    }
    pub fn subset(a: Term, b: Term) -> Formula {
        Formula::Rel("subseteq".to_owned(), vec![a, b])
    }
    /// Disjoint-support conjunction: `a && b && Sp(a) cap Sp(b) = emptyset`.
    pub fn star(a: Formula, b: Formula) -> Formula {
        let disjoint = Formula::Eq(
            Term::inter(Term::sp(a.clone()), Term::sp(b.clone())),
            Term::Empty,
        );
        Formula::and(Formula::and(a, b), disjoint)
    }
}

/// A named recursive definition `name(params) := body`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Definition {
    pub name: String,
    pub params: Vec<(String, Sort)>,
    pub body: Formula,
}

/// A set of recursive definitions, at most one per name.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DefinitionSet {
    pub defs: BTreeMap<String, Definition>,
}

impl DefinitionSet {
    pub fn new() -> Self {
        DefinitionSet { defs: BTreeMap::new() }
    }

    pub fn insert(&mut self, def: Definition) -> Result<(), AstError> {
        if self.defs.contains_key(&def.name) {
            return Err(AstError::DuplicateDefinition(def.name));
        }
        self.defs.insert(def.name.clone(), def);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Definition> {
        self.defs.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Definition> {
        self.defs.values()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    /// Declares every definition in `sig` as an inductive relation.
    pub fn declare_in(&self, sig: &mut Signature) {
        for d in self.defs.values() {
            sig.inductives.insert(
                d.name.clone(),
                d.params.iter().map(|(_, s)| *s).collect(),
            );
        }
    }
}

/// Errors from AST-level operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AstError {
    UnknownSymbol(String),
    SortMismatch { expected: Sort, found: Sort, at: String },
    DuplicateDefinition(String),
    BadSignature(String),
}

impl fmt::Display for AstError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AstError::UnknownSymbol(n) => write!(f, "unknown symbol: {n}"),
            AstError::SortMismatch { expected, found, at } => {
                write!(f, "sort mismatch at {at}: expected {expected}, found {found}")
            }
            AstError::DuplicateDefinition(n) => write!(f, "duplicate definition: {n}"),
            AstError::BadSignature(m) => write!(f, "bad signature: {m}"),
        }
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// Named well-formedness rules a validation violation can cite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleName {
    GuardUsesInductive,
    GuardUsesSetSort,
    NegativeInductiveOccurrence,
    SortMismatch,
    SetSortInductiveParam,
}

impl fmt::Display for RuleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RuleName::GuardUsesInductive => "GuardUsesInductive",
            RuleName::GuardUsesSetSort => "GuardUsesSetSort",
            RuleName::NegativeInductiveOccurrence => "NegativeInductiveOccurrence",
            RuleName::SortMismatch => "SortMismatch",
            RuleName::SetSortInductiveParam => "SetSortInductiveParam",
        };
        write!(f, "{s}")
    }
}

/// A single well-formedness violation: which rule, where (child-index path
/// from the root of the offending formula), and a human-readable detail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: RuleName,
    pub path: Vec<u32>,
    pub in_definition: Option<String>,
    pub detail: String,
}

/// Result of validating a formula against a signature and definition set.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Validation options. Program-logic formulas quantify with `z in U` guards,
/// which mention a set-sorted constant; the strict rule forbids any set-sorted
/// term in guards.
#[derive(Debug, Clone, Copy, Default)]
pub struct ValidateOpts {
    /// Permit support-free set terms (such as the constant `U`) inside guards.
    pub allow_set_consts_in_guards: bool,
}

struct Validator<'a> {
    sig: &'a Signature,
    opts: ValidateOpts,
    report: ValidationReport,
    current_def: Option<String>,
}

impl<'a> Validator<'a> {
    fn violate(&mut self, rule: RuleName, path: &[u32], detail: String) {
        self.report.violations.push(Violation {
            rule,
            path: path.to_vec(),
            in_definition: self.current_def.clone(),
            detail,
        });
    }

    fn expect_sort(&mut self, want: Sort, got: Option<Sort>, path: &[u32], what: &str) {
        if let Some(got) = got {
            if got != want {
                self.violate(
                    RuleName::SortMismatch,
                    path,
                    format!("{what}: expected {want}, found {got}"),
                );
            }
        }
    }

    /// Sort of a term, pushing violations as it goes. `env` maps variables in
    /// scope to their sorts. Returns `None` when the sort cannot be computed.
    fn term_sort(
        &mut self,
        t: &Term,
        env: &mut BTreeMap<String, Sort>,
        path: &mut Vec<u32>,
    ) -> Result<Option<Sort>, AstError> {
        match t {
            Term::Const(c) => match self.sig.consts.get(c) {
                Some(s) => Ok(Some(*s)),
                None => Err(AstError::UnknownSymbol(c.clone())),
            },
            Term::Var(v, s) => {
                match env.get(v) {
                    Some(have) if have != s => {
                        self.violate(
                            RuleName::SortMismatch,
                            path,
                            format!("variable {v} used at {s} but bound at {have}"),
                        );
                    }
                    None => {
                        env.insert(v.clone(), *s);
                    }
                    _ => {}
                }
                Ok(Some(*s))
            }
            Term::Int(_) => Ok(Some(Sort::Int)),
            Term::App(f, args) => {
                let fsig = self
                    .sig
                    .funcs
                    .get(f)
                    .cloned()
                    .ok_or_else(|| AstError::UnknownSymbol(f.clone()))?;
                if fsig.args.len() != args.len() {
                    self.violate(
                        RuleName::SortMismatch,
                        path,
                        format!("{f} applied to {} arguments, expects {}", args.len(), fsig.args.len()),
                    );
                }
                for (i, (a, want)) in args.iter().zip(fsig.args.iter()).enumerate() {
                    path.push(i as u32);
                    let got = self.term_sort(a, env, path)?;
                    self.expect_sort(*want, got, path, &format!("argument {i} of {f}"));
                    path.pop();
                }
                Ok(Some(fsig.ret))
            }
            Term::Add(a, b) | Term::Sub(a, b) => {
                for (i, x) in [a, b].iter().enumerate() {
                    path.push(i as u32);
                    let got = self.term_sort(x, env, path)?;
                    self.expect_sort(Sort::Int, got, path, "arithmetic operand");
                    path.pop();
                }
                Ok(Some(Sort::Int))
            }
            Term::Ite(g, a, b) => {
                path.push(0);
                self.guard(g, env, path)?;
                path.pop();
                path.push(1);
                let sa = self.term_sort(a, env, path)?;
                path.pop();
                path.push(2);
                let sb = self.term_sort(b, env, path)?;
                path.pop();
                if let (Some(sa), Some(sb)) = (sa, sb) {
                    if sa != sb {
                        self.violate(
                            RuleName::SortMismatch,
                            path,
                            format!("conditional branches have sorts {sa} and {sb}"),
                        );
                    }
                }
                Ok(sa.or(sb))
            }
            Term::SpF(f) => {
                path.push(0);
                self.formula(f, env, path, 1)?;
                path.pop();
                Ok(Some(Sort::FgSet))
            }
            Term::SpT(inner) => {
                path.push(0);
                self.term_sort(inner, env, path)?;
                path.pop();
                Ok(Some(Sort::FgSet))
            }
            Term::Union(a, b) | Term::Inter(a, b) => {
                for (i, x) in [a, b].iter().enumerate() {
                    path.push(i as u32);
                    let got = self.term_sort(x, env, path)?;
                    self.expect_sort(Sort::FgSet, got, path, "set operand");
                    path.pop();
                }
                Ok(Some(Sort::FgSet))
            }
            Term::Compl(a) => {
                path.push(0);
                let got = self.term_sort(a, env, path)?;
                self.expect_sort(Sort::FgSet, got, path, "set operand");
                path.pop();
                Ok(Some(Sort::FgSet))
            }
            Term::Empty => Ok(Some(Sort::FgSet)),
        }
    }

    /// Validates a formula. `polarity` is +1 under an even number of
    /// negations, -1 under odd; inside a support expression it is 1 but
    /// inductive occurrences are exempted via `in_support`.
    fn formula(
        &mut self,
        f: &Formula,
        env: &mut BTreeMap<String, Sort>,
        path: &mut Vec<u32>,
        polarity: i8,
    ) -> Result<(), AstError> {
        match f {
            Formula::True | Formula::False => Ok(()),
            Formula::Eq(a, b) => {
                path.push(0);
                let sa = self.term_sort(a, env, path)?;
                path.pop();
                path.push(1);
                let sb = self.term_sort(b, env, path)?;
                path.pop();
                if let (Some(sa), Some(sb)) = (sa, sb) {
                    if sa != sb {
                        self.violate(
                            RuleName::SortMismatch,
                            path,
                            format!("equality between sorts {sa} and {sb}"),
                        );
                    }
                }
                Ok(())
            }
            Formula::Rel(name, args) => {
                let want: Vec<Sort> = match name.as_str() {
                    "in" => vec![Sort::Fg, Sort::FgSet],
                    "subseteq" => vec![Sort::FgSet, Sort::FgSet],
                    n if INT_CMPS.contains(&n) => vec![Sort::Int, Sort::Int],
                    _ => self
                        .sig
                        .rels
                        .get(name)
                        .cloned()
                        .ok_or_else(|| AstError::UnknownSymbol(name.clone()))?,
                };
                if want.len() != args.len() {
                    self.violate(
                        RuleName::SortMismatch,
                        path,
                        format!("{name} applied to {} arguments, expects {}", args.len(), want.len()),
                    );
                }
                for (i, (a, w)) in args.iter().zip(want.iter()).enumerate() {
                    path.push(i as u32);
                    let got = self.term_sort(a, env, path)?;
                    self.expect_sort(*w, got, path, &format!("argument {i} of {name}"));
                    path.pop();
                }
                Ok(())
            }
            Formula::Ind(name, args) => {
                let want = self
                    .sig
                    .inductives
                    .get(name)
                    .cloned()
                    .ok_or_else(|| AstError::UnknownSymbol(name.clone()))?;
                if polarity < 0 {
                    self.violate(
                        RuleName::NegativeInductiveOccurrence,
                        path,
                        format!("inductive relation {name} occurs under an odd number of negations"),
                    );
                }
                if want.len() != args.len() {
                    self.violate(
                        RuleName::SortMismatch,
                        path,
                        format!("{name} applied to {} arguments, expects {}", args.len(), want.len()),
                    );
                }
                for (i, (a, w)) in args.iter().zip(want.iter()).enumerate() {
                    path.push(i as u32);
                    let got = self.term_sort(a, env, path)?;
                    self.expect_sort(*w, got, path, &format!("argument {i} of {name}"));
                    path.pop();
                }
                Ok(())
            }
            Formula::And(a, b) => {
                path.push(0);
                self.formula(a, env, path, polarity)?;
                path.pop();
                path.push(1);
                self.formula(b, env, path, polarity)?;
                path.pop();
                Ok(())
            }
            Formula::Not(a) => {
                path.push(0);
                self.formula(a, env, path, -polarity)?;
                path.pop();
                Ok(())
            }
            Formula::Ite(g, a, b) => {
                path.push(0);
                self.guard(g, env, path)?;
                path.pop();
                path.push(1);
                self.formula(a, env, path, polarity)?;
                path.pop();
                path.push(2);
                self.formula(b, env, path, polarity)?;
                path.pop();
                Ok(())
            }
            Formula::Exists { var, sort, guard, body } => {
                let shadowed = env.insert(var.clone(), *sort);
                path.push(0);
                self.guard(guard, env, path)?;
                path.pop();
                path.push(1);
                self.formula(body, env, path, polarity)?;
                path.pop();
                match shadowed {
                    Some(s) => {
                        env.insert(var.clone(), s);
                    }
                    None => {
                        env.remove(var);
                    }
                }
                Ok(())
            }
        }
    }

    /// Guards may not mention inductive relations or support expressions; the
    /// strict rule also excludes every set-sorted term.
    fn guard(
        &mut self,
        g: &Formula,
        env: &mut BTreeMap<String, Sort>,
        path: &mut Vec<u32>,
    ) -> Result<(), AstError> {
        self.check_guard_restrictions(g, path);
        self.formula(g, env, path, 1)
    }

    fn check_guard_restrictions(&mut self, g: &Formula, path: &[u32]) {
        let mut inds: Vec<&str> = Vec::new();
        collect_inductive_names(g, &mut inds);
        for name in inds {
            self.violate(
                RuleName::GuardUsesInductive,
                path,
                format!("guard mentions inductive relation {name}"),
            );
        }
        let mut offenders: Vec<&Term> = Vec::new();
        collect_set_terms_in_formula(g, &mut offenders);
        for t in offenders {
            let is_sp = matches!(t, Term::SpF(_) | Term::SpT(_));
            if !is_sp && self.opts.allow_set_consts_in_guards {
                continue;
            }
            self.violate(
                RuleName::GuardUsesSetSort,
                path,
                if is_sp {
                    "guard mentions a support expression".to_owned()
                } else {
                    "guard mentions a set-sorted term".to_owned()
                },
            );
        }
    }
}

fn collect_inductive_names<'f>(f: &'f Formula, out: &mut Vec<&'f str>) {
    match f {
        Formula::Ind(n, args) => {
            out.push(n);
            for a in args {
                collect_inductive_names_term(a, out);
            }
        }
        Formula::Eq(a, b) => {
            collect_inductive_names_term(a, out);
            collect_inductive_names_term(b, out);
        }
        Formula::Rel(_, args) => {
            for a in args {
                collect_inductive_names_term(a, out);
            }
        }
        Formula::And(a, b) => {
            collect_inductive_names(a, out);
            collect_inductive_names(b, out);
        }
        Formula::Not(a) => collect_inductive_names(a, out),
        Formula::Ite(g, a, b) => {
            collect_inductive_names(g, out);
            collect_inductive_names(a, out);
            collect_inductive_names(b, out);
        }
        Formula::Exists { guard, body, .. } => {
            collect_inductive_names(guard, out);
            collect_inductive_names(body, out);
        }
        Formula::True | Formula::False => {}
    }
}

fn collect_inductive_names_term<'f>(t: &'f Term, out: &mut Vec<&'f str>) {
    match t {
        Term::App(_, args) => {
            for a in args {
                collect_inductive_names_term(a, out);
            }
        }
        Term::Add(a, b) | Term::Sub(a, b) | Term::Union(a, b) | Term::Inter(a, b) => {
            collect_inductive_names_term(a, out);
            collect_inductive_names_term(b, out);
        }
        Term::Ite(g, a, b) => {
            collect_inductive_names(g, out);
            collect_inductive_names_term(a, out);
            collect_inductive_names_term(b, out);
        }
        Term::SpF(f) => collect_inductive_names(f, out),
        Term::SpT(t) => collect_inductive_names_term(t, out),
        Term::Compl(a) => collect_inductive_names_term(a, out),
        Term::Const(_) | Term::Var(..) | Term::Int(_) | Term::Empty => {}
    }
}

/// Set-sorted terms syntactically occurring in a formula (maximal ones).
fn collect_set_terms_in_formula<'f>(f: &'f Formula, out: &mut Vec<&'f Term>) {
    let on_term = |t: &'f Term, out: &mut Vec<&'f Term>| {
        if is_set_term(t) {
            out.push(t);
        }
    };
    match f {
        Formula::Eq(a, b) => {
            on_term(a, out);
            on_term(b, out);
        }
        Formula::Rel(_, args) | Formula::Ind(_, args) => {
            for a in args {
                on_term(a, out);
            }
        }
        Formula::And(a, b) => {
            collect_set_terms_in_formula(a, out);
            collect_set_terms_in_formula(b, out);
        }
        Formula::Not(a) => collect_set_terms_in_formula(a, out),
        Formula::Ite(g, a, b) => {
            collect_set_terms_in_formula(g, out);
            collect_set_terms_in_formula(a, out);
            collect_set_terms_in_formula(b, out);
        }
        Formula::Exists { guard, body, .. } => {
            collect_set_terms_in_formula(guard, out);
            collect_set_terms_in_formula(body, out);
        }
        Formula::True | Formula::False => {}
    }
}

/// Syntactic set-sortedness; sound for the restricted signature because only
/// built-ins produce set values.
pub fn is_set_term(t: &Term) -> bool {
    matches!(
        t,
        Term::SpF(_)
            | Term::SpT(_)
            | Term::Union(..)
            | Term::Inter(..)
            | Term::Compl(_)
            | Term::Empty
    ) || matches!(t, Term::Var(_, Sort::FgSet))
        || matches!(t, Term::Const(c) if c == AVAIL_SET)
}

/// Validates a formula (and all definitions) against a signature.
///
/// The report lists zero violations exactly when the input is well formed:
/// sorts line up, guards stay inside the guard fragment, inductive relations
/// occur only positively or inside supports, and no definition takes a
/// set-sorted parameter.
pub fn validate(
    sig: &Signature,
    defs: &DefinitionSet,
    formula: &Formula,
) -> Result<ValidationReport, AstError> {
    validate_with(sig, defs, formula, ValidateOpts::default())
}

pub fn validate_with(
    sig: &Signature,
    defs: &DefinitionSet,
    formula: &Formula,
    opts: ValidateOpts,
) -> Result<ValidationReport, AstError> {
    sig.check()?;
    let mut v = Validator {
        sig,
        opts,
        report: ValidationReport::default(),
        current_def: None,
    };
    for def in defs.iter() {
        v.current_def = Some(def.name.clone());
        let mut env: BTreeMap<String, Sort> = BTreeMap::new();
        for (p, s) in &def.params {
            if *s == Sort::FgSet {
                v.violate(
                    RuleName::SetSortInductiveParam,
                    &[],
                    format!("parameter {p} of {} has set sort", def.name),
                );
            }
            env.insert(p.clone(), *s);
        }
        let mut path = Vec::new();
        v.formula(&def.body, &mut env, &mut path, 1)?;
    }
    v.current_def = None;
    let mut env = BTreeMap::new();
    let mut path = Vec::new();
    v.formula(formula, &mut env, &mut path, 1)?;
    Ok(v.report)
}

// ---------------------------------------------------------------------------
// Free variables, substitution, alpha renaming
// ---------------------------------------------------------------------------

/// Free variables of a formula with their sorts. Binders scope over both the
/// guard and the body of an existential.
pub fn free_vars(f: &Formula) -> BTreeSet<(String, Sort)> {
    let mut acc = BTreeSet::new();
    let mut bound = Vec::new();
    fv_formula(f, &mut bound, &mut acc);
    acc
}

pub fn free_vars_term(t: &Term) -> BTreeSet<(String, Sort)> {
    let mut acc = BTreeSet::new();
    let mut bound = Vec::new();
    fv_term(t, &mut bound, &mut acc);
    acc
}

fn fv_formula(f: &Formula, bound: &mut Vec<String>, acc: &mut BTreeSet<(String, Sort)>) {
    match f {
        Formula::True | Formula::False => {}
        Formula::Eq(a, b) => {
            fv_term(a, bound, acc);
            fv_term(b, bound, acc);
        }
        Formula::Rel(_, args) | Formula::Ind(_, args) => {
            for a in args {
                fv_term(a, bound, acc);
            }
        }
        Formula::And(a, b) => {
            fv_formula(a, bound, acc);
            fv_formula(b, bound, acc);
        }
        Formula::Not(a) => fv_formula(a, bound, acc),
        Formula::Ite(g, a, b) => {
            fv_formula(g, bound, acc);
            fv_formula(a, bound, acc);
            fv_formula(b, bound, acc);
        }
        Formula::Exists { var, guard, body, .. } => {
            bound.push(var.clone());
            fv_formula(guard, bound, acc);
            fv_formula(body, bound, acc);
            bound.pop();
        }
    }
}

fn fv_term(t: &Term, bound: &mut Vec<String>, acc: &mut BTreeSet<(String, Sort)>) {
    match t {
        Term::Const(_) | Term::Int(_) | Term::Empty => {}
        Term::Var(v, s) => {
            if !bound.iter().any(|b| b == v) {
                acc.insert((v.clone(), *s));
            }
        }
        Term::App(_, args) => {
            for a in args {
                fv_term(a, bound, acc);
            }
        }
        Term::Add(a, b) | Term::Sub(a, b) | Term::Union(a, b) | Term::Inter(a, b) => {
            fv_term(a, bound, acc);
            fv_term(b, bound, acc);
        }
        Term::Ite(g, a, b) => {
            fv_formula(g, bound, acc);
            fv_term(a, bound, acc);
            fv_term(b, bound, acc);
        }
        Term::SpF(f) => fv_formula(f, bound, acc),
        Term::SpT(t) => fv_term(t, bound, acc),
        Term::Compl(a) => fv_term(a, bound, acc),
    }
}

/// Simultaneous substitution of terms for free variables. Bound occurrences
/// are untouched; run [`alpha_normalize`] first when capture is possible.
pub fn substitute(f: &Formula, map: &BTreeMap<String, Term>) -> Formula {
    subst_formula(f, map)
}

pub fn substitute_term(t: &Term, map: &BTreeMap<String, Term>) -> Term {
    subst_term(t, map)
}

fn subst_formula(f: &Formula, map: &BTreeMap<String, Term>) -> Formula {
    match f {
        Formula::True => Formula::True,
        Formula::False => Formula::False,
        Formula::Eq(a, b) => Formula::Eq(subst_term(a, map), subst_term(b, map)),
        Formula::Rel(n, args) => {
            Formula::Rel(n.clone(), args.iter().map(|a| subst_term(a, map)).collect())
        }
        Formula::Ind(n, args) => {
            Formula::Ind(n.clone(), args.iter().map(|a| subst_term(a, map)).collect())
        }
        Formula::And(a, b) => Formula::and(subst_formula(a, map), subst_formula(b, map)),
        Formula::Not(a) => Formula::not(subst_formula(a, map)),
        Formula::Ite(g, a, b) => Formula::ite(
            subst_formula(g, map),
            subst_formula(a, map),
            subst_formula(b, map),
        ),
        Formula::Exists { var, sort, guard, body } => {
            if map.contains_key(var) {
                let mut inner = map.clone();
                inner.remove(var);
                Formula::Exists {
                    var: var.clone(),
                    sort: *sort,
                    guard: Box::new(subst_formula(guard, &inner)),
                    body: Box::new(subst_formula(body, &inner)),
                }
            } else {
                Formula::Exists {
                    var: var.clone(),
                    sort: *sort,
                    guard: Box::new(subst_formula(guard, map)),
                    body: Box::new(subst_formula(body, map)),
                }
            }
        }
    }
}

fn subst_term(t: &Term, map: &BTreeMap<String, Term>) -> Term {
    match t {
        Term::Const(_) | Term::Int(_) | Term::Empty => t.clone(),
        Term::Var(v, _) => match map.get(v) {
            Some(r) => r.clone(),
            None => t.clone(),
        },
        Term::App(f, args) => {
            Term::App(f.clone(), args.iter().map(|a| subst_term(a, map)).collect())
        }
        Term::Add(a, b) => Term::add(subst_term(a, map), subst_term(b, map)),
        Term::Sub(a, b) => Term::sub(subst_term(a, map), subst_term(b, map)),
        Term::Union(a, b) => Term::union(subst_term(a, map), subst_term(b, map)),
        Term::Inter(a, b) => Term::inter(subst_term(a, map), subst_term(b, map)),
        Term::Compl(a) => Term::compl(subst_term(a, map)),
        Term::Ite(g, a, b) => Term::ite(
            subst_formula(g, map),
            subst_term(a, map),
            subst_term(b, map),
        ),
        Term::SpF(f) => Term::sp(subst_formula(f, map)),
        Term::SpT(t) => Term::sp_term(subst_term(t, map)),
    }
}

/// Renames a single variable inside a formula, including binders. Used for
/// alpha renaming only.
fn rename_formula(f: &Formula, from: &str, to: &str) -> Formula {
    match f {
        Formula::True => Formula::True,
        Formula::False => Formula::False,
        Formula::Eq(a, b) => Formula::Eq(rename_term(a, from, to), rename_term(b, from, to)),
        Formula::Rel(n, args) => Formula::Rel(
            n.clone(),
            args.iter().map(|a| rename_term(a, from, to)).collect(),
        ),
        Formula::Ind(n, args) => Formula::Ind(
            n.clone(),
            args.iter().map(|a| rename_term(a, from, to)).collect(),
        ),
        Formula::And(a, b) => {
            Formula::and(rename_formula(a, from, to), rename_formula(b, from, to))
        }
        Formula::Not(a) => Formula::not(rename_formula(a, from, to)),
        Formula::Ite(g, a, b) => Formula::ite(
            rename_formula(g, from, to),
            rename_formula(a, from, to),
            rename_formula(b, from, to),
        ),
        Formula::Exists { var, sort, guard, body } => Formula::Exists {
            var: if var == from { to.to_owned() } else { var.clone() },
            sort: *sort,
            guard: Box::new(rename_formula(guard, from, to)),
            body: Box::new(rename_formula(body, from, to)),
        },
    }
}

fn rename_term(t: &Term, from: &str, to: &str) -> Term {
    match t {
        Term::Const(_) | Term::Int(_) | Term::Empty => t.clone(),
        Term::Var(v, s) => {
            if v == from {
                Term::Var(to.to_owned(), *s)
            } else {
                t.clone()
            }
        }
        Term::App(f, args) => Term::App(
            f.clone(),
            args.iter().map(|a| rename_term(a, from, to)).collect(),
        ),
        Term::Add(a, b) => Term::add(rename_term(a, from, to), rename_term(b, from, to)),
        Term::Sub(a, b) => Term::sub(rename_term(a, from, to), rename_term(b, from, to)),
        Term::Union(a, b) => Term::union(rename_term(a, from, to), rename_term(b, from, to)),
        Term::Inter(a, b) => Term::inter(rename_term(a, from, to), rename_term(b, from, to)),
        Term::Compl(a) => Term::compl(rename_term(a, from, to)),
        Term::Ite(g, a, b) => Term::ite(
            rename_formula(g, from, to),
            rename_term(a, from, to),
            rename_term(b, from, to),
        ),
        Term::SpF(f) => Term::sp(rename_formula(f, from, to)),
        Term::SpT(t) => Term::sp_term(rename_term(t, from, to)),
    }
}

/// Function symbols a formula depends on, following inductive applications
/// into their definition bodies.
pub fn used_functions(f: &Formula, defs: &DefinitionSet) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut seen_defs = BTreeSet::new();
    used_fns_formula(f, defs, &mut out, &mut seen_defs);
    out
}

fn used_fns_formula(
    f: &Formula,
    defs: &DefinitionSet,
    out: &mut BTreeSet<String>,
    seen: &mut BTreeSet<String>,
) {
    match f {
        Formula::True | Formula::False => {}
        Formula::Eq(a, b) => {
            used_fns_term(a, defs, out, seen);
            used_fns_term(b, defs, out, seen);
        }
        Formula::Rel(_, args) => {
            for a in args {
                used_fns_term(a, defs, out, seen);
            }
        }
        Formula::Ind(name, args) => {
            for a in args {
                used_fns_term(a, defs, out, seen);
            }
            if seen.insert(name.clone()) {
                if let Some(d) = defs.get(name) {
                    used_fns_formula(&d.body, defs, out, seen);
                }
            }
        }
        Formula::And(a, b) => {
            used_fns_formula(a, defs, out, seen);
            used_fns_formula(b, defs, out, seen);
        }
        Formula::Not(a) => used_fns_formula(a, defs, out, seen),
        Formula::Ite(g, a, b) => {
            used_fns_formula(g, defs, out, seen);
            used_fns_formula(a, defs, out, seen);
            used_fns_formula(b, defs, out, seen);
        }
        Formula::Exists { guard, body, .. } => {
            used_fns_formula(guard, defs, out, seen);
            used_fns_formula(body, defs, out, seen);
        }
    }
}

fn used_fns_term(
    t: &Term,
    defs: &DefinitionSet,
    out: &mut BTreeSet<String>,
    seen: &mut BTreeSet<String>,
) {
    match t {
        Term::App(f, args) => {
            out.insert(f.clone());
            for a in args {
                used_fns_term(a, defs, out, seen);
            }
        }
        Term::Add(a, b) | Term::Sub(a, b) | Term::Union(a, b) | Term::Inter(a, b) => {
            used_fns_term(a, defs, out, seen);
            used_fns_term(b, defs, out, seen);
        }
        Term::Compl(a) | Term::SpT(a) => used_fns_term(a, defs, out, seen),
        Term::Ite(g, a, b) => {
            used_fns_formula(g, defs, out, seen);
            used_fns_term(a, defs, out, seen);
            used_fns_term(b, defs, out, seen);
        }
        Term::SpF(f) => used_fns_formula(f, defs, out, seen),
        Term::Const(_) | Term::Var(..) | Term::Int(_) | Term::Empty => {}
    }
}

/// The sub-library of definitions a formula transitively depends on.
pub fn used_defs(f: &Formula, defs: &DefinitionSet) -> DefinitionSet {
    fn names_in(f: &Formula, defs: &DefinitionSet, out: &mut BTreeSet<String>) {
        fn term(t: &Term, defs: &DefinitionSet, out: &mut BTreeSet<String>) {
            match t {
                Term::App(_, args) => args.iter().for_each(|a| term(a, defs, out)),
                Term::Add(a, b) | Term::Sub(a, b) | Term::Union(a, b) | Term::Inter(a, b) => {
                    term(a, defs, out);
                    term(b, defs, out);
                }
                Term::Compl(a) | Term::SpT(a) => term(a, defs, out),
                Term::Ite(g, a, b) => {
                    names_in(g, defs, out);
                    term(a, defs, out);
                    term(b, defs, out);
                }
                Term::SpF(f) => names_in(f, defs, out),
                _ => {}
            }
        }
        match f {
            Formula::Ind(name, args) => {
                args.iter().for_each(|a| term(a, defs, out));
                if out.insert(name.clone()) {
                    if let Some(d) = defs.get(name) {
                        names_in(&d.body, defs, out);
                    }
                }
            }
            Formula::Eq(a, b) => {
                term(a, defs, out);
                term(b, defs, out);
            }
            Formula::Rel(_, args) => args.iter().for_each(|a| term(a, defs, out)),
            Formula::And(a, b) => {
                names_in(a, defs, out);
                names_in(b, defs, out);
            }
            Formula::Not(a) => names_in(a, defs, out),
            Formula::Ite(g, a, b) => {
                names_in(g, defs, out);
                names_in(a, defs, out);
                names_in(b, defs, out);
            }
            Formula::Exists { guard, body, .. } => {
                names_in(guard, defs, out);
                names_in(body, defs, out);
            }
            Formula::True | Formula::False => {}
        }
    }
    let mut names = BTreeSet::new();
    names_in(f, defs, &mut names);
    let mut out = DefinitionSet::new();
    for n in names {
        if let Some(d) = defs.get(&n) {
            let _ = out.insert(d.clone());
        }
    }
    out
}

/// Picks a name of the form `base#k` not present in `used`, inserting it.
pub fn fresh_name(base: &str, used: &mut BTreeSet<String>) -> String {
    let stem = match base.find('#') {
        Some(i) => &base[..i],
        None => base,
    };
    let mut k = 1;
    loop {
        let cand = format!("{stem}#{k}");
        if !used.contains(&cand) {
            used.insert(cand.clone());
            return cand;
        }
        k += 1;
    }
}

/// Returns an alpha-equivalent formula in which every bound variable name is
/// globally unique and distinct from every free variable name. Idempotent.
pub fn alpha_normalize(f: &Formula) -> Formula {
    let mut used: BTreeSet<String> = free_vars(f).into_iter().map(|(n, _)| n).collect();
    alpha_walk(f, &mut used)
}

/// Alpha renaming against an externally maintained set of used names; names
/// chosen here are added to the set. Lets several formulas share one global
/// namespace.
pub fn alpha_normalize_with(f: &Formula, used: &mut BTreeSet<String>) -> Formula {
    for (n, _) in free_vars(f) {
        used.insert(n);
    }
    alpha_walk(f, used)
}

/// Bound variables of a formula with their sorts, in binder preorder.
pub fn bound_vars(f: &Formula) -> Vec<(String, Sort)> {
    fn walk(f: &Formula, out: &mut Vec<(String, Sort)>) {
        match f {
            Formula::Exists { var, sort, guard, body } => {
                out.push((var.clone(), *sort));
                walk(guard, out);
                walk(body, out);
            }
            Formula::And(a, b) => {
                walk(a, out);
                walk(b, out);
            }
            Formula::Not(a) => walk(a, out),
            Formula::Ite(g, a, b) => {
                walk(g, out);
                walk(a, out);
                walk(b, out);
            }
            Formula::Eq(a, b) => {
                walk_term(a, out);
                walk_term(b, out);
            }
            Formula::Rel(_, args) | Formula::Ind(_, args) => {
                for a in args {
                    walk_term(a, out);
                }
            }
            Formula::True | Formula::False => {}
        }
    }
    fn walk_term(t: &Term, out: &mut Vec<(String, Sort)>) {
        match t {
            Term::App(_, args) => {
                for a in args {
                    walk_term(a, out);
                }
            }
            Term::Add(a, b) | Term::Sub(a, b) | Term::Union(a, b) | Term::Inter(a, b) => {
                walk_term(a, out);
                walk_term(b, out);
            }
            Term::Compl(a) => walk_term(a, out),
            Term::Ite(g, a, b) => {
                walk(g, out);
                walk_term(a, out);
                walk_term(b, out);
            }
            Term::SpF(f) => walk(f, out),
            Term::SpT(t) => walk_term(t, out),
            Term::Const(_) | Term::Var(..) | Term::Int(_) | Term::Empty => {}
        }
    }
    let mut out = Vec::new();
    walk(f, &mut out);
    out
}

fn alpha_walk(f: &Formula, used: &mut BTreeSet<String>) -> Formula {
    match f {
        Formula::Exists { var, sort, guard, body } => {
            let (name, guard, body) = if used.contains(var) {
                let fresh = fresh_name(var, used);
                (
                    fresh.clone(),
                    rename_formula(guard, var, &fresh),
                    rename_formula(body, var, &fresh),
                )
            } else {
                used.insert(var.clone());
                (var.clone(), (**guard).clone(), (**body).clone())
            };
            Formula::Exists {
                var: name,
                sort: *sort,
                guard: Box::new(alpha_walk(&guard, used)),
                body: Box::new(alpha_walk(&body, used)),
            }
        }
        Formula::True => Formula::True,
        Formula::False => Formula::False,
        Formula::Eq(a, b) => Formula::Eq(alpha_walk_term(a, used), alpha_walk_term(b, used)),
        Formula::Rel(n, args) => Formula::Rel(
            n.clone(),
            args.iter().map(|a| alpha_walk_term(a, used)).collect(),
        ),
        Formula::Ind(n, args) => Formula::Ind(
            n.clone(),
            args.iter().map(|a| alpha_walk_term(a, used)).collect(),
        ),
        Formula::And(a, b) => Formula::and(alpha_walk(a, used), alpha_walk(b, used)),
        Formula::Not(a) => Formula::not(alpha_walk(a, used)),
        Formula::Ite(g, a, b) => Formula::ite(
            alpha_walk(g, used),
            alpha_walk(a, used),
            alpha_walk(b, used),
        ),
    }
}

fn alpha_walk_term(t: &Term, used: &mut BTreeSet<String>) -> Term {
    match t {
        Term::Const(_) | Term::Var(..) | Term::Int(_) | Term::Empty => t.clone(),
        Term::App(f, args) => Term::App(
            f.clone(),
            args.iter().map(|a| alpha_walk_term(a, used)).collect(),
        ),
        Term::Add(a, b) => Term::add(alpha_walk_term(a, used), alpha_walk_term(b, used)),
        Term::Sub(a, b) => Term::sub(alpha_walk_term(a, used), alpha_walk_term(b, used)),
        Term::Union(a, b) => Term::union(alpha_walk_term(a, used), alpha_walk_term(b, used)),
        Term::Inter(a, b) => Term::inter(alpha_walk_term(a, used), alpha_walk_term(b, used)),
        Term::Compl(a) => Term::compl(alpha_walk_term(a, used)),
        Term::Ite(g, a, b) => Term::ite(
            alpha_walk(g, used),
            alpha_walk_term(a, used),
            alpha_walk_term(b, used),
        ),
        Term::SpF(f) => Term::sp(alpha_walk(f, used)),
        Term::SpT(inner) => Term::sp_term(alpha_walk_term(inner, used)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig_one_field() -> Signature {
        Signature::new().with_field("f")
    }

    #[test]
    fn guard_with_inductive_is_flagged() {
        let sig = Signature::new()
            .with_field("next")
            .with_inductive("list", &[Sort::Fg]);
        let defs = DefinitionSet::new();
        let f = Formula::ite(
            Formula::ind("list", vec![Term::var("x")]),
            Formula::True,
            Formula::False,
        );
        let report = validate(&sig, &defs, &f).unwrap();
        assert!(report
            .violations
            .iter()
            .any(|v| v.rule == RuleName::GuardUsesInductive));
    }

    #[test]
    fn plain_field_equality_validates() {
        let sig = sig_one_field();
        let defs = DefinitionSet::new();
        let f = Formula::eq(Term::app1("f", Term::var("x")), Term::var("y"));
        let report = validate(&sig, &defs, &f).unwrap();
        assert!(report.is_ok(), "{:?}", report.violations);
    }

    #[test]
    fn negative_self_reference_is_flagged() {
        let mut sig = Signature::new().with_field("f");
        let mut defs = DefinitionSet::new();
        defs.insert(Definition {
            name: "bad".to_owned(),
            params: vec![("x".to_owned(), Sort::Fg)],
            body: Formula::not(Formula::ind("bad", vec![Term::var("x")])),
        })
        .unwrap();
        defs.declare_in(&mut sig);
        let report = validate(&sig, &defs, &Formula::True).unwrap();
        assert!(report
            .violations
            .iter()
            .any(|v| v.rule == RuleName::NegativeInductiveOccurrence));
    }

    #[test]
    fn unknown_symbol_is_an_error() {
        let sig = sig_one_field();
        let defs = DefinitionSet::new();
        let f = Formula::eq(Term::app1("g", Term::var("x")), Term::var("y"));
        assert_eq!(
            validate(&sig, &defs, &f),
            Err(AstError::UnknownSymbol("g".to_owned()))
        );
    }

    #[test]
    fn inductive_inside_support_is_positive_enough() {
        let mut sig = Signature::new().with_field("next");
        let mut defs = DefinitionSet::new();
        // x not in Sp(list(z)) place the inductive occurrence inside a
        // support expression under a negation; that is allowed.
        defs.insert(Definition {
            name: "list".to_owned(),
            params: vec![("x".to_owned(), Sort::Fg)],
            body: Formula::ite(
                Formula::eq(Term::var("x"), Term::nil()),
                Formula::True,
                Formula::exists(
                    "z",
                    Sort::Fg,
                    Formula::eq(Term::var("z"), Term::app1("next", Term::var("x"))),
                    Formula::and(
                        Formula::ind("list", vec![Term::var("z")]),
                        Formula::not(Formula::member(
                            Term::var("x"),
                            Term::sp(Formula::ind("list", vec![Term::var("z")])),
                        )),
                    ),
                ),
            ),
        })
        .unwrap();
        defs.declare_in(&mut sig);
        let report = validate(&sig, &defs, &Formula::ind("list", vec![Term::var("y")])).unwrap();
        assert!(report.is_ok(), "{:?}", report.violations);
    }

    #[test]
    fn alpha_renames_duplicate_binders() {
        let ex = |v: &str| {
            Formula::exists(
                v,
                Sort::Fg,
                Formula::eq(Term::var(v), Term::nil()),
                Formula::eq(Term::var(v), Term::var("w")),
            )
        };
        let f = Formula::and(ex("y"), ex("y"));
        let g = alpha_normalize(&f);
        match &g {
            Formula::And(a, b) => {
                let (va, vb) = match (&**a, &**b) {
                    (Formula::Exists { var: va, .. }, Formula::Exists { var: vb, .. }) => (va, vb),
                    _ => panic!("shape changed"),
                };
                assert_eq!(va, "y");
                assert_eq!(vb, "y#1");
            }
            _ => panic!("shape changed"),
        }
        // Idempotent.
        assert_eq!(alpha_normalize(&g), g);
    }

    #[test]
    fn alpha_keeps_outer_nested_binder() {
        let inner = Formula::exists(
            "y",
            Sort::Fg,
            Formula::True,
            Formula::eq(Term::var("y"), Term::nil()),
        );
        let outer = Formula::exists("y", Sort::Fg, Formula::True, inner);
        let g = alpha_normalize(&outer);
        match &g {
            Formula::Exists { var, body, .. } => {
                assert_eq!(var, "y");
                match &**body {
                    Formula::Exists { var, .. } => assert_eq!(var, "y#1"),
                    _ => panic!("shape changed"),
                }
            }
            _ => panic!("shape changed"),
        }
    }

    #[test]
    fn alpha_no_binders_is_identity() {
        let f = Formula::eq(Term::app1("f", Term::var("x")), Term::var("y"));
        assert_eq!(alpha_normalize(&f), f);
    }

    #[test]
    fn substitute_free_only_and_descends_into_sp() {
        let mut map = BTreeMap::new();
        map.insert("x".to_owned(), Term::cst("c"));
        // (x = y)[c/x]
        let f = Formula::eq(Term::var("x"), Term::var("y"));
        assert_eq!(
            substitute(&f, &map),
            Formula::eq(Term::cst("c"), Term::var("y"))
        );
        // (exists x : g. x = y)[z/x] unchanged
        let mut map2 = BTreeMap::new();
        map2.insert("x".to_owned(), Term::var("z"));
        let g = Formula::exists(
            "x",
            Sort::Fg,
            Formula::True,
            Formula::eq(Term::var("x"), Term::var("y")),
        );
        assert_eq!(substitute(&g, &map2), g);
        // Sp(f(x) = y)[t/x]
        let h = Formula::member(
            Term::var("w"),
            Term::sp(Formula::eq(Term::app1("f", Term::var("x")), Term::var("y"))),
        );
        let ht = substitute(&h, &map);
        assert_eq!(
            ht,
            Formula::member(
                Term::var("w"),
                Term::sp(Formula::eq(Term::app1("f", Term::cst("c")), Term::var("y"))),
            )
        );
    }

    #[test]
    fn free_vars_examples() {
        let f = Formula::eq(Term::app1("f", Term::var("x")), Term::var("y"));
        let fv: BTreeSet<String> = free_vars(&f).into_iter().map(|(n, _)| n).collect();
        assert_eq!(fv, ["x", "y"].iter().map(|s| s.to_string()).collect());

        let g = Formula::exists(
            "y",
            Sort::Fg,
            Formula::eq(Term::var("y"), Term::app1("f", Term::var("x"))),
            Formula::eq(Term::app1("f", Term::var("y")), Term::var("z")),
        );
        let fv: BTreeSet<String> = free_vars(&g).into_iter().map(|(n, _)| n).collect();
        assert_eq!(fv, ["x", "z"].iter().map(|s| s.to_string()).collect());

        assert!(free_vars(&Formula::eq(Term::nil(), Term::nil())).is_empty());
    }

    #[test]
    fn fv_of_substitution() {
        // fv(phi[t/x]) = (fv(phi) \ {x}) ∪ fv(t) when x free in phi
        let phi = Formula::and(
            Formula::eq(Term::var("x"), Term::var("y")),
            Formula::eq(Term::var("x"), Term::nil()),
        );
        let t = Term::app1("f", Term::var("w"));
        let mut map = BTreeMap::new();
        map.insert("x".to_owned(), t.clone());
        let sub = substitute(&phi, &map);
        let mut expect: BTreeSet<(String, Sort)> = free_vars(&phi);
        expect.retain(|(n, _)| n != "x");
        expect.extend(free_vars_term(&t));
        assert_eq!(free_vars(&sub), expect);
    }
}
