//! Program logic: weakest tightest preconditions, verification-condition
//! generation, and bounded checking of triples.
//!
//! A triple `{pre} S {post}` is valid when every valid configuration
//! satisfying the precondition with heaplet exactly its support runs without
//! aborting and every final configuration satisfies the postcondition with
//! heaplet exactly its support. The per-command precondition transformers
//! below are exact: the set of tight precondition configurations equals the
//! set of preconfigurations of the tight postcondition configurations.
//!
//! Mutation and allocation need formula transformers (`mw_mutation`,
//! `mw_alloc`) that evaluate the postcondition in the pre-state as it would
//! evaluate in the post-state. Both also rewrite recursive definitions into
//! primed variants; allocation additionally replaces support membership by
//! generated relations describing the post-state support minus the fresh
//! cell.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::ast::{
    free_vars, fresh_name, substitute, AstError, Definition, DefinitionSet, Formula, Signature,
    Sort, Term, AVAIL_SET,
};
use crate::model::{
    enumerate_pre_models, Assignment, ElemSet, EnumFilter, ModelError, PreModel, Value,
};
use crate::oracle::{enumerate_configs, Bounds};
use crate::semantics::{frame_model, EvalError, FrameModel};
use crate::whilelang::{run_collect, Configuration, Stmt};

/// Errors from the program-logic operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HoareError {
    /// A while loop without an invariant annotation.
    RequiresInvariant,
    /// A support atom not covered by the allocation rewrite.
    UntranslatableSpPosition(String),
    /// The formula leaves the restricted program-logic fragment.
    RestrictedFragment(String),
    Ast(AstError),
    Eval(EvalError),
    Model(ModelError),
}

impl fmt::Display for HoareError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HoareError::RequiresInvariant => write!(f, "while loop requires an invariant"),
            HoareError::UntranslatableSpPosition(m) => {
                write!(f, "support atom not covered by the allocation rewrite: {m}")
            }
            HoareError::RestrictedFragment(m) => write!(f, "outside the restricted fragment: {m}"),
            HoareError::Ast(e) => write!(f, "{e}"),
            HoareError::Eval(e) => write!(f, "{e}"),
            HoareError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl From<AstError> for HoareError {
    fn from(e: AstError) -> Self {
        HoareError::Ast(e)
    }
}
impl From<EvalError> for HoareError {
    fn from(e: EvalError) -> Self {
        HoareError::Eval(e)
    }
}
impl From<ModelError> for HoareError {
    fn from(e: ModelError) -> Self {
        HoareError::Model(e)
    }
}

/// A specification triple with its signature and definitions.
#[derive(Debug, Clone)]
pub struct Triple {
    pub sig: alloc::sync::Arc<Signature>,
    pub defs: DefinitionSet,
    pub pre: Formula,
    pub program: Stmt,
    pub post: Formula,
    /// Declared program variables with sorts.
    pub vars: Vec<(String, Sort)>,
}

/// Checks the restricted fragment the program logic covers: unary functions
/// only, no user relations over locations, no background-to-foreground
/// functions, and quantification guards of the shapes `f(z') = z` or
/// `z in U`.
pub fn check_fragment(sig: &Signature, f: &Formula) -> Result<(), HoareError> {
    for (name, fsig) in &sig.funcs {
        if fsig.args.len() > 1 {
            return Err(HoareError::RestrictedFragment(format!(
                "function {name} is not unary"
            )));
        }
        if fsig.ret == Sort::Fg && fsig.args.first() != Some(&Sort::Fg) {
            return Err(HoareError::RestrictedFragment(format!(
                "function {name} maps a background sort to locations"
            )));
        }
    }
    fn walk(f: &Formula, sig: &Signature) -> Result<(), HoareError> {
        match f {
            Formula::Rel(name, _) => {
                if sig.rels.contains_key(name) {
                    return Err(HoareError::RestrictedFragment(format!(
                        "atomic relation {name} on locations"
                    )));
                }
                Ok(())
            }
            Formula::And(a, b) => {
                walk(a, sig)?;
                walk(b, sig)
            }
            Formula::Not(a) => walk(a, sig),
            Formula::Ite(g, a, b) => {
                walk(g, sig)?;
                walk(a, sig)?;
                walk(b, sig)
            }
            Formula::Exists { var, guard, body, .. } => {
                if !guard_shape_ok(var, guard) {
                    return Err(HoareError::RestrictedFragment(format!(
                        "quantifier guard for {var} is not f(z') = z or z in U"
                    )));
                }
                walk(guard, sig)?;
                walk(body, sig)
            }
            _ => Ok(()),
        }
    }
    walk(f, sig)
}

/// Guard shapes the fragment allows: `z = f(z')`, `f(z') = z`, `z in U`, or
/// conjunctions of these over distinct binders (multi-binder sugar).
fn guard_shape_ok(var: &str, guard: &Formula) -> bool {
    match guard {
        Formula::True => true,
        Formula::Eq(a, b) => {
            let is_var = |t: &Term| matches!(t, Term::Var(v, _) if v == var);
            let is_app = |t: &Term| matches!(t, Term::App(_, args) if args.len() == 1);
            (is_var(a) && is_app(b)) || (is_var(b) && is_app(a))
        }
        Formula::Rel(name, args) if name == "in" && args.len() == 2 => {
            matches!(&args[0], Term::Var(v, _) if v == var)
                && matches!(&args[1], Term::Const(c) if c == AVAIL_SET)
        }
        Formula::And(a, b) => guard_shape_ok(var, a) || guard_shape_ok(var, b),
        _ => false,
    }
}

/// Fresh-name generator over a reserved `#` namespace, seeded from the names
/// already in use so repeated calls are deterministic.
pub struct FreshNames {
    used: BTreeSet<String>,
}

impl FreshNames {
    pub fn for_formula(f: &Formula) -> FreshNames {
        let mut used: BTreeSet<String> = free_vars(f).into_iter().map(|(n, _)| n).collect();
        used.extend(crate::ast::bound_vars(f).into_iter().map(|(n, _)| n));
        FreshNames { used }
    }

    pub fn also(&mut self, defs: &DefinitionSet) {
        for d in defs.iter() {
            self.used.insert(d.name.clone());
            for (p, _) in &d.params {
                self.used.insert(p.clone());
            }
            self.used
                .extend(crate::ast::bound_vars(&d.body).into_iter().map(|(n, _)| n));
        }
    }

    pub fn fresh(&mut self, base: &str) -> String {
        fresh_name(base, &mut self.used)
    }
}

// ---------------------------------------------------------------------------
// Mutation transformer
// ---------------------------------------------------------------------------

/// Rewrites every application of `field` inside-out so the formula evaluates
/// in the pre-state of `x.field := y` exactly as the original would evaluate
/// in the post-state. The tautological inner conditional keeps `x` in the
/// support. Recursive definitions used by the formula are rewritten into
/// primed variants the same way.
pub fn mw_mutation(
    x: &str,
    field: &str,
    y: &str,
    beta: &Formula,
    defs: &DefinitionSet,
) -> (Formula, DefinitionSet) {
    let mut out_defs = defs.clone();
    let mut renames: BTreeMap<String, String> = BTreeMap::new();
    let f = mw_mut_formula(x, field, y, beta, defs, &mut out_defs, &mut renames);
    (f, out_defs)
}

fn mw_mut_formula(
    x: &str,
    field: &str,
    y: &str,
    f: &Formula,
    defs: &DefinitionSet,
    out: &mut DefinitionSet,
    renames: &mut BTreeMap<String, String>,
) -> Formula {
    let t = |term: &Term, out: &mut DefinitionSet, renames: &mut BTreeMap<String, String>| {
        mw_mut_term(x, field, y, term, defs, out, renames)
    };
    match f {
        Formula::True => Formula::True,
        Formula::False => Formula::False,
        Formula::Eq(a, b) => Formula::Eq(t(a, out, renames), t(b, out, renames)),
        Formula::Rel(n, args) => Formula::Rel(
            n.clone(),
            args.iter().map(|a| t(a, out, renames)).collect(),
        ),
        Formula::Ind(n, args) => {
            let primed = mw_mut_def(x, field, y, n, defs, out, renames);
            let mut out_args: Vec<Term> = args.iter().map(|a| t(a, out, renames)).collect();
            if primed != *n {
                // Primed definitions take the mutation's variables as
                // trailing parameters.
                out_args.push(Term::var(x));
                out_args.push(Term::var(y));
            }
            Formula::Ind(primed, out_args)
        }
        Formula::And(a, b) => Formula::and(
            mw_mut_formula(x, field, y, a, defs, out, renames),
            mw_mut_formula(x, field, y, b, defs, out, renames),
        ),
        Formula::Not(a) => Formula::not(mw_mut_formula(x, field, y, a, defs, out, renames)),
        Formula::Ite(g, a, b) => Formula::ite(
            mw_mut_formula(x, field, y, g, defs, out, renames),
            mw_mut_formula(x, field, y, a, defs, out, renames),
            mw_mut_formula(x, field, y, b, defs, out, renames),
        ),
        Formula::Exists { var, sort, guard, body } => Formula::Exists {
            var: var.clone(),
            sort: *sort,
            guard: alloc::boxed::Box::new(mw_mut_formula(x, field, y, guard, defs, out, renames)),
            body: alloc::boxed::Box::new(mw_mut_formula(x, field, y, body, defs, out, renames)),
        },
    }
}

fn mw_mut_term(
    x: &str,
    field: &str,
    y: &str,
    term: &Term,
    defs: &DefinitionSet,
    out: &mut DefinitionSet,
    renames: &mut BTreeMap<String, String>,
) -> Term {
    let rec = |tt: &Term, out: &mut DefinitionSet, renames: &mut BTreeMap<String, String>| {
        mw_mut_term(x, field, y, tt, defs, out, renames)
    };
    match term {
        Term::Const(_) | Term::Var(..) | Term::Int(_) | Term::Empty => term.clone(),
        Term::App(f, args) => {
            let args: Vec<Term> = args.iter().map(|a| rec(a, out, renames)).collect();
            if f == field {
                // ite(t = x : ite(f(x) = f(x) : y, y), f(t)), rewritten
                // inside-out; the tautological guard keeps x in the support.
                let arg = args[0].clone();
                let fx = Term::app1(field, Term::var(x));
                Term::ite(
                    Formula::eq(arg.clone(), Term::var(x)),
                    Term::ite(
                        Formula::eq(fx.clone(), fx),
                        Term::var(y),
                        Term::var(y),
                    ),
                    Term::App(f.clone(), vec![arg]),
                )
            } else {
                Term::App(f.clone(), args)
            }
        }
        Term::Add(a, b) => Term::add(rec(a, out, renames), rec(b, out, renames)),
        Term::Sub(a, b) => Term::sub(rec(a, out, renames), rec(b, out, renames)),
        Term::Union(a, b) => Term::union(rec(a, out, renames), rec(b, out, renames)),
        Term::Inter(a, b) => Term::inter(rec(a, out, renames), rec(b, out, renames)),
        Term::Compl(a) => Term::compl(rec(a, out, renames)),
        Term::Ite(g, a, b) => Term::ite(
            mw_mut_formula(x, field, y, g, defs, out, renames),
            rec(a, out, renames),
            rec(b, out, renames),
        ),
        Term::SpF(f) => Term::sp(mw_mut_formula(x, field, y, f, defs, out, renames)),
        Term::SpT(t) => Term::sp_term(rec(t, out, renames)),
    }
}

/// Primed variant of a recursive definition under the mutation rewrite.
fn mw_mut_def(
    x: &str,
    field: &str,
    y: &str,
    name: &str,
    defs: &DefinitionSet,
    out: &mut DefinitionSet,
    renames: &mut BTreeMap<String, String>,
) -> String {
    if let Some(n) = renames.get(name) {
        return n.clone();
    }
    let Some(def) = defs.get(name) else {
        return name.to_owned();
    };
    // Definitions that never touch the mutated field keep their name.
    if !formula_mentions_fn(&def.body, field, defs, &mut BTreeSet::new()) {
        renames.insert(name.to_owned(), name.to_owned());
        return name.to_owned();
    }
    let primed = {
        let mut used: BTreeSet<String> = out.defs.keys().cloned().collect();
        used.extend(defs.defs.keys().cloned());
        fresh_name(name, &mut used)
    };
    renames.insert(name.to_owned(), primed.clone());
    // The mutation's variables become trailing parameters of the primed
    // definition, renamed apart from the original parameters if needed.
    let mut param_names: BTreeSet<String> =
        def.params.iter().map(|(n, _)| n.clone()).collect();
    param_names.extend(crate::ast::bound_vars(&def.body).into_iter().map(|(n, _)| n));
    let px = if param_names.contains(x) {
        fresh_name(x, &mut param_names)
    } else {
        x.to_owned()
    };
    let py = if param_names.contains(y) {
        fresh_name(y, &mut param_names)
    } else {
        y.to_owned()
    };
    let mut params = def.params.clone();
    params.push((px.clone(), Sort::Fg));
    params.push((py.clone(), Sort::Fg));
    // Reserve, then fill: the body may reference this definition.
    let _ = out.insert(Definition {
        name: primed.clone(),
        params,
        body: Formula::False,
    });
    let body = mw_mut_formula(&px, field, &py, &def.body, defs, out, renames);
    out.defs.get_mut(&primed).unwrap().body = body;
    primed
}

fn formula_mentions_fn(
    f: &Formula,
    field: &str,
    defs: &DefinitionSet,
    visiting: &mut BTreeSet<String>,
) -> bool {
    fn term_mentions(
        t: &Term,
        field: &str,
        defs: &DefinitionSet,
        visiting: &mut BTreeSet<String>,
    ) -> bool {
        match t {
            Term::App(f, args) => {
                f == field || args.iter().any(|a| term_mentions(a, field, defs, visiting))
            }
            Term::Add(a, b) | Term::Sub(a, b) | Term::Union(a, b) | Term::Inter(a, b) => {
                term_mentions(a, field, defs, visiting) || term_mentions(b, field, defs, visiting)
            }
            Term::Compl(a) | Term::SpT(a) => term_mentions(a, field, defs, visiting),
            Term::Ite(g, a, b) => {
                formula_mentions_fn(g, field, defs, visiting)
                    || term_mentions(a, field, defs, visiting)
                    || term_mentions(b, field, defs, visiting)
            }
            Term::SpF(f) => formula_mentions_fn(f, field, defs, visiting),
            _ => false,
        }
    }
    match f {
        Formula::True | Formula::False => false,
        Formula::Eq(a, b) => {
            term_mentions(a, field, defs, visiting) || term_mentions(b, field, defs, visiting)
        }
        Formula::Rel(_, args) => args.iter().any(|a| term_mentions(a, field, defs, visiting)),
        Formula::Ind(name, args) => {
            if args.iter().any(|a| term_mentions(a, field, defs, visiting)) {
                return true;
            }
            if visiting.contains(name) {
                return false;
            }
            visiting.insert(name.to_owned());
            match defs.get(name) {
                Some(d) => formula_mentions_fn(&d.body, field, defs, visiting),
                None => false,
            }
        }
        Formula::And(a, b) => {
            formula_mentions_fn(a, field, defs, visiting)
                || formula_mentions_fn(b, field, defs, visiting)
        }
        Formula::Not(a) => formula_mentions_fn(a, field, defs, visiting),
        Formula::Ite(g, a, b) => {
            formula_mentions_fn(g, field, defs, visiting)
                || formula_mentions_fn(a, field, defs, visiting)
                || formula_mentions_fn(b, field, defs, visiting)
        }
        Formula::Exists { guard, body, .. } => {
            formula_mentions_fn(guard, field, defs, visiting)
                || formula_mentions_fn(body, field, defs, visiting)
        }
    }
}

// ---------------------------------------------------------------------------
// Allocation transformer
// ---------------------------------------------------------------------------

struct AllocCtx<'a> {
    sig: &'a Signature,
    defs: &'a DefinitionSet,
    v: String,
    out: DefinitionSet,
    /// Primed names for recursive definitions evaluated in the post-state.
    def_renames: BTreeMap<String, String>,
    /// Generated post-state support relations, keyed structurally.
    rel_names: BTreeMap<HallocKey, String>,
    ambient: Vec<(String, Sort)>,
    z: String,
    counter: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum HallocKey {
    F(Formula),
    T(Term),
}

/// Evaluates a postcondition of `alloc(x)` in the pre-state: the fresh cell
/// is named by `v`, every field application checks for it and yields the
/// field's default, allocatable-set membership excludes it, and support
/// membership is replaced by generated relations describing the post-state
/// support without the fresh cell. Recursive definitions become primed
/// variants transformed the same way.
pub fn mw_alloc(
    sig: &Signature,
    x: &str,
    v: &str,
    beta: &Formula,
    defs: &DefinitionSet,
) -> Result<(Formula, DefinitionSet), HoareError> {
    // beta[v/x] first; the remaining rewrite never reintroduces x.
    let mut map = BTreeMap::new();
    map.insert(x.to_owned(), Term::var(v));
    let beta = substitute(beta, &map);

    let mut renamed_defs = DefinitionSet::new();
    for d in defs.iter() {
        let _ = renamed_defs.insert(d.clone());
    }

    let mut used: BTreeSet<String> = free_vars(&beta).into_iter().map(|(n, _)| n).collect();
    used.extend(crate::ast::bound_vars(&beta).into_iter().map(|(n, _)| n));
    used.insert(v.to_owned());
    // The fresh-cell variable is a parameter of everything generated below.
    let mut ambient: Vec<(String, Sort)> = vec![(v.to_owned(), Sort::Fg)];
    for nv in free_vars(&beta) {
        if nv.0 != v {
            ambient.push(nv);
        }
    }
    for d in defs.iter() {
        for (p, s) in &d.params {
            if used.insert(p.clone()) {
                ambient.push((p.clone(), *s));
            }
        }
        for (b, s) in crate::ast::bound_vars(&d.body) {
            if used.insert(b.clone()) {
                ambient.push((b, s));
            }
        }
    }
    let z = fresh_name("z", &mut used);

    let mut ctx = AllocCtx {
        sig,
        defs: &renamed_defs,
        v: v.to_owned(),
        out: defs.clone(),
        def_renames: BTreeMap::new(),
        rel_names: BTreeMap::new(),
        ambient,
        z,
        counter: 0,
    };
    let f = alloc_formula(&mut ctx, &beta)?;
    Ok((f, ctx.out))
}

fn alloc_formula(ctx: &mut AllocCtx, f: &Formula) -> Result<Formula, HoareError> {
    Ok(match f {
        Formula::True => Formula::True,
        Formula::False => Formula::False,
        Formula::Eq(a, b) => {
            if crate::ast::is_set_term(a) || crate::ast::is_set_term(b) {
                let z = ctx.z.clone();
                let zt = Term::Var(z.clone(), Sort::Fg);
                let body = match (a, b) {
                    (Term::Inter(p, q), Term::Empty) | (Term::Empty, Term::Inter(p, q)) => {
                        Formula::or(
                            Formula::not(alloc_pointwise(ctx, p, zt.clone())?),
                            Formula::not(alloc_pointwise(ctx, q, zt.clone())?),
                        )
                    }
                    (s, Term::Empty) | (Term::Empty, s) => {
                        Formula::not(alloc_pointwise(ctx, s, zt.clone())?)
                    }
                    (s1, s2) => Formula::iff(
                        alloc_pointwise(ctx, s1, zt.clone())?,
                        alloc_pointwise(ctx, s2, zt.clone())?,
                    ),
                };
                Formula::forall(&z, Sort::Fg, Formula::True, body)
            } else {
                Formula::Eq(alloc_term(ctx, a)?, alloc_term(ctx, b)?)
            }
        }
        Formula::Rel(name, args) => match name.as_str() {
            "in" if args.len() == 2 && crate::ast::is_set_term(&args[1]) => {
                // Membership in the allocatable set shrinks by the fresh
                // cell; membership in a support goes through the generated
                // relations.
                let t = alloc_term(ctx, &args[0])?;
                match &args[1] {
                    Term::Const(c) if c == AVAIL_SET => Formula::and(
                        Formula::member(t.clone(), Term::cst(AVAIL_SET)),
                        Formula::ne(t, Term::var(&ctx.v)),
                    ),
                    set => alloc_pointwise(ctx, set, t)?,
                }
            }
            "subseteq" if args.len() == 2 => {
                let z = ctx.z.clone();
                let zt = Term::Var(z.clone(), Sort::Fg);
                let body = Formula::implies(
                    alloc_pointwise(ctx, &args[0], zt.clone())?,
                    alloc_pointwise(ctx, &args[1], zt)?,
                );
                Formula::forall(&z, Sort::Fg, Formula::True, body)
            }
            _ => {
                let mut out_args = Vec::new();
                for a in args {
                    out_args.push(alloc_term(ctx, a)?);
                }
                Formula::Rel(name.clone(), out_args)
            }
        },
        Formula::Ind(name, args) => {
            let primed = alloc_def(ctx, name)?;
            let mut out_args = Vec::new();
            for a in args {
                out_args.push(alloc_term(ctx, a)?);
            }
            if primed != *name {
                out_args.push(Term::var(&ctx.v));
            }
            Formula::Ind(primed, out_args)
        }
        Formula::And(a, b) => Formula::and(alloc_formula(ctx, a)?, alloc_formula(ctx, b)?),
        Formula::Not(a) => Formula::not(alloc_formula(ctx, a)?),
        Formula::Ite(g, a, b) => Formula::ite(
            alloc_formula(ctx, g)?,
            alloc_formula(ctx, a)?,
            alloc_formula(ctx, b)?,
        ),
        Formula::Exists { var, sort, guard, body } => Formula::Exists {
            var: var.clone(),
            sort: *sort,
            guard: alloc::boxed::Box::new(alloc_formula(ctx, guard)?),
            body: alloc::boxed::Box::new(alloc_formula(ctx, body)?),
        },
    })
}

fn alloc_term(ctx: &mut AllocCtx, t: &Term) -> Result<Term, HoareError> {
    Ok(match t {
        Term::Const(_) | Term::Var(..) | Term::Int(_) | Term::Empty => t.clone(),
        Term::App(f, args) => {
            let mut out_args = Vec::new();
            for a in args {
                out_args.push(alloc_term(ctx, a)?);
            }
            if ctx.sig.is_mutable(f) && out_args.len() == 1 {
                // The fresh cell's fields read as defaults in the post-state.
                let ret = ctx.sig.funcs[f].ret;
                let default = default_term(ret);
                Term::ite(
                    Formula::eq(out_args[0].clone(), Term::var(&ctx.v)),
                    default,
                    Term::App(f.clone(), out_args),
                )
            } else {
                Term::App(f.clone(), out_args)
            }
        }
        Term::Add(a, b) => Term::add(alloc_term(ctx, a)?, alloc_term(ctx, b)?),
        Term::Sub(a, b) => Term::sub(alloc_term(ctx, a)?, alloc_term(ctx, b)?),
        Term::Ite(g, a, b) => Term::ite(
            alloc_formula(ctx, g)?,
            alloc_term(ctx, a)?,
            alloc_term(ctx, b)?,
        ),
        Term::SpF(_) | Term::SpT(_) | Term::Union(..) | Term::Inter(..) | Term::Compl(_) => {
            return Err(HoareError::UntranslatableSpPosition(format!("{t:?}")))
        }
    })
}

fn default_term(sort: Sort) -> Term {
    match sort {
        Sort::Fg => Term::nil(),
        Sort::Int => Term::Int(0),
        Sort::Bool | Sort::FgSet => Term::nil(),
    }
}

/// Pointwise reading of a set term in the post-state, as a predicate on the
/// pre-state: supports go through the generated relations.
fn alloc_pointwise(ctx: &mut AllocCtx, set: &Term, elem: Term) -> Result<Formula, HoareError> {
    Ok(match set {
        Term::SpF(f) => {
            let call = halloc_call(ctx, HallocKey::F((**f).clone()), elem)?;
            call
        }
        Term::SpT(t) => halloc_call(ctx, HallocKey::T((**t).clone()), elem)?,
        Term::Union(a, b) => Formula::or(
            alloc_pointwise(ctx, a, elem.clone())?,
            alloc_pointwise(ctx, b, elem)?,
        ),
        Term::Inter(a, b) => Formula::and(
            alloc_pointwise(ctx, a, elem.clone())?,
            alloc_pointwise(ctx, b, elem)?,
        ),
        Term::Compl(a) => Formula::not(alloc_pointwise(ctx, a, elem)?),
        Term::Empty => Formula::False,
        Term::Const(c) if c == AVAIL_SET => Formula::and(
            Formula::member(elem.clone(), Term::cst(AVAIL_SET)),
            Formula::ne(elem, Term::var(&ctx.v)),
        ),
        other => return Err(HoareError::UntranslatableSpPosition(format!("{other:?}"))),
    })
}

fn halloc_params(ctx: &AllocCtx) -> Vec<(String, Sort)> {
    let mut p = ctx.ambient.clone();
    p.push((ctx.z.clone(), Sort::Fg));
    p
}

fn halloc_call(ctx: &mut AllocCtx, key: HallocKey, elem: Term) -> Result<Formula, HoareError> {
    let name = halloc_rel(ctx, key)?;
    let mut args: Vec<Term> = ctx
        .ambient
        .iter()
        .map(|(n, s)| Term::Var(n.clone(), *s))
        .collect();
    args.push(elem);
    Ok(Formula::Ind(name, args))
}

fn halloc_call_subst(
    ctx: &mut AllocCtx,
    key: HallocKey,
    params: &[(String, Sort)],
    ts: &[Term],
    elem: Term,
) -> Result<Formula, HoareError> {
    let name = halloc_rel(ctx, key)?;
    let mut args: Vec<Term> = ctx
        .ambient
        .iter()
        .map(|(n, s)| Term::Var(n.clone(), *s))
        .collect();
    for ((p, _), t) in params.iter().zip(ts.iter()) {
        if let Some(i) = ctx.ambient.iter().position(|(n, _)| n == p) {
            args[i] = t.clone();
        }
    }
    args.push(elem);
    Ok(Formula::Ind(name, args))
}

/// Relation describing membership in the post-state support of a node, with
/// the fresh cell never included; bodies follow the support equations with
/// term values and guards transported by the allocation rewrite.
fn halloc_rel(ctx: &mut AllocCtx, key: HallocKey) -> Result<String, HoareError> {
    if let Some(n) = ctx.rel_names.get(&key) {
        return Ok(n.clone());
    }
    let name = format!("SpAl_{}", ctx.counter);
    ctx.counter += 1;
    ctx.rel_names.insert(key.clone(), name.clone());
    let _ = ctx.out.insert(Definition {
        name: name.clone(),
        params: halloc_params(ctx),
        body: Formula::False,
    });
    let body = match key {
        HallocKey::F(ref f) => halloc_body_formula(ctx, &f.clone())?,
        HallocKey::T(ref t) => halloc_body_term(ctx, &t.clone())?,
    };
    ctx.out.defs.get_mut(&name).unwrap().body = body;
    Ok(name)
}

fn halloc_or(parts: Vec<Formula>) -> Formula {
    let mut parts = parts;
    match parts.len() {
        0 => Formula::False,
        1 => parts.pop().unwrap(),
        _ => {
            let mut acc = parts.remove(0);
            for p in parts {
                acc = Formula::or(acc, p);
            }
            acc
        }
    }
}

fn halloc_body_formula(ctx: &mut AllocCtx, f: &Formula) -> Result<Formula, HoareError> {
    let z = Term::Var(ctx.z.clone(), Sort::Fg);
    Ok(match f {
        Formula::True | Formula::False => Formula::False,
        Formula::Eq(a, b) => Formula::or(
            halloc_call(ctx, HallocKey::T(a.clone()), z.clone())?,
            halloc_call(ctx, HallocKey::T(b.clone()), z)?,
        ),
        Formula::Rel(_, args) => {
            let mut parts = Vec::new();
            for a in args {
                parts.push(halloc_call(ctx, HallocKey::T(a.clone()), z.clone())?);
            }
            halloc_or(parts)
        }
        Formula::Ind(name, args) => {
            let def = ctx
                .defs
                .get(name)
                .ok_or_else(|| HoareError::Eval(EvalError::MissingDefinition(name.clone())))?
                .clone();
            let mut ts = Vec::new();
            for a in args {
                ts.push(alloc_term(ctx, a)?);
            }
            let mut parts = vec![halloc_call_subst(
                ctx,
                HallocKey::F(def.body.clone()),
                &def.params,
                &ts,
                z.clone(),
            )?];
            for a in args {
                parts.push(halloc_call(ctx, HallocKey::T(a.clone()), z.clone())?);
            }
            halloc_or(parts)
        }
        Formula::And(a, b) => Formula::or(
            halloc_call(ctx, HallocKey::F((**a).clone()), z.clone())?,
            halloc_call(ctx, HallocKey::F((**b).clone()), z)?,
        ),
        Formula::Not(a) => halloc_call(ctx, HallocKey::F((**a).clone()), z)?,
        Formula::Ite(g, a, b) => {
            let pg = halloc_call(ctx, HallocKey::F((**g).clone()), z.clone())?;
            let pa = halloc_call(ctx, HallocKey::F((**a).clone()), z.clone())?;
            let pb = halloc_call(ctx, HallocKey::F((**b).clone()), z)?;
            Formula::or(pg, Formula::ite(alloc_formula(ctx, g)?, pa, pb))
        }
        Formula::Exists { var, sort, guard, body } => {
            let pg = halloc_call(ctx, HallocKey::F((**guard).clone()), z.clone())?;
            let pb = halloc_call(ctx, HallocKey::F((**body).clone()), z)?;
            let mg = alloc_formula(ctx, guard)?;
            Formula::exists(
                var,
                *sort,
                mg.clone(),
                Formula::or(pg, Formula::and(mg, pb)),
            )
        }
    })
}

fn halloc_body_term(ctx: &mut AllocCtx, t: &Term) -> Result<Formula, HoareError> {
    let z = Term::Var(ctx.z.clone(), Sort::Fg);
    Ok(match t {
        Term::Const(_) | Term::Var(..) | Term::Int(_) | Term::Empty => Formula::False,
        Term::App(f, args) => {
            let mut parts = Vec::new();
            if ctx.sig.is_mutable(f) {
                let fsig = ctx.sig.funcs[f].clone();
                for (a, s) in args.iter().zip(fsig.args.iter()) {
                    if *s == Sort::Fg {
                        let ta = alloc_term(ctx, a)?;
                        parts.push(Formula::eq(z.clone(), ta));
                    }
                }
            }
            for a in args {
                parts.push(halloc_call(ctx, HallocKey::T(a.clone()), z.clone())?);
            }
            let disjuncts = halloc_or(parts);
            if ctx.sig.is_mutable(f) {
                // Conjoining the transported tautology keeps the pre-state
                // support of this relation equal to the post-state support
                // of the application (minus the fresh cell).
                let app = Term::App(f.clone(), args.to_vec());
                let taut = alloc_formula(ctx, &Formula::eq(app.clone(), app))?;
                Formula::and(disjuncts, taut)
            } else {
                disjuncts
            }
        }
        Term::Add(a, b) | Term::Sub(a, b) | Term::Union(a, b) | Term::Inter(a, b) => Formula::or(
            halloc_call(ctx, HallocKey::T((**a).clone()), z.clone())?,
            halloc_call(ctx, HallocKey::T((**b).clone()), z)?,
        ),
        Term::Compl(a) => halloc_call(ctx, HallocKey::T((**a).clone()), z)?,
        Term::Ite(g, a, b) => {
            let pg = halloc_call(ctx, HallocKey::F((**g).clone()), z.clone())?;
            let pa = halloc_call(ctx, HallocKey::T((**a).clone()), z.clone())?;
            let pb = halloc_call(ctx, HallocKey::T((**b).clone()), z)?;
            Formula::or(pg, Formula::ite(alloc_formula(ctx, g)?, pa, pb))
        }
        Term::SpF(f) => halloc_call(ctx, HallocKey::F((**f).clone()), z)?,
        Term::SpT(inner) => halloc_call(ctx, HallocKey::T((**inner).clone()), z)?,
    })
}

/// Primed variant of a recursive definition evaluated in the post-state of
/// an allocation.
fn alloc_def(ctx: &mut AllocCtx, name: &str) -> Result<String, HoareError> {
    if let Some(n) = ctx.def_renames.get(name) {
        return Ok(n.clone());
    }
    let Some(def) = ctx.defs.get(name).cloned() else {
        return Ok(name.to_owned());
    };
    let primed = {
        let mut used: BTreeSet<String> = ctx.out.defs.keys().cloned().collect();
        fresh_name(name, &mut used)
    };
    ctx.def_renames.insert(name.to_owned(), primed.clone());
    let mut params = def.params.clone();
    params.push((ctx.v.clone(), Sort::Fg));
    let _ = ctx.out.insert(Definition {
        name: primed.clone(),
        params,
        body: Formula::False,
    });
    let body = alloc_formula(ctx, &def.body)?;
    ctx.out.defs.get_mut(&primed).unwrap().body = body;
    Ok(primed)
}

// ---------------------------------------------------------------------------
// Weakest tightest preconditions
// ---------------------------------------------------------------------------

/// Result of a precondition computation: the formula plus any definitions
/// generated by the transformers.
#[derive(Debug, Clone)]
pub struct WtpResult {
    pub pre: Formula,
    pub defs: DefinitionSet,
}

/// The weakest tightest precondition of `post` under one statement, or a
/// loop-free composite (sequences fold right to left; conditionals produce a
/// guarded conditional of the branch preconditions).
pub fn wtp(
    sig: &Signature,
    defs: &DefinitionSet,
    stmt: &Stmt,
    post: &Formula,
) -> Result<WtpResult, HoareError> {
    match stmt {
        Stmt::Skip => Ok(WtpResult { pre: post.clone(), defs: defs.clone() }),
        Stmt::AssignVar { x, y } => {
            let mut map = BTreeMap::new();
            map.insert(x.clone(), Term::var(y));
            Ok(WtpResult { pre: substitute(post, &map), defs: defs.clone() })
        }
        Stmt::AssignConst { x, c } => {
            let mut map = BTreeMap::new();
            map.insert(x.clone(), c.clone());
            Ok(WtpResult { pre: substitute(post, &map), defs: defs.clone() })
        }
        Stmt::AssignBg { v, expr } => {
            let mut map = BTreeMap::new();
            map.insert(v.clone(), expr.clone());
            Ok(WtpResult { pre: substitute(post, &map), defs: defs.clone() })
        }
        Stmt::Lookup { x, y, field } => {
            // exists x' : x' = f(y). (post && y in Sp(post))[x'/x]
            let mut fresh = FreshNames::for_formula(post);
            fresh.also(defs);
            fresh.used.insert(x.clone());
            fresh.used.insert(y.clone());
            let xp = fresh.fresh(x);
            let body = Formula::and(
                post.clone(),
                Formula::member(Term::var(y), Term::sp(post.clone())),
            );
            let mut map = BTreeMap::new();
            map.insert(x.clone(), Term::var(&xp));
            let body = substitute(&body, &map);
            let guard = Formula::eq(Term::var(&xp), Term::app1(field, Term::var(y)));
            Ok(WtpResult {
                pre: Formula::exists(&xp, Sort::Fg, guard, body),
                defs: defs.clone(),
            })
        }
        Stmt::Mutate { x, field, y } => {
            let beta = Formula::and(
                post.clone(),
                Formula::member(Term::var(x), Term::sp(post.clone())),
            );
            let (pre, defs) = mw_mutation(x, field, y, &beta, defs);
            Ok(WtpResult { pre, defs })
        }
        Stmt::Alloc { x } => {
            // forall v : v in U. (v != nil => MW(post))
            let mut fresh = FreshNames::for_formula(post);
            fresh.also(defs);
            fresh.used.insert(x.clone());
            let v = fresh.fresh("v");
            let (mw, defs) = mw_alloc(sig, x, &v, post, defs)?;
            let body = Formula::implies(Formula::ne(Term::var(&v), Term::nil()), mw);
            let guard = Formula::member(Term::var(&v), Term::cst(AVAIL_SET));
            Ok(WtpResult {
                pre: Formula::forall(&v, Sort::Fg, guard, body),
                defs,
            })
        }
        Stmt::Free { x } => {
            // post && x not in Sp(post) && f(x) = f(x) for the first unary
            // mutable field.
            let field = sig
                .mutable_fns()
                .find(|f| sig.funcs[*f].args.len() == 1)
                .ok_or_else(|| {
                    HoareError::RestrictedFragment("no unary mutable function".to_owned())
                })?
                .to_owned();
            let fx = Term::app1(&field, Term::var(x));
            let pre = Formula::and(
                Formula::and(
                    post.clone(),
                    Formula::not(Formula::member(Term::var(x), Term::sp(post.clone()))),
                ),
                Formula::eq(fx.clone(), fx),
            );
            Ok(WtpResult { pre, defs: defs.clone() })
        }
        Stmt::Seq(stmts) => {
            let mut cur = WtpResult { pre: post.clone(), defs: defs.clone() };
            for s in stmts.iter().rev() {
                cur = wtp(sig, &cur.defs, s, &cur.pre)?;
            }
            Ok(cur)
        }
        Stmt::If { cond, then_branch, else_branch } => {
            let t = wtp(sig, defs, then_branch, post)?;
            let e = wtp(sig, &t.defs, else_branch, post)?;
            Ok(WtpResult {
                pre: Formula::ite(cond.clone(), t.pre, e.pre),
                defs: e.defs,
            })
        }
        Stmt::While { .. } => Err(HoareError::RequiresInvariant),
    }
}

// ---------------------------------------------------------------------------
// Verification conditions
// ---------------------------------------------------------------------------

/// Kinds of proof obligation produced by the generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObligationKind {
    /// `lhs` implies `rhs` in every bounded model.
    Implication { lhs: Formula, rhs: Formula },
    /// Wherever `lhs` holds, the supports of `lhs` and `rhs` coincide (the
    /// side condition of strengthening a precondition).
    SupportEq { lhs: Formula, rhs: Formula },
    /// The supports of the two formulas are disjoint in every bounded model
    /// where both hold.
    SupportDisjoint { lhs: Formula, rhs: Formula },
    /// Variables written by the program stay out of the frame.
    FrameSideCondition { program_vars: BTreeSet<String>, frame_vars: BTreeSet<String> },
}

/// One proof obligation with its provenance.
#[derive(Debug, Clone)]
pub struct Obligation {
    pub id: u32,
    pub kind: ObligationKind,
    /// Rule name and program point.
    pub provenance: String,
    /// Definitions the formulas depend on (originals plus generated).
    pub defs: DefinitionSet,
}

/// Generates the verification conditions of an annotated triple: the
/// precondition entails the weakest precondition through each loop-free
/// segment, and every loop contributes preservation and exit obligations for
/// its invariant. Each entailment carries a support-equality side condition.
pub fn vc_gen(triple: &Triple) -> Result<Vec<Obligation>, HoareError> {
    let mut obligations = Vec::new();
    let mut next_id = 0u32;
    let top = vc_stmt(
        &triple.sig,
        &triple.defs,
        &triple.program,
        &triple.post,
        &mut obligations,
        &mut next_id,
        "post",
    )?;
    push_entailment(
        &mut obligations,
        &mut next_id,
        triple.pre.clone(),
        top.pre,
        &top.defs,
        "initiation",
    );
    Ok(obligations)
}

fn push_entailment(
    obligations: &mut Vec<Obligation>,
    next_id: &mut u32,
    lhs: Formula,
    rhs: Formula,
    defs: &DefinitionSet,
    provenance: &str,
) {
    obligations.push(Obligation {
        id: *next_id,
        kind: ObligationKind::Implication { lhs: lhs.clone(), rhs: rhs.clone() },
        provenance: format!("{provenance}/implication"),
        defs: defs.clone(),
    });
    *next_id += 1;
    obligations.push(Obligation {
        id: *next_id,
        kind: ObligationKind::SupportEq { lhs, rhs },
        provenance: format!("{provenance}/support"),
        defs: defs.clone(),
    });
    *next_id += 1;
}

fn vc_stmt(
    sig: &Signature,
    defs: &DefinitionSet,
    stmt: &Stmt,
    post: &Formula,
    obligations: &mut Vec<Obligation>,
    next_id: &mut u32,
    at: &str,
) -> Result<WtpResult, HoareError> {
    match stmt {
        Stmt::While { cond, invariant, body } => {
            let inv = invariant.clone().ok_or(HoareError::RequiresInvariant)?;
            // Preservation: inv && cond entails the body's precondition for
            // inv.
            let body_pre = vc_stmt(sig, defs, body, &inv, obligations, next_id, "loop-body")?;
            push_entailment(
                obligations,
                next_id,
                Formula::and(inv.clone(), cond.clone()),
                body_pre.pre,
                &body_pre.defs,
                &format!("{at}/preservation"),
            );
            // Exit: inv && !cond entails the continuation postcondition.
            push_entailment(
                obligations,
                next_id,
                Formula::and(inv.clone(), Formula::not(cond.clone())),
                post.clone(),
                &body_pre.defs,
                &format!("{at}/exit"),
            );
            Ok(WtpResult { pre: inv, defs: body_pre.defs })
        }
        Stmt::Seq(stmts) => {
            let mut cur = WtpResult { pre: post.clone(), defs: defs.clone() };
            for (i, s) in stmts.iter().enumerate().rev() {
                cur = vc_stmt(
                    sig,
                    &cur.defs,
                    s,
                    &cur.pre.clone(),
                    obligations,
                    next_id,
                    &format!("{at}/seq[{i}]"),
                )?;
            }
            Ok(cur)
        }
        Stmt::If { cond, then_branch, else_branch } => {
            let t = vc_stmt(sig, defs, then_branch, post, obligations, next_id, &format!("{at}/then"))?;
            let e = vc_stmt(sig, &t.defs, else_branch, post, obligations, next_id, &format!("{at}/else"))?;
            Ok(WtpResult {
                pre: Formula::ite(cond.clone(), t.pre, e.pre),
                defs: e.defs,
            })
        }
        basic => wtp(sig, defs, basic, post),
    }
}

/// Side conditions of framing `frame` around `{_} program {_}`: the frame's
/// support must be disjoint from the precondition's and the program must not
/// write the frame's variables.
pub fn frame_obligations(
    pre: &Formula,
    program: &Stmt,
    frame: &Formula,
    defs: &DefinitionSet,
) -> Vec<Obligation> {
    let frame_vars: BTreeSet<String> = free_vars(frame).into_iter().map(|(n, _)| n).collect();
    vec![
        Obligation {
            id: 0,
            kind: ObligationKind::SupportDisjoint { lhs: pre.clone(), rhs: frame.clone() },
            provenance: "frame/disjoint-support".to_owned(),
            defs: defs.clone(),
        },
        Obligation {
            id: 1,
            kind: ObligationKind::FrameSideCondition {
                program_vars: program.vars(),
                frame_vars,
            },
            provenance: "frame/variables".to_owned(),
            defs: defs.clone(),
        },
    ]
}

/// Verdict of a bounded check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Invalid(Counterexample),
    /// Fuel ran out on some execution path.
    Inconclusive(String),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

/// A failing configuration with a description of what went wrong.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub config: Configuration,
    pub reason: String,
}

/// Models of a signature at the given bounds, varying mutable functions.
fn models_at(
    sig: &alloc::sync::Arc<Signature>,
    bounds: &Bounds,
) -> Result<Vec<PreModel>, HoareError> {
    bounds.check()?;
    let mut out = Vec::new();
    for fg in 1..=bounds.fg_size {
        out.extend(
            enumerate_pre_models(sig.clone(), fg, bounds.int_range, &EnumFilter::mutables())
                .map_err(HoareError::Model)?,
        );
    }
    Ok(out)
}

/// Bounded check of one obligation over every model of the signature with
/// every assignment of the given variables (and every allocatable set where
/// the formulas mention it).
pub fn check_obligation(
    sig: &alloc::sync::Arc<Signature>,
    vars: &[(String, Sort)],
    ob: &Obligation,
    bounds: &Bounds,
) -> Result<Verdict, HoareError> {
    let needs_avail = match &ob.kind {
        ObligationKind::Implication { lhs, rhs }
        | ObligationKind::SupportEq { lhs, rhs }
        | ObligationKind::SupportDisjoint { lhs, rhs } => {
            mentions_avail(lhs) || mentions_avail(rhs)
        }
        ObligationKind::FrameSideCondition { .. } => false,
    };
    if let ObligationKind::FrameSideCondition { program_vars, frame_vars } = &ob.kind {
        let overlap: Vec<&String> = program_vars.intersection(frame_vars).collect();
        if overlap.is_empty() {
            return Ok(Verdict::Valid);
        }
        return Ok(Verdict::Invalid(Counterexample {
            config: Configuration::new(
                PreModel::new(sig.clone(), 1, bounds.int_range)?,
                Assignment::new(),
                ElemSet::EMPTY,
                ElemSet::EMPTY,
            ),
            reason: format!("program writes frame variables {overlap:?}"),
        }));
    }
    for model in models_at(sig, bounds)? {
        let avail_choices: Vec<ElemSet> = if needs_avail {
            ElemSet::full(model.fg_size)
                .diff(ElemSet::singleton(model.nil()))
                .subsets()
                .collect()
        } else {
            vec![ElemSet::EMPTY]
        };
        for avail in avail_choices {
            let mut m = model.clone();
            m.set_avail(avail);
            let fm = frame_model(&m, &ob.defs)?;
            let var_domains: Vec<Vec<Value>> =
                vars.iter().map(|(_, s)| m.domain_values(*s)).collect();
            let mut ok = check_on_model(&fm, vars, &var_domains, ob, avail)?;
            if let Some(nu) = ok.take() {
                return Ok(Verdict::Invalid(Counterexample {
                    config: Configuration::new(m, nu, ElemSet::EMPTY, avail),
                    reason: format!("obligation {} fails", ob.provenance),
                }));
            }
        }
    }
    Ok(Verdict::Valid)
}

fn mentions_avail(f: &Formula) -> bool {
    formula_mentions_const(f, AVAIL_SET)
}

fn formula_mentions_const(f: &Formula, name: &str) -> bool {
    fn term_has(t: &Term, name: &str) -> bool {
        match t {
            Term::Const(c) => c == name,
            Term::App(_, args) => args.iter().any(|a| term_has(a, name)),
            Term::Add(a, b) | Term::Sub(a, b) | Term::Union(a, b) | Term::Inter(a, b) => {
                term_has(a, name) || term_has(b, name)
            }
            Term::Compl(a) | Term::SpT(a) => term_has(a, name),
            Term::Ite(g, a, b) => {
                formula_mentions_const(g, name) || term_has(a, name) || term_has(b, name)
            }
            Term::SpF(f) => formula_mentions_const(f, name),
            _ => false,
        }
    }
    match f {
        Formula::True | Formula::False => false,
        Formula::Eq(a, b) => term_has(a, name) || term_has(b, name),
        Formula::Rel(_, args) | Formula::Ind(_, args) => args.iter().any(|a| term_has(a, name)),
        Formula::And(a, b) => formula_mentions_const(a, name) || formula_mentions_const(b, name),
        Formula::Not(a) => formula_mentions_const(a, name),
        Formula::Ite(g, a, b) => {
            formula_mentions_const(g, name)
                || formula_mentions_const(a, name)
                || formula_mentions_const(b, name)
        }
        Formula::Exists { guard, body, .. } => {
            formula_mentions_const(guard, name) || formula_mentions_const(body, name)
        }
    }
}

fn check_on_model(
    fm: &FrameModel,
    vars: &[(String, Sort)],
    var_domains: &[Vec<Value>],
    ob: &Obligation,
    _avail: ElemSet,
) -> Result<Option<Assignment>, HoareError> {
    let mut digits = vec![0usize; vars.len()];
    loop {
        let nu: Assignment = vars
            .iter()
            .enumerate()
            .map(|(i, (n, _))| (n.clone(), var_domains[i][digits[i]]))
            .collect();
        let holds = match &ob.kind {
            ObligationKind::Implication { lhs, rhs } => {
                !fm.eval(&nu, lhs)? || fm.eval(&nu, rhs)?
            }
            ObligationKind::SupportEq { lhs, rhs } => {
                // Conditional on the left side: that is what validity of the
                // strengthened triple consumes.
                !fm.eval(&nu, lhs)? || fm.support(&nu, lhs)? == fm.support(&nu, rhs)?
            }
            ObligationKind::SupportDisjoint { lhs, rhs } => {
                let both = fm.eval(&nu, lhs)? && fm.eval(&nu, rhs)?;
                !both || fm.support(&nu, lhs)?.inter(fm.support(&nu, rhs)?).is_empty()
            }
            ObligationKind::FrameSideCondition { .. } => true,
        };
        if !holds {
            return Ok(Some(nu));
        }
        // Advance.
        let mut i = vars.len();
        let mut wrapped = vars.is_empty();
        while i > 0 {
            i -= 1;
            digits[i] += 1;
            if digits[i] < var_domains[i].len() {
                break;
            }
            digits[i] = 0;
            if i == 0 {
                wrapped = true;
            }
        }
        if wrapped {
            return Ok(None);
        }
    }
}

/// Bounded verification through the generated obligations: every obligation
/// must hold in every bounded model.
pub fn verify(triple: &Triple, bounds: &Bounds) -> Result<(Vec<(Obligation, Verdict)>, Verdict), HoareError> {
    check_fragment(&triple.sig, &triple.pre)?;
    check_fragment(&triple.sig, &triple.post)?;
    let obligations = vc_gen(triple)?;
    let mut results = Vec::new();
    let mut overall = Verdict::Valid;
    for ob in obligations {
        let v = check_obligation(&triple.sig, &triple.vars, &ob, bounds)?;
        if !v.is_valid() && overall.is_valid() {
            overall = v.clone();
        }
        results.push((ob, v));
    }
    Ok((results, overall))
}

// ---------------------------------------------------------------------------
// Operational triple checking
// ---------------------------------------------------------------------------

/// Enumerates the valid tight configurations of a formula: model and store
/// within bounds, heaplet exactly the support, every compatible allocatable
/// set.
pub fn tight_configs(
    sig: &alloc::sync::Arc<Signature>,
    vars: &[(String, Sort)],
    defs: &DefinitionSet,
    formula: &Formula,
    bounds: &Bounds,
) -> Result<Vec<Configuration>, HoareError> {
    let all = enumerate_configs(
        sig.clone(),
        vars,
        bounds,
        &EnumFilter::mutables(),
        defs,
        None,
    )?;
    let mut out = Vec::new();
    for cfg in all {
        let fm = frame_model(&cfg.eval_model(), defs)?;
        if !fm.eval(&cfg.store, formula)? {
            continue;
        }
        if fm.support(&cfg.store, formula)? != cfg.heap {
            continue;
        }
        out.push(cfg);
    }
    Ok(out)
}

/// Direct bounded check of triple validity: every valid configuration
/// satisfying the precondition with tight heaplet runs without aborting, and
/// every final configuration satisfies the postcondition with tight heaplet.
/// Stuck executions impose no postcondition obligation.
pub fn check_triple(triple: &Triple, bounds: &Bounds) -> Result<Verdict, HoareError> {
    let starts = tight_configs(&triple.sig, &triple.vars, &triple.defs, &triple.pre, bounds)?;
    for cfg in starts {
        let r = run_collect(&cfg, &triple.program, bounds.fuel)?;
        if r.fuel_exhausted {
            return Ok(Verdict::Inconclusive("fuel exhausted".to_owned()));
        }
        if r.abort {
            return Ok(Verdict::Invalid(Counterexample {
                config: cfg,
                reason: "execution aborts".to_owned(),
            }));
        }
        for fin in r.finals {
            let fm = frame_model(&fin.eval_model(), &triple.defs)?;
            if !fm.eval(&fin.store, &triple.post)? {
                return Ok(Verdict::Invalid(Counterexample {
                    config: cfg,
                    reason: "final state violates the postcondition".to_owned(),
                }));
            }
            if fm.support(&fin.store, &triple.post)? != fin.heap {
                return Ok(Verdict::Invalid(Counterexample {
                    config: cfg,
                    reason: "final heaplet is not the postcondition support".to_owned(),
                }));
            }
        }
    }
    Ok(Verdict::Valid)
}

/// Exact-precondition check: the tight configurations of the generated
/// precondition must equal the preconfigurations of the tight postcondition
/// configurations (predecessors under the statement, plus stuck
/// configurations, which carry the empty heaplet: a stuck execution
/// dereferences nothing).
pub fn check_wtp_property(
    sig: &alloc::sync::Arc<Signature>,
    vars: &[(String, Sort)],
    defs: &DefinitionSet,
    stmt: &Stmt,
    post: &Formula,
    bounds: &Bounds,
) -> Result<Verdict, HoareError> {
    assert!(stmt.is_basic(), "exactness checks cover basic commands");
    let w = wtp(sig, defs, stmt, post)?;
    let lhs: BTreeSet<Configuration> =
        tight_configs(sig, vars, &w.defs, &w.pre, bounds)?.into_iter().collect();

    // Right-hand side: preconfigurations.
    let posts: BTreeSet<Configuration> =
        tight_configs(sig, vars, defs, post, bounds)?.into_iter().collect();
    let all = enumerate_configs(
        sig.clone(),
        vars,
        bounds,
        &EnumFilter::mutables(),
        defs,
        None,
    )?;
    let mut rhs: BTreeSet<Configuration> = BTreeSet::new();
    for cfg in all {
        let r = run_collect(&cfg, stmt, bounds.fuel)?;
        if r.stuck && cfg.heap.is_empty() {
            rhs.insert(cfg.clone());
            continue;
        }
        if r.abort {
            continue;
        }
        if r.finals.iter().any(|f| posts.contains(f)) {
            rhs.insert(cfg);
        }
    }

    if lhs == rhs {
        return Ok(Verdict::Valid);
    }
    let missing = lhs.symmetric_difference(&rhs).next().unwrap().clone();
    let side = if lhs.contains(&missing) { "only tight precondition" } else { "only preconfiguration" };
    Ok(Verdict::Invalid(Counterexample {
        config: missing,
        reason: format!("precondition exactness fails ({side})"),
    }))
}
