//! Translation of support expressions into ordinary recursive relations.
//!
//! Every support-carrying subformula or subterm `b` gets a relation
//! `Sp_k(ys, z)` over the whole ambient variable list `ys`, holding exactly
//! when `z` lies in the support of `b` under the assignment of `ys`. Set
//! atoms over supports become first-order formulas over these relations:
//! membership turns into an application, inclusion and equality into
//! universally quantified implications, and emptiness of an intersection
//! into a universally quantified disjunction of negations. The result is a
//! program with no support expressions and no set sort, evaluated by a
//! demand-driven stratified least-fixpoint interpreter.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::ast::{
    alpha_normalize_with, bound_vars, free_vars, fresh_name, substitute, AstError, Definition,
    DefinitionSet, Formula, Signature, Sort, Term,
};
use crate::model::{Assignment, PreModel, Value};
use crate::semantics::EvalError;

/// Errors from translation and evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FordError {
    /// A support expression sits in a position with no sound rewrite.
    UntranslatableSpPosition(String),
    Ast(AstError),
    Eval(EvalError),
}

impl fmt::Display for FordError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FordError::UntranslatableSpPosition(m) => {
                write!(f, "support expression in untranslatable position: {m}")
            }
            FordError::Ast(e) => write!(f, "{e}"),
            FordError::Eval(e) => write!(f, "{e}"),
        }
    }
}

impl From<AstError> for FordError {
    fn from(e: AstError) -> Self {
        FordError::Ast(e)
    }
}

impl From<EvalError> for FordError {
    fn from(e: EvalError) -> Self {
        FordError::Eval(e)
    }
}

/// Structural identity of a subformula or subterm after global renaming.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum NodeKey {
    F(Formula),
    T(Term),
}

/// A translated program: the original definitions with supports rewritten,
/// the generated support relations, and the translated main formula.
#[derive(Debug, Clone)]
pub struct FordProgram {
    /// All definitions: rewritten originals plus generated support relations.
    pub defs: DefinitionSet,
    /// The main formula; free of support expressions and the set sort.
    pub main: Formula,
    /// The renamed-apart query the program was generated from.
    pub query: Formula,
    /// The renamed-apart source definitions.
    pub source_defs: DefinitionSet,
    /// The ambient variable list shared by every generated relation.
    pub ambient: Vec<(String, Sort)>,
    /// Names of the generated support relations.
    pub generated: BTreeSet<String>,
    node_rels: BTreeMap<NodeKey, String>,
}

impl FordProgram {
    /// The support relation generated for a (renamed) subformula, if any.
    pub fn relation_for(&self, node: &Formula) -> Option<&str> {
        self.node_rels
            .get(&NodeKey::F(node.clone()))
            .map(|s| s.as_str())
    }

    pub fn relation_for_term(&self, node: &Term) -> Option<&str> {
        self.node_rels
            .get(&NodeKey::T(node.clone()))
            .map(|s| s.as_str())
    }
}

struct Gen<'a> {
    defs: &'a DefinitionSet,
    mutables: BTreeSet<String>,
    ambient: Vec<(String, Sort)>,
    z: String,
    out: DefinitionSet,
    names: BTreeMap<NodeKey, String>,
    frees: BTreeMap<NodeKey, BTreeSet<String>>,
    counter: u32,
    used_names: BTreeSet<String>,
}

impl<'a> Gen<'a> {
    fn params(&self) -> Vec<(String, Sort)> {
        let mut p = self.ambient.clone();
        p.push((self.z.clone(), Sort::Fg));
        p
    }

    fn zvar(&self) -> Term {
        Term::Var(self.z.clone(), Sort::Fg)
    }

    fn fresh_quant(&mut self) -> String {
        fresh_name("z", &mut self.used_names)
    }

    /// Free variables of a node, cached; a relation's rows depend only on
    /// these ambient positions.
    fn node_frees(&mut self, key: &NodeKey) -> BTreeSet<String> {
        if let Some(f) = self.frees.get(key) {
            return f.clone();
        }
        let fv: BTreeSet<String> = match key {
            NodeKey::F(f) => free_vars(f).into_iter().map(|(n, _)| n).collect(),
            NodeKey::T(t) => crate::ast::free_vars_term(t)
                .into_iter()
                .map(|(n, _)| n)
                .collect(),
        };
        self.frees.insert(key.clone(), fv.clone());
        fv
    }

    fn default_arg(sort: Sort) -> Term {
        match sort {
            Sort::Fg => Term::nil(),
            Sort::Int => Term::Int(0),
            Sort::Bool | Sort::FgSet => Term::nil(),
        }
    }

    /// Call of a node's relation with `z_term` in the extra position.
    /// Ambient positions the node never reads are canonicalized to defaults:
    /// the relation's value is independent of them, and canonical calls keep
    /// the demanded row space small under recursion.
    fn call(&mut self, key: NodeKey, z_term: Term) -> Result<Formula, FordError> {
        let frees = self.node_frees(&key);
        let name = self.relation(key)?;
        let mut args: Vec<Term> = Vec::with_capacity(self.ambient.len() + 1);
        for (n, s) in &self.ambient {
            if frees.contains(n) {
                args.push(Term::Var(n.clone(), *s));
            } else {
                args.push(Self::default_arg(*s));
            }
        }
        args.push(z_term);
        Ok(Formula::Ind(name, args))
    }

    /// Call from a context where only `scope` variables are available:
    /// ambient positions outside the scope receive don't-care terms (the
    /// relation's value does not depend on positions its node never reads).
    fn call_scoped(
        &mut self,
        key: NodeKey,
        scope: &[String],
        z_term: Term,
    ) -> Result<Formula, FordError> {
        let frees = self.node_frees(&key);
        let name = self.relation(key)?;
        let mut args: Vec<Term> = Vec::with_capacity(self.ambient.len() + 1);
        for (n, sort) in &self.ambient {
            if frees.contains(n) && scope.iter().any(|v| v == n) {
                args.push(Term::Var(n.clone(), *sort));
            } else {
                args.push(Self::default_arg(*sort));
            }
        }
        args.push(z_term);
        Ok(Formula::Ind(name, args))
    }

    /// Call with the ambient positions of `params` substituted by `ts`;
    /// positions the callee reads pass through, the rest canonicalize.
    fn call_subst(
        &mut self,
        key: NodeKey,
        params: &[(String, Sort)],
        ts: &[Term],
        z_term: Term,
    ) -> Result<Formula, FordError> {
        let frees = self.node_frees(&key);
        let name = self.relation(key)?;
        let mut args: Vec<Term> = Vec::with_capacity(self.ambient.len() + 1);
        for (n, s) in &self.ambient {
            if frees.contains(n) {
                args.push(Term::Var(n.clone(), *s));
            } else {
                args.push(Self::default_arg(*s));
            }
        }
        for ((p, _), t) in params.iter().zip(ts.iter()) {
            if let Some(i) = self.ambient.iter().position(|(n, _)| n == p) {
                args[i] = t.clone();
            }
        }
        args.push(z_term);
        Ok(Formula::Ind(name, args))
    }

    /// Relation name for a node, generating its definition on first demand.
    fn relation(&mut self, key: NodeKey) -> Result<String, FordError> {
        if let Some(n) = self.names.get(&key) {
            return Ok(n.clone());
        }
        let name = format!("Sp_{}", self.counter);
        self.counter += 1;
        self.names.insert(key.clone(), name.clone());
        // Reserve the slot first: recursive nodes call back in for the same
        // key while their body is being built.
        let _ = self.out.insert(Definition {
            name: name.clone(),
            params: self.params(),
            body: Formula::False,
        });
        let body = match key {
            NodeKey::F(ref f) => self.body_of_formula(&f.clone())?,
            NodeKey::T(ref t) => self.body_of_term(&t.clone())?,
        };
        self.out.defs.get_mut(&name).unwrap().body = body;
        Ok(name)
    }

    fn or_all(mut parts: Vec<Formula>) -> Formula {
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

    fn body_of_formula(&mut self, f: &Formula) -> Result<Formula, FordError> {
        let z = self.zvar();
        Ok(match f {
            Formula::True | Formula::False => Formula::False,
            Formula::Eq(a, b) => {
                let pa = self.call(NodeKey::T(a.clone()), z.clone())?;
                let pb = self.call(NodeKey::T(b.clone()), z)?;
                Formula::or(pa, pb)
            }
            Formula::Rel(_, args) => {
                let mut parts = Vec::new();
                for a in args {
                    parts.push(self.call(NodeKey::T(a.clone()), z.clone())?);
                }
                Self::or_all(parts)
            }
            Formula::Ind(name, args) => {
                let def = self
                    .defs
                    .get(name)
                    .ok_or_else(|| {
                        FordError::Eval(EvalError::MissingDefinition(name.clone()))
                    })?
                    .clone();
                let mut parts = Vec::new();
                parts.push(self.call_subst(
                    NodeKey::F(def.body.clone()),
                    &def.params,
                    args,
                    z.clone(),
                )?);
                for a in args {
                    parts.push(self.call(NodeKey::T(a.clone()), z.clone())?);
                }
                Self::or_all(parts)
            }
            Formula::And(a, b) => {
                let pa = self.call(NodeKey::F((**a).clone()), z.clone())?;
                let pb = self.call(NodeKey::F((**b).clone()), z)?;
                Formula::or(pa, pb)
            }
            Formula::Not(a) => self.call(NodeKey::F((**a).clone()), z)?,
            Formula::Ite(g, a, b) => {
                let pg = self.call(NodeKey::F((**g).clone()), z.clone())?;
                let pa = self.call(NodeKey::F((**a).clone()), z.clone())?;
                let pb = self.call(NodeKey::F((**b).clone()), z)?;
                Formula::or(pg, Formula::ite((**g).clone(), pa, pb))
            }
            Formula::Exists { var, sort, guard, body } => {
                let pg = self.call(NodeKey::F((**guard).clone()), z.clone())?;
                let pb = self.call(NodeKey::F((**body).clone()), z)?;
                Formula::exists(
                    var,
                    *sort,
                    Formula::True,
                    Formula::or(pg, Formula::and((**guard).clone(), pb)),
                )
            }
        })
    }

    fn body_of_term(&mut self, t: &Term) -> Result<Formula, FordError> {
        let z = self.zvar();
        Ok(match t {
            Term::Const(_) | Term::Var(..) | Term::Int(_) | Term::Empty => Formula::False,
            Term::App(f, args) => {
                let mut parts = Vec::new();
                if self.mutables.contains(f) {
                    for a in args {
                        if term_is_foreground(a) {
                            parts.push(Formula::eq(z.clone(), a.clone()));
                        }
                    }
                }
                for a in args {
                    parts.push(self.call(NodeKey::T(a.clone()), z.clone())?);
                }
                Self::or_all(parts)
            }
            Term::Add(a, b) | Term::Sub(a, b) | Term::Union(a, b) | Term::Inter(a, b) => {
                let pa = self.call(NodeKey::T((**a).clone()), z.clone())?;
                let pb = self.call(NodeKey::T((**b).clone()), z)?;
                Formula::or(pa, pb)
            }
            Term::Compl(a) => self.call(NodeKey::T((**a).clone()), z)?,
            Term::Ite(g, a, b) => {
                let pg = self.call(NodeKey::F((**g).clone()), z.clone())?;
                let pa = self.call(NodeKey::T((**a).clone()), z.clone())?;
                let pb = self.call(NodeKey::T((**b).clone()), z)?;
                Formula::or(pg, Formula::ite((**g).clone(), pa, pb))
            }
            Term::SpF(f) => self.call(NodeKey::F((**f).clone()), z)?,
            Term::SpT(inner) => self.call(NodeKey::T((**inner).clone()), z)?,
        })
    }
}

/// Non-set, non-background term of the foreground sort (conservative
/// syntactic judgment used for the mutable-application case).
fn term_is_foreground(t: &Term) -> bool {
    match t {
        Term::Var(_, s) => *s == Sort::Fg,
        Term::Const(c) => c != crate::ast::AVAIL_SET,
        Term::App(..) | Term::Ite(..) => !crate::ast::is_set_term(t),
        _ => false,
    }
}

/// Shared renaming: the query and every definition body in one namespace.
struct Renamed {
    query: Formula,
    defs: DefinitionSet,
    ambient: Vec<(String, Sort)>,
    used: BTreeSet<String>,
}

fn rename_apart(formula: &Formula, defs: &DefinitionSet) -> Renamed {
    let mut used: BTreeSet<String> = free_vars(formula).iter().map(|(n, _)| n.clone()).collect();
    let query = alpha_normalize_with(formula, &mut used);
    let mut ambient: Vec<(String, Sort)> = free_vars(&query).into_iter().collect();
    ambient.extend(bound_vars(&query));
    let mut out_defs = DefinitionSet::new();
    for def in defs.iter() {
        let mut body = def.body.clone();
        let mut params = Vec::new();
        for (p, s) in &def.params {
            if used.contains(p) {
                let fresh = fresh_name(p, &mut used);
                let mut map = BTreeMap::new();
                map.insert(p.clone(), Term::Var(fresh.clone(), *s));
                body = substitute(&body, &map);
                params.push((fresh, *s));
            } else {
                used.insert(p.clone());
                params.push((p.clone(), *s));
            }
        }
        let body = alpha_normalize_with(&body, &mut used);
        ambient.extend(params.iter().cloned());
        ambient.extend(bound_vars(&body));
        let _ = out_defs.insert(Definition { name: def.name.clone(), params, body });
    }
    let mut seen = BTreeSet::new();
    ambient.retain(|(n, _)| seen.insert(n.clone()));
    Renamed { query, defs: out_defs, ambient, used }
}

/// Pointwise reading of a set term as a membership predicate on `elem`.
fn pointwise(
    gen: &mut Gen,
    scope: &mut Vec<String>,
    set_term: &Term,
    elem: Term,
) -> Result<Formula, FordError> {
    match set_term {
        Term::SpF(f) => gen.call_scoped(NodeKey::F((**f).clone()), scope, elem),
        Term::SpT(t) => gen.call_scoped(NodeKey::T((**t).clone()), scope, elem),
        Term::Union(a, b) => Ok(Formula::or(
            pointwise(gen, scope, a, elem.clone())?,
            pointwise(gen, scope, b, elem)?,
        )),
        Term::Inter(a, b) => Ok(Formula::and(
            pointwise(gen, scope, a, elem.clone())?,
            pointwise(gen, scope, b, elem)?,
        )),
        Term::Compl(a) => Ok(Formula::not(pointwise(gen, scope, a, elem)?)),
        Term::Empty => Ok(Formula::False),
        Term::Ite(g, a, b) => Ok(Formula::ite(
            translate_node(gen, scope, g)?,
            pointwise(gen, scope, a, elem.clone())?,
            pointwise(gen, scope, b, elem)?,
        )),
        other => Err(FordError::UntranslatableSpPosition(format!("{other:?}"))),
    }
}

fn is_set_typed(t: &Term) -> bool {
    crate::ast::is_set_term(t)
}

/// Structural rewrite of a formula: set atoms over supports become uses of
/// the generated relations; everything else is preserved. `scope` tracks the
/// variables visible at this point (context frees plus enclosing binders).
fn translate_node(gen: &mut Gen, scope: &mut Vec<String>, f: &Formula) -> Result<Formula, FordError> {
    match f {
        Formula::True => Ok(Formula::True),
        Formula::False => Ok(Formula::False),
        Formula::Eq(a, b) => {
            if !is_set_typed(a) && !is_set_typed(b) {
                return Ok(f.clone());
            }
            let z = gen.fresh_quant();
            let zt = Term::Var(z.clone(), Sort::Fg);
            let body = match (a, b) {
                (Term::Inter(x, y), Term::Empty) | (Term::Empty, Term::Inter(x, y)) => {
                    Formula::or(
                        Formula::not(pointwise(gen, scope, x, zt.clone())?),
                        Formula::not(pointwise(gen, scope, y, zt.clone())?),
                    )
                }
                (s, Term::Empty) | (Term::Empty, s) => {
                    Formula::not(pointwise(gen, scope, s, zt.clone())?)
                }
                (s1, s2) => Formula::iff(
                    pointwise(gen, scope, s1, zt.clone())?,
                    pointwise(gen, scope, s2, zt.clone())?,
                ),
            };
            Ok(Formula::forall(&z, Sort::Fg, Formula::True, body))
        }
        Formula::Rel(name, args) => match name.as_str() {
            "in" if args.len() == 2 && is_set_typed(&args[1]) => {
                pointwise(gen, scope, &args[1], args[0].clone())
            }
            "subseteq" if args.len() == 2 => {
                let z = gen.fresh_quant();
                let zt = Term::Var(z.clone(), Sort::Fg);
                let body = Formula::implies(
                    pointwise(gen, scope, &args[0], zt.clone())?,
                    pointwise(gen, scope, &args[1], zt)?,
                );
                Ok(Formula::forall(&z, Sort::Fg, Formula::True, body))
            }
            _ => {
                for a in args {
                    if is_set_typed(a) {
                        return Err(FordError::UntranslatableSpPosition(format!("{a:?}")));
                    }
                }
                Ok(f.clone())
            }
        },
        Formula::Ind(_, args) => {
            for a in args {
                if is_set_typed(a) {
                    return Err(FordError::UntranslatableSpPosition(format!("{a:?}")));
                }
            }
            Ok(f.clone())
        }
        Formula::And(a, b) => Ok(Formula::and(
            translate_node(gen, scope, a)?,
            translate_node(gen, scope, b)?,
        )),
        Formula::Not(a) => Ok(Formula::not(translate_node(gen, scope, a)?)),
        Formula::Ite(g, a, b) => Ok(Formula::ite(
            translate_node(gen, scope, g)?,
            translate_node(gen, scope, a)?,
            translate_node(gen, scope, b)?,
        )),
        Formula::Exists { var, sort, guard, body } => {
            scope.push(var.clone());
            let out = Formula::Exists {
                var: var.clone(),
                sort: *sort,
                guard: Box::new(translate_node(gen, scope, guard)?),
                body: Box::new(translate_node(gen, scope, body)?),
            };
            scope.pop();
            Ok(out)
        }
    }
}

/// Generates the support relations demanded by the whole input formula (its
/// root and everything reachable through definition bodies), alongside the
/// translated program.
pub fn generate_support_relations(
    sig: &Signature,
    defs: &DefinitionSet,
    formula: &Formula,
) -> Result<FordProgram, FordError> {
    build(sig, defs, formula, true)
}

/// Full translation: generated relations plus rewritten definitions and main
/// formula, all free of support expressions.
pub fn translate_formula(
    sig: &Signature,
    defs: &DefinitionSet,
    formula: &Formula,
) -> Result<FordProgram, FordError> {
    build(sig, defs, formula, false)
}

fn build(
    sig: &Signature,
    defs: &DefinitionSet,
    formula: &Formula,
    demand_root: bool,
) -> Result<FordProgram, FordError> {
    let renamed = rename_apart(formula, defs);
    let mut used = renamed.used.clone();
    let z = fresh_name("z", &mut used);
    let mut gen = Gen {
        defs: &renamed.defs,
        mutables: sig.mutable_fns().map(|s| s.to_owned()).collect(),
        ambient: renamed.ambient.clone(),
        z,
        out: DefinitionSet::new(),
        names: BTreeMap::new(),
        frees: BTreeMap::new(),
        counter: 0,
        used_names: used,
    };
    if demand_root {
        gen.relation(NodeKey::F(renamed.query.clone()))?;
    }
    let mut scope: Vec<String> = free_vars(&renamed.query)
        .into_iter()
        .map(|(n, _)| n)
        .collect();
    let main = translate_node(&mut gen, &mut scope, &renamed.query)?;
    // Rewrite the original definition bodies too: support atoms inside them
    // must disappear from the final program.
    let mut all_defs = DefinitionSet::new();
    for def in renamed.defs.iter() {
        let mut scope: Vec<String> = def.params.iter().map(|(n, _)| n.clone()).collect();
        let body = translate_node(&mut gen, &mut scope, &def.body)?;
        let _ = all_defs.insert(Definition {
            name: def.name.clone(),
            params: def.params.clone(),
            body,
        });
    }
    let generated: BTreeSet<String> = gen.out.defs.keys().cloned().collect();
    for d in gen.out.defs.values() {
        let _ = all_defs.insert(d.clone());
    }
    let Gen { names: node_rels, .. } = gen;
    Ok(FordProgram {
        defs: all_defs,
        main,
        query: renamed.query,
        source_defs: renamed.defs,
        ambient: renamed.ambient,
        generated,
        node_rels,
    })
}

// ---------------------------------------------------------------------------
// Demand-driven stratified evaluation
// ---------------------------------------------------------------------------

/// Evaluates the translated program on a finite model: least-fixpoint
/// semantics for all definitions, computed demand-driven and stratum by
/// stratum. Generated support relations never depend on the rewritten
/// originals, so negative references always point to lower strata.
pub fn eval_ford(pre: &PreModel, nu: &Assignment, prog: &FordProgram) -> Result<bool, FordError> {
    let mut ev = FordEval::new(pre, &prog.defs)?;
    let env: Vec<(String, Value)> = nu.iter().map(|(n, v)| (n.clone(), *v)).collect();
    Ok(ev.formula(&env, &prog.main)?)
}

/// Queries one relation of the translated program directly.
pub fn eval_ford_relation(
    pre: &PreModel,
    prog: &FordProgram,
    name: &str,
    args: &[Value],
) -> Result<bool, FordError> {
    let mut ev = FordEval::new(pre, &prog.defs)?;
    Ok(ev.query(name, args.to_vec())?)
}

/// Demand-driven tabled evaluator for stratified recursive programs.
///
/// Rows are keyed by an interned relation id and a packed argument tuple, so
/// table probes stay cheap even for the wide generated relations.
pub struct FordEval<'a> {
    pre: &'a PreModel,
    defs: &'a DefinitionSet,
    names: Vec<String>,
    ids: BTreeMap<String, u32>,
    param_sorts: Vec<Vec<Sort>>,
    stratum: Vec<usize>,
    memo: BTreeMap<u64, bool>,
    settled: BTreeSet<u64>,
    /// Demanded-but-unsettled keys, appended in demand order per stratum.
    pending: BTreeMap<usize, Vec<u64>>,
    /// Keys whose value changed re-enqueue their recorded readers.
    rev_deps: BTreeMap<u64, Vec<u64>>,
    worklist: BTreeMap<usize, VecDeque<u64>>,
    queued: BTreeSet<u64>,
    reads: Vec<u64>,
    recording: bool,
    solving: Vec<usize>,
}

impl<'a> FordEval<'a> {
    pub fn new(pre: &'a PreModel, defs: &'a DefinitionSet) -> Result<FordEval<'a>, EvalError> {
        let strata_by_name = compute_strata(defs)?;
        let names: Vec<String> = defs.defs.keys().cloned().collect();
        let ids: BTreeMap<String, u32> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i as u32))
            .collect();
        let mut param_sorts = Vec::new();
        let mut stratum = Vec::new();
        for n in &names {
            let d = defs.get(n).unwrap();
            let sorts: Vec<Sort> = d.params.iter().map(|(_, s)| *s).collect();
            let mut size: u128 = 1;
            for srt in &sorts {
                size *= pre.domain_size(*srt) as u128;
            }
            if size > (1u128 << 40) {
                return Err(EvalError::TableTooLarge(n.clone()));
            }
            param_sorts.push(sorts);
            stratum.push(strata_by_name[n]);
        }
        Ok(FordEval {
            pre,
            defs,
            names,
            ids,
            param_sorts,
            stratum,
            memo: BTreeMap::new(),
            settled: BTreeSet::new(),
            pending: BTreeMap::new(),
            rev_deps: BTreeMap::new(),
            worklist: BTreeMap::new(),
            queued: BTreeSet::new(),
            reads: Vec::new(),
            recording: false,
            solving: Vec::new(),
        })
    }

    fn pack(&self, rel: u32, args: &[Value]) -> Result<Option<u64>, EvalError> {
        match self.pre.pack_args(&self.param_sorts[rel as usize], args) {
            Ok(idx) => Ok(Some(((rel as u64) << 40) | idx as u64)),
            Err(_) => Ok(None),
        }
    }

    fn demand(&mut self, stratum: usize, key: u64) -> bool {
        if let Some(v) = self.memo.get(&key) {
            return *v;
        }
        self.memo.insert(key, false);
        self.pending.entry(stratum).or_default().push(key);
        false
    }

    /// Settled least-fixpoint value of `name(args)`.
    pub fn query(&mut self, name: &str, args: Vec<Value>) -> Result<bool, EvalError> {
        let rel = *self
            .ids
            .get(name)
            .ok_or_else(|| EvalError::MissingDefinition(name.to_owned()))?;
        let Some(key) = self.pack(rel, &args)? else {
            return Ok(false);
        };
        self.query_key(rel, key)
    }

    /// Evaluates one row's body, recording the same-stratum rows it read.
    /// Returns true when the row flipped to true.
    fn eval_row(&mut self, k: u64) -> Result<bool, EvalError> {
        let krel = (k >> 40) as usize;
        let kidx = (k & ((1u64 << 40) - 1)) as usize;
        // The definition set outlives the evaluator; borrowing the body here
        // avoids cloning it per row.
        let defs: &'a DefinitionSet = self.defs;
        let def = defs.get(&self.names[krel]).unwrap();
        let vals = self.pre.unpack_args(&self.param_sorts[krel], kidx);
        let mut env: Vec<(String, Value)> = def
            .params
            .iter()
            .zip(vals)
            .map(|((n, _), v)| (n.clone(), v))
            .collect();
        let saved = core::mem::take(&mut self.reads);
        let was_recording = self.recording;
        self.recording = true;
        let value = self.formula_mut(&mut env, &def.body);
        let reads = core::mem::replace(&mut self.reads, saved);
        self.recording = was_recording;
        let value = value?;
        for r in reads {
            if r != k {
                self.rev_deps.entry(r).or_default().push(k);
            }
        }
        if value && !self.memo[&k] {
            self.memo.insert(k, true);
            // Wake the readers recorded so far.
            if let Some(readers) = self.rev_deps.get(&k) {
                let readers = readers.clone();
                for r in readers {
                    self.enqueue(r);
                }
            }
            return Ok(true);
        }
        Ok(false)
    }

    fn enqueue(&mut self, k: u64) {
        if self.memo.get(&k) == Some(&true) || self.settled.contains(&k) {
            return;
        }
        if self.queued.insert(k) {
            let krel = (k >> 40) as usize;
            let s = self.stratum[krel];
            self.worklist.entry(s).or_default().push_back(k);
        }
    }

    fn query_key(&mut self, rel: u32, key: u64) -> Result<bool, EvalError> {
        if self.settled.contains(&key) {
            return Ok(self.memo[&key]);
        }
        let s = self.stratum[rel as usize];
        self.demand(s, key);
        self.solving.push(s);
        // First evaluation of each demanded row records its reads; after
        // that only rows whose inputs flipped are re-evaluated.
        let mut idx = 0;
        loop {
            let mut progressed = false;
            while idx < self.pending.get(&s).map(|v| v.len()).unwrap_or(0) {
                let k = self.pending[&s][idx];
                idx += 1;
                progressed = true;
                if self.memo[&k] {
                    continue;
                }
                self.eval_row(k)?;
            }
            while let Some(k) = self.worklist.get_mut(&s).and_then(|q| q.pop_front()) {
                self.queued.remove(&k);
                progressed = true;
                if self.memo[&k] {
                    continue;
                }
                self.eval_row(k)?;
            }
            if !progressed {
                break;
            }
        }
        if let Some(done) = self.pending.remove(&s) {
            self.settled.extend(done);
        }
        self.solving.pop();
        Ok(self.memo[&key])
    }

    /// Evaluates a formula over the program's relations under an explicit
    /// environment.
    pub fn formula(&mut self, env: &[(String, Value)], f: &Formula) -> Result<bool, EvalError> {
        let mut env = env.to_vec();
        self.formula_mut(&mut env, f)
    }

    fn formula_mut(
        &mut self,
        env: &mut Vec<(String, Value)>,
        f: &Formula,
    ) -> Result<bool, EvalError> {
        Ok(match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Eq(a, b) => match (self.term(env, a)?, self.term(env, b)?) {
                (Some(x), Some(y)) => x == y,
                _ => false,
            },
            Formula::Rel(name, args) => {
                let mut vals = Vec::new();
                for a in args {
                    match self.term(env, a)? {
                        Some(v) => vals.push(v),
                        None => return Ok(false),
                    }
                }
                match name.as_str() {
                    "in" => matches!(
                        (vals[0], vals[1]),
                        (Value::Elem(e), Value::Set(s)) if s.contains(e)
                    ),
                    "subseteq" => matches!(
                        (vals[0], vals[1]),
                        (Value::Set(a), Value::Set(b)) if a.is_subset(b)
                    ),
                    "<=" | "<" | ">=" | ">" => match (vals[0], vals[1]) {
                        (Value::Int(a), Value::Int(b)) => match name.as_str() {
                            "<=" => a <= b,
                            "<" => a < b,
                            ">=" => a >= b,
                            _ => a > b,
                        },
                        _ => false,
                    },
                    _ => self
                        .pre
                        .rels
                        .get(name)
                        .ok_or_else(|| EvalError::UnknownSymbol(name.clone()))?
                        .contains(&vals),
                }
            }
            Formula::Ind(name, args) => {
                let mut vals = Vec::new();
                for a in args {
                    match self.term(env, a)? {
                        Some(v) => vals.push(v),
                        None => return Ok(false),
                    }
                }
                let rel = *self
                    .ids
                    .get(name)
                    .ok_or_else(|| EvalError::MissingDefinition(name.clone()))?;
                let Some(key) = self.pack(rel, &vals)? else {
                    return Ok(false);
                };
                if self.settled.contains(&key) {
                    self.memo[&key]
                } else {
                    let t = self.stratum[rel as usize];
                    if self.solving.last() == Some(&t) {
                        // Same stratum: register the demand and read the
                        // table under iteration.
                        if self.recording {
                            self.reads.push(key);
                        }
                        self.demand(t, key)
                    } else {
                        // Strictly lower stratum: settle it now so negation
                        // reads a final value.
                        self.query_key(rel, key)?
                    }
                }
            }
            Formula::And(a, b) => self.formula_mut(env, a)? && self.formula_mut(env, b)?,
            Formula::Not(a) => !self.formula_mut(env, a)?,
            Formula::Ite(g, a, b) => {
                if self.formula_mut(env, g)? {
                    self.formula_mut(env, a)?
                } else {
                    self.formula_mut(env, b)?
                }
            }
            Formula::Exists { var, sort, guard, body } => {
                let mut found = false;
                env.push((var.clone(), Value::Bool(false)));
                for v in self.pre.domain_values(*sort) {
                    env.last_mut().unwrap().1 = v;
                    if self.formula_mut(env, guard)? && self.formula_mut(env, body)? {
                        found = true;
                        break;
                    }
                }
                env.pop();
                found
            }
        })
    }

    /// `None` encodes an out-of-domain integer.
    fn term(&mut self, env: &mut Vec<(String, Value)>, t: &Term) -> Result<Option<Value>, EvalError> {
        Ok(match t {
            Term::Const(c) => Some(self.pre.const_value(c).map_err(EvalError::Model)?),
            Term::Var(v, _) => Some(
                env.iter()
                    .rev()
                    .find(|(n, _)| n == v)
                    .map(|(_, val)| *val)
                    .ok_or_else(|| EvalError::UnboundVariable(v.clone()))?,
            ),
            Term::Int(i) => {
                if *i < self.pre.int_range.0 || *i > self.pre.int_range.1 {
                    None
                } else {
                    Some(Value::Int(*i))
                }
            }
            Term::App(f, args) => {
                let mut vals = Vec::new();
                for a in args {
                    match self.term(env, a)? {
                        Some(v) => vals.push(v),
                        None => return Ok(None),
                    }
                }
                Some(self.pre.lookup_fn(f, &vals).map_err(EvalError::Model)?)
            }
            Term::Add(a, b) | Term::Sub(a, b) => {
                let (Some(x), Some(y)) = (self.term(env, a)?, self.term(env, b)?) else {
                    return Ok(None);
                };
                let (Some(x), Some(y)) = (x.as_int(), y.as_int()) else {
                    return Ok(None);
                };
                let r = if matches!(t, Term::Add(..)) { x + y } else { x - y };
                if r < self.pre.int_range.0 || r > self.pre.int_range.1 {
                    None
                } else {
                    Some(Value::Int(r))
                }
            }
            Term::Ite(g, a, b) => {
                if self.formula_mut(env, g)? {
                    self.term(env, a)?
                } else {
                    self.term(env, b)?
                }
            }
            Term::SpF(_) | Term::SpT(_) | Term::Union(..) | Term::Inter(..) | Term::Compl(_)
            | Term::Empty => {
                return Err(EvalError::UnknownSymbol(
                    "set machinery in translated program".to_owned(),
                ))
            }
        })
    }
}

/// Stratum levels by negative truth-level dependencies.
fn compute_strata(defs: &DefinitionSet) -> Result<BTreeMap<String, usize>, EvalError> {
    fn deps(f: &Formula, neg: bool, out: &mut Vec<(String, bool)>) {
        match f {
            Formula::Ind(n, _) => out.push((n.clone(), neg)),
            Formula::And(a, b) => {
                deps(a, neg, out);
                deps(b, neg, out);
            }
            Formula::Not(a) => deps(a, !neg, out),
            Formula::Ite(_, a, b) => {
                deps(a, neg, out);
                deps(b, neg, out);
            }
            Formula::Exists { guard, body, .. } => {
                deps(guard, neg, out);
                deps(body, neg, out);
            }
            _ => {}
        }
    }
    let names: Vec<String> = defs.defs.keys().cloned().collect();
    let n = names.len();
    let mut level: BTreeMap<String, usize> = names.iter().map(|n| (n.clone(), 0)).collect();
    for round in 0..=(n + 1) {
        let mut changed = false;
        for name in &names {
            let body = &defs.get(name).unwrap().body;
            let mut ds = Vec::new();
            deps(body, false, &mut ds);
            let mut lvl = level[name];
            for (dep, negative) in ds {
                if let Some(&dl) = level.get(&dep) {
                    lvl = lvl.max(if negative { dl + 1 } else { dl });
                }
            }
            if lvl != level[name] {
                level.insert(name.clone(), lvl);
                changed = true;
            }
        }
        if !changed {
            return Ok(level);
        }
        if round == n + 1 {
            break;
        }
    }
    Err(EvalError::NonStratified("negative cycle".to_owned()))
}
