//! Frame models and evaluation.
//!
//! A frame model extends a pre-model with the simultaneous least fixpoint of
//! two equation systems: the support equations (what set of locations each
//! formula depends on) and the inductive equations (the recursive relation
//! definitions). Supports are computed first, with all inductive relations
//! empty; they depend only on guards and term values, never on inductive
//! truth. The inductive tables are then computed against the frozen supports.
//!
//! Both fixpoints run as chaotic iteration over a dependency-driven worklist
//! keyed by (definition, packed parameter assignment). The naive full-sweep
//! reference lives in [`crate::oracle`] and is kept deliberately independent.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::ast::{DefinitionSet, Formula, Signature, Sort, Term};
use crate::model::{
    apply_mutation, is_stable_on, Assignment, ElemSet, ModelError, Mutation, PreModel, Value,
};

/// Errors from evaluation and frame-model construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    UnboundVariable(String),
    /// Integer arithmetic left the bounded domain while a term's value was
    /// demanded directly.
    DomainOverflow,
    UnknownSymbol(String),
    MissingDefinition(String),
    /// A negative dependency cycle between recursive definitions.
    NonStratified(String),
    /// Safety cap exceeded; indicates an engine bug, never expected.
    FixpointDiverged(String),
    TableTooLarge(String),
    Model(ModelError),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::UnboundVariable(v) => write!(f, "unbound variable: {v}"),
            EvalError::DomainOverflow => write!(f, "integer arithmetic left the bounded domain"),
            EvalError::UnknownSymbol(n) => write!(f, "unknown symbol: {n}"),
            EvalError::MissingDefinition(n) => write!(f, "no definition for inductive relation {n}"),
            EvalError::NonStratified(m) => write!(f, "negative recursion: {m}"),
            EvalError::FixpointDiverged(m) => write!(f, "fixpoint diverged: {m}"),
            EvalError::TableTooLarge(m) => write!(f, "fixpoint table too large: {m}"),
            EvalError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl From<ModelError> for EvalError {
    fn from(e: ModelError) -> Self {
        EvalError::Model(e)
    }
}

/// Worklist seeding order; the least fixpoint is independent of it, which the
/// uniqueness suite checks by running both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FixpointOrder {
    #[default]
    Forward,
    Reversed,
}

/// Compiled view of a definition set against one model's domains.
#[derive(Debug, Clone)]
struct DefSystem {
    names: Vec<String>,
    index: BTreeMap<String, usize>,
    params: Vec<Vec<(String, Sort)>>,
    bodies: Vec<Formula>,
    /// Packed-domain size of each definition's parameter tuple.
    sizes: Vec<usize>,
    /// Definition indices grouped by stratum, dependencies first. Negative
    /// truth-level dependencies may only point to earlier strata.
    strata: Vec<Vec<usize>>,
}

/// Upper bound on the total number of fixpoint keys per model.
const TABLE_KEY_CAP: usize = 8_000_000;

impl DefSystem {
    fn build(pre: &PreModel, defs: &DefinitionSet) -> Result<DefSystem, EvalError> {
        let names: Vec<String> = defs.iter().map(|d| d.name.clone()).collect();
        let index: BTreeMap<String, usize> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        let mut params = Vec::new();
        let mut bodies = Vec::new();
        let mut sizes = Vec::new();
        let mut total = 0usize;
        for d in defs.iter() {
            params.push(d.params.clone());
            bodies.push(d.body.clone());
            let mut size = 1usize;
            for (_, s) in &d.params {
                size = size
                    .checked_mul(pre.domain_size(*s))
                    .ok_or_else(|| EvalError::TableTooLarge(d.name.clone()))?;
            }
            total += size;
            sizes.push(size);
        }
        if total > TABLE_KEY_CAP {
            return Err(EvalError::TableTooLarge(format!("{total} keys")));
        }
        let strata = stratify(&names, &index, &bodies)?;
        Ok(DefSystem { names, index, params, bodies, sizes, strata })
    }

    fn def_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }
}

/// Truth-level dependencies between definitions with polarity. Occurrences
/// inside support expressions do not count: supports are fixed before the
/// inductive fixpoint runs.
fn truth_deps(f: &Formula, positive: bool, out: &mut BTreeSet<(String, bool)>) {
    match f {
        Formula::True | Formula::False | Formula::Eq(..) | Formula::Rel(..) => {}
        Formula::Ind(name, _) => {
            out.insert((name.clone(), positive));
        }
        Formula::And(a, b) => {
            truth_deps(a, positive, out);
            truth_deps(b, positive, out);
        }
        Formula::Not(a) => truth_deps(a, !positive, out),
        Formula::Ite(_, a, b) => {
            truth_deps(a, positive, out);
            truth_deps(b, positive, out);
        }
        Formula::Exists { body, .. } => truth_deps(body, positive, out),
    }
}

fn stratify(
    names: &[String],
    index: &BTreeMap<String, usize>,
    bodies: &[Formula],
) -> Result<Vec<Vec<usize>>, EvalError> {
    let n = names.len();
    let mut pos_edges: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut neg_edges: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (i, body) in bodies.iter().enumerate() {
        let mut deps = BTreeSet::new();
        truth_deps(body, true, &mut deps);
        for (name, positive) in deps {
            if let Some(&j) = index.get(&name) {
                if positive {
                    pos_edges[i].insert(j);
                } else {
                    neg_edges[i].insert(j);
                }
            }
        }
    }
    // Stratum of a definition: one more than the highest stratum it depends
    // on negatively, at least as high as anything it depends on positively.
    // Iterate to a fixpoint; a stratum exceeding n signals a negative cycle.
    let mut stratum = vec![0usize; n];
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..n {
            let mut s = stratum[i];
            for &j in &pos_edges[i] {
                s = s.max(stratum[j]);
            }
            for &j in &neg_edges[i] {
                s = s.max(stratum[j] + 1);
            }
            if s > n {
                return Err(EvalError::NonStratified(names[i].clone()));
            }
            if s != stratum[i] {
                stratum[i] = s;
                changed = true;
            }
        }
    }
    let max = stratum.iter().copied().max().unwrap_or(0);
    let mut strata = vec![Vec::new(); max + 1];
    for i in 0..n {
        strata[stratum[i]].push(i);
    }
    strata.retain(|s| !s.is_empty());
    Ok(strata)
}

/// A pre-model extended with the least-fixpoint interpretation of its
/// recursive definitions and their supports.
///
/// The support table of a definition maps each packed parameter assignment to
/// the support of the definition body under that assignment; supports of
/// arbitrary formulas are derived from these tables structurally.
#[derive(Debug, Clone)]
pub struct FrameModel {
    pre: PreModel,
    system: DefSystem,
    /// Per definition, packed parameter assignment -> support of the body.
    sup: Vec<Vec<ElemSet>>,
    /// Per definition, packed parameter assignment -> membership.
    ind: Vec<Vec<bool>>,
}

type Key = (usize, usize);

struct Ctx<'a> {
    pre: &'a PreModel,
    system: &'a DefSystem,
    sup: &'a [Vec<ElemSet>],
    ind: &'a [Vec<bool>],
    reads: Option<&'a mut Vec<Key>>,
}

impl<'a> Ctx<'a> {
    fn record(&mut self, key: Key) {
        if let Some(reads) = self.reads.as_deref_mut() {
            reads.push(key);
        }
    }
}

type Env = Vec<(String, Value)>;

fn env_lookup(env: &Env, name: &str) -> Option<Value> {
    env.iter().rev().find(|(n, _)| n == name).map(|(_, v)| *v)
}

/// Packs an inductive application's evaluated arguments; `None` when any
/// argument fell outside its domain (in which case the tuple is simply not in
/// the relation and its body contributes no support).
fn pack_ind_args(
    pre: &PreModel,
    params: &[(String, Sort)],
    args: &[Value],
) -> Option<usize> {
    let sorts: Vec<Sort> = params.iter().map(|(_, s)| *s).collect();
    pre.pack_args(&sorts, args).ok()
}

fn eval_term(ctx: &mut Ctx, env: &mut Env, t: &Term) -> Result<Value, EvalError> {
    match t {
        Term::Const(c) => Ok(ctx.pre.const_value(c)?),
        Term::Var(v, _) => env_lookup(env, v).ok_or_else(|| EvalError::UnboundVariable(v.clone())),
        Term::Int(i) => {
            if *i < ctx.pre.int_range.0 || *i > ctx.pre.int_range.1 {
                return Err(EvalError::DomainOverflow);
            }
            Ok(Value::Int(*i))
        }
        Term::App(f, args) => {
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                vals.push(eval_term(ctx, env, a)?);
            }
            Ok(ctx.pre.lookup_fn(f, &vals)?)
        }
        Term::Add(a, b) | Term::Sub(a, b) => {
            let x = eval_term(ctx, env, a)?
                .as_int()
                .ok_or(EvalError::DomainOverflow)?;
            let y = eval_term(ctx, env, b)?
                .as_int()
                .ok_or(EvalError::DomainOverflow)?;
            let r = match t {
                Term::Add(..) => x.checked_add(y),
                _ => x.checked_sub(y),
            }
            .ok_or(EvalError::DomainOverflow)?;
            if r < ctx.pre.int_range.0 || r > ctx.pre.int_range.1 {
                return Err(EvalError::DomainOverflow);
            }
            Ok(Value::Int(r))
        }
        Term::Ite(g, a, b) => {
            if eval_formula_inner(ctx, env, g)? {
                eval_term(ctx, env, a)
            } else {
                eval_term(ctx, env, b)
            }
        }
        Term::SpF(f) => Ok(Value::Set(support_formula_inner(ctx, env, f)?)),
        Term::SpT(inner) => Ok(Value::Set(support_term_inner(ctx, env, inner)?)),
        Term::Union(a, b) => {
            let x = eval_term(ctx, env, a)?.as_set().ok_or(EvalError::DomainOverflow)?;
            let y = eval_term(ctx, env, b)?.as_set().ok_or(EvalError::DomainOverflow)?;
            Ok(Value::Set(x.union(y)))
        }
        Term::Inter(a, b) => {
            let x = eval_term(ctx, env, a)?.as_set().ok_or(EvalError::DomainOverflow)?;
            let y = eval_term(ctx, env, b)?.as_set().ok_or(EvalError::DomainOverflow)?;
            Ok(Value::Set(x.inter(y)))
        }
        Term::Compl(a) => {
            let x = eval_term(ctx, env, a)?.as_set().ok_or(EvalError::DomainOverflow)?;
            Ok(Value::Set(x.compl(ctx.pre.fg_size)))
        }
        Term::Empty => Ok(Value::Set(ElemSet::EMPTY)),
    }
}

/// Evaluates an atom's argument terms. A `DomainOverflow` makes the enclosing
/// atom false rather than failing the whole evaluation: a tuple outside the
/// bounded domain belongs to no relation and equals no in-domain value.
fn eval_atom_args(
    ctx: &mut Ctx,
    env: &mut Env,
    args: &[Term],
) -> Result<Option<Vec<Value>>, EvalError> {
    let mut vals = Vec::with_capacity(args.len());
    for a in args {
        match eval_term(ctx, env, a) {
            Ok(v) => vals.push(v),
            Err(EvalError::DomainOverflow) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    Ok(Some(vals))
}

fn eval_formula_inner(ctx: &mut Ctx, env: &mut Env, f: &Formula) -> Result<bool, EvalError> {
    match f {
        Formula::True => Ok(true),
        Formula::False => Ok(false),
        Formula::Eq(a, b) => {
            let vals = eval_atom_args(ctx, env, core::slice::from_ref(a))?;
            let Some(mut vals) = vals else { return Ok(false) };
            match eval_term(ctx, env, b) {
                Ok(v) => Ok(vals.pop().unwrap() == v),
                Err(EvalError::DomainOverflow) => Ok(false),
                Err(e) => Err(e),
            }
        }
        Formula::Rel(name, args) => {
            let Some(vals) = eval_atom_args(ctx, env, args)? else {
                return Ok(false);
            };
            match name.as_str() {
                "in" => {
                    let e = vals[0].as_elem().ok_or(EvalError::DomainOverflow)?;
                    let s = vals[1].as_set().ok_or(EvalError::DomainOverflow)?;
                    Ok(s.contains(e))
                }
                "subseteq" => {
                    let a = vals[0].as_set().ok_or(EvalError::DomainOverflow)?;
                    let b = vals[1].as_set().ok_or(EvalError::DomainOverflow)?;
                    Ok(a.is_subset(b))
                }
                "<=" | "<" | ">=" | ">" => {
                    let a = vals[0].as_int().ok_or(EvalError::DomainOverflow)?;
                    let b = vals[1].as_int().ok_or(EvalError::DomainOverflow)?;
                    Ok(match name.as_str() {
                        "<=" => a <= b,
                        "<" => a < b,
                        ">=" => a >= b,
                        _ => a > b,
                    })
                }
                _ => {
                    let rel = ctx
                        .pre
                        .rels
                        .get(name)
                        .ok_or_else(|| EvalError::UnknownSymbol(name.clone()))?;
                    Ok(rel.contains(&vals))
                }
            }
        }
        Formula::Ind(name, args) => {
            let Some(vals) = eval_atom_args(ctx, env, args)? else {
                return Ok(false);
            };
            let def = ctx
                .system
                .def_of(name)
                .ok_or_else(|| EvalError::MissingDefinition(name.clone()))?;
            match pack_ind_args(ctx.pre, &ctx.system.params[def], &vals) {
                Some(idx) => {
                    ctx.record((def, idx));
                    Ok(ctx.ind[def][idx])
                }
                None => Ok(false),
            }
        }
        Formula::And(a, b) => {
            // Deliberately eager: dependency recording must see both sides.
            let x = eval_formula_inner(ctx, env, a)?;
            let y = eval_formula_inner(ctx, env, b)?;
            Ok(x && y)
        }
        Formula::Not(a) => Ok(!eval_formula_inner(ctx, env, a)?),
        Formula::Ite(g, a, b) => {
            if eval_formula_inner(ctx, env, g)? {
                eval_formula_inner(ctx, env, a)
            } else {
                eval_formula_inner(ctx, env, b)
            }
        }
        Formula::Exists { var, sort, guard, body } => {
            let mut found = false;
            env.push((var.clone(), Value::Bool(false)));
            for v in ctx.pre.domain_values(*sort) {
                env.last_mut().unwrap().1 = v;
                found |= eval_formula_inner(ctx, env, guard)?
                    && eval_formula_inner(ctx, env, body)?;
            }
            env.pop();
            Ok(found)
        }
    }
}

fn support_term_inner(ctx: &mut Ctx, env: &mut Env, t: &Term) -> Result<ElemSet, EvalError> {
    match t {
        Term::Const(_) | Term::Var(..) | Term::Int(_) | Term::Empty => Ok(ElemSet::EMPTY),
        Term::App(f, args) => {
            let mut acc = ElemSet::EMPTY;
            for a in args {
                acc = acc.union(support_term_inner(ctx, env, a)?);
            }
            if ctx.pre.sig.is_mutable(f) {
                let fsig = ctx
                    .pre
                    .sig
                    .funcs
                    .get(f)
                    .ok_or_else(|| EvalError::UnknownSymbol(f.clone()))?
                    .clone();
                for (a, s) in args.iter().zip(fsig.args.iter()) {
                    if *s == Sort::Fg {
                        match eval_term(ctx, env, a) {
                            Ok(Value::Elem(e)) => acc.insert(e),
                            Ok(_) => {}
                            Err(EvalError::DomainOverflow) => {}
                            Err(e) => return Err(e),
                        }
                    }
                }
            }
            Ok(acc)
        }
        Term::Add(a, b) | Term::Sub(a, b) | Term::Union(a, b) | Term::Inter(a, b) => Ok(
            support_term_inner(ctx, env, a)?.union(support_term_inner(ctx, env, b)?),
        ),
        Term::Compl(a) => support_term_inner(ctx, env, a),
        Term::Ite(g, a, b) => {
            let mut acc = support_formula_inner(ctx, env, g)?;
            let branch = if eval_formula_inner(ctx, env, g)? { a } else { b };
            acc = acc.union(support_term_inner(ctx, env, branch)?);
            Ok(acc)
        }
        // Supports are idempotent: the support of `Sp(phi)` is the support
        // of `phi`.
        Term::SpF(f) => support_formula_inner(ctx, env, f),
        Term::SpT(inner) => support_term_inner(ctx, env, inner),
    }
}

fn support_formula_inner(ctx: &mut Ctx, env: &mut Env, f: &Formula) -> Result<ElemSet, EvalError> {
    match f {
        Formula::True | Formula::False => Ok(ElemSet::EMPTY),
        Formula::Eq(a, b) => Ok(
            support_term_inner(ctx, env, a)?.union(support_term_inner(ctx, env, b)?),
        ),
        Formula::Rel(_, args) => {
            let mut acc = ElemSet::EMPTY;
            for a in args {
                acc = acc.union(support_term_inner(ctx, env, a)?);
            }
            Ok(acc)
        }
        Formula::Ind(name, args) => {
            let mut acc = ElemSet::EMPTY;
            for a in args {
                acc = acc.union(support_term_inner(ctx, env, a)?);
            }
            let def = ctx
                .system
                .def_of(name)
                .ok_or_else(|| EvalError::MissingDefinition(name.clone()))?;
            let Some(vals) = eval_atom_args(ctx, env, args)? else {
                return Ok(acc);
            };
            if let Some(idx) = pack_ind_args(ctx.pre, &ctx.system.params[def], &vals) {
                ctx.record((def, idx));
                acc = acc.union(ctx.sup[def][idx]);
            }
            Ok(acc)
        }
        Formula::And(a, b) => Ok(
            support_formula_inner(ctx, env, a)?.union(support_formula_inner(ctx, env, b)?),
        ),
        // Supports are negation-transparent.
        Formula::Not(a) => support_formula_inner(ctx, env, a),
        Formula::Ite(g, a, b) => {
            let mut acc = support_formula_inner(ctx, env, g)?;
            let branch = if eval_formula_inner(ctx, env, g)? { a } else { b };
            acc = acc.union(support_formula_inner(ctx, env, branch)?);
            Ok(acc)
        }
        Formula::Exists { var, sort, guard, body } => {
            let mut acc = ElemSet::EMPTY;
            env.push((var.clone(), Value::Bool(false)));
            for v in ctx.pre.domain_values(*sort) {
                env.last_mut().unwrap().1 = v;
                acc = acc.union(support_formula_inner(ctx, env, guard)?);
                if eval_formula_inner(ctx, env, guard)? {
                    acc = acc.union(support_formula_inner(ctx, env, body)?);
                }
            }
            env.pop();
            Ok(acc)
        }
    }
}

/// Dependency-driven chaotic iteration: keeps a worklist of keys whose
/// right-hand sides must be recomputed, with reverse dependencies recorded on
/// the first evaluation of each key (read sets are fixed by the pre-model).
struct Worklist {
    queue: VecDeque<u32>,
    queued: Vec<bool>,
}

impl Worklist {
    fn new(n: usize) -> Worklist {
        Worklist { queue: VecDeque::new(), queued: vec![false; n] }
    }
    fn push(&mut self, k: u32) {
        if !self.queued[k as usize] {
            self.queued[k as usize] = true;
            self.queue.push_back(k);
        }
    }
    fn pop(&mut self) -> Option<u32> {
        let k = self.queue.pop_front()?;
        self.queued[k as usize] = false;
        Some(k)
    }
}

struct KeySpace {
    // Global key = offsets[def] + packed index.
    offsets: Vec<usize>,
    total: usize,
}

impl KeySpace {
    fn new(sizes: &[usize], defs: &[usize]) -> KeySpace {
        // Offsets are laid out over all definitions, but only keys of the
        // given defs are used.
        let mut offsets = vec![usize::MAX; sizes.len()];
        let mut total = 0;
        for &d in defs {
            offsets[d] = total;
            total += sizes[d];
        }
        KeySpace { offsets, total }
    }
    fn global(&self, key: Key) -> u32 {
        (self.offsets[key.0] + key.1) as u32
    }
}

fn param_env(pre: &PreModel, params: &[(String, Sort)], idx: usize) -> Env {
    let sorts: Vec<Sort> = params.iter().map(|(_, s)| *s).collect();
    let vals = pre.unpack_args(&sorts, idx);
    params
        .iter()
        .zip(vals)
        .map(|((n, _), v)| (n.clone(), v))
        .collect()
}

/// Constructs the unique frame model over a pre-model: supports first (all
/// inductive tables empty), then the inductive relations stratum by stratum
/// against the frozen supports.
pub fn frame_model(pre: &PreModel, defs: &DefinitionSet) -> Result<FrameModel, EvalError> {
    frame_model_with(pre, defs, FixpointOrder::Forward)
}

/// As [`frame_model`], seeding the worklists in the given order. The result
/// is order-independent; the uniqueness suite asserts it.
pub fn frame_model_with(
    pre: &PreModel,
    defs: &DefinitionSet,
    order: FixpointOrder,
) -> Result<FrameModel, EvalError> {
    let system = DefSystem::build(pre, defs)?;
    let mut sup: Vec<Vec<ElemSet>> = system.sizes.iter().map(|&n| vec![ElemSet::EMPTY; n]).collect();
    let mut ind: Vec<Vec<bool>> = system.sizes.iter().map(|&n| vec![false; n]).collect();

    let all_defs: Vec<usize> = (0..system.names.len()).collect();

    // Phase 1: supports. One monotone system over all definitions.
    run_fixpoint(pre, &system, &mut sup, &mut ind, &all_defs, order, true)?;

    // Phase 2: inductive relations, stratum by stratum, supports frozen.
    let strata = system.strata.clone();
    for stratum in &strata {
        run_fixpoint(pre, &system, &mut sup, &mut ind, stratum, order, false)?;
    }

    Ok(FrameModel { pre: pre.clone(), system, sup, ind })
}

#[allow(clippy::too_many_arguments)]
fn run_fixpoint(
    pre: &PreModel,
    system: &DefSystem,
    sup: &mut [Vec<ElemSet>],
    ind: &mut [Vec<bool>],
    defs: &[usize],
    order: FixpointOrder,
    supports_phase: bool,
) -> Result<(), EvalError> {
    let space = KeySpace::new(&system.sizes, defs);
    if space.total == 0 {
        return Ok(());
    }
    let mut rev_deps: Vec<Vec<u32>> = vec![Vec::new(); space.total];
    let mut wl = Worklist::new(space.total);

    let mut seed: Vec<Key> = Vec::with_capacity(space.total);
    for &d in defs {
        for idx in 0..system.sizes[d] {
            seed.push((d, idx));
        }
    }
    if order == FixpointOrder::Reversed {
        seed.reverse();
    }

    // First pass records read dependencies; afterwards only changed keys
    // re-enqueue their readers.
    let mut steps: u64 = 0;
    let cap = (space.total as u64 + 1) * (pre.fg_size as u64 + 3) * 8;
    let mut first_pass = true;
    let mut pending: VecDeque<Key> = seed.iter().copied().collect();
    loop {
        let key = if first_pass {
            match pending.pop_front() {
                Some(k) => k,
                None => {
                    first_pass = false;
                    match wl.pop() {
                        Some(g) => global_to_key(system, defs, &space, g),
                        None => break,
                    }
                }
            }
        } else {
            match wl.pop() {
                Some(g) => global_to_key(system, defs, &space, g),
                None => break,
            }
        };
        steps += 1;
        if steps > cap {
            return Err(EvalError::FixpointDiverged(format!(
                "{} steps over {} keys",
                steps, space.total
            )));
        }
        let (d, idx) = key;
        let mut env = param_env(pre, &system.params[d], idx);
        let mut reads: Vec<Key> = Vec::new();
        let changed = {
            let mut ctx = Ctx {
                pre,
                system,
                sup,
                ind,
                reads: Some(&mut reads),
            };
            if supports_phase {
                let new = support_formula_inner(&mut ctx, &mut env, &system.bodies[d])?;
                let cur = sup[d][idx];
                let merged = cur.union(new);
                if merged != cur {
                    sup[d][idx] = merged;
                    true
                } else {
                    false
                }
            } else {
                let new = eval_formula_inner(&mut ctx, &mut env, &system.bodies[d])?;
                if new && !ind[d][idx] {
                    ind[d][idx] = true;
                    true
                } else {
                    false
                }
            }
        };
        if first_pass {
            let g = space.global(key);
            for r in reads {
                // Reads of defs outside this phase's key space (lower strata)
                // are frozen; skip them.
                if space.offsets[r.0] != usize::MAX && defs.contains(&r.0) {
                    let rg = space.global(r);
                    if !rev_deps[rg as usize].contains(&g) {
                        rev_deps[rg as usize].push(g);
                    }
                }
            }
        }
        if changed {
            let g = space.global(key);
            for &r in &rev_deps[g as usize] {
                wl.push(r);
            }
        }
    }
    Ok(())
}

fn global_to_key(system: &DefSystem, defs: &[usize], space: &KeySpace, g: u32) -> Key {
    let g = g as usize;
    for &d in defs {
        let off = space.offsets[d];
        if g >= off && g < off + system.sizes[d] {
            return (d, g - off);
        }
    }
    unreachable!("global key out of range");
}

impl FrameModel {
    pub fn pre_model(&self) -> &PreModel {
        &self.pre
    }

    pub fn signature(&self) -> &Signature {
        &self.pre.sig
    }

    /// Inductive relation tables in a comparable form.
    pub fn inductive_tables(&self) -> BTreeMap<String, BTreeSet<Vec<Value>>> {
        let mut out = BTreeMap::new();
        for (d, name) in self.system.names.iter().enumerate() {
            let sorts: Vec<Sort> = self.system.params[d].iter().map(|(_, s)| *s).collect();
            let mut rows = BTreeSet::new();
            for (idx, &b) in self.ind[d].iter().enumerate() {
                if b {
                    rows.insert(self.pre.unpack_args(&sorts, idx));
                }
            }
            out.insert(name.clone(), rows);
        }
        out
    }

    /// Support tables in a comparable form: definition name -> packed
    /// parameter assignment -> support of the body.
    pub fn support_tables(&self) -> BTreeMap<String, Vec<ElemSet>> {
        self.system
            .names
            .iter()
            .enumerate()
            .map(|(d, n)| (n.clone(), self.sup[d].clone()))
            .collect()
    }

    /// Bit-for-bit table comparison against another frame model.
    pub fn same_tables(&self, other: &FrameModel) -> bool {
        self.inductive_tables() == other.inductive_tables()
            && self.support_tables() == other.support_tables()
    }

    /// Tuples of one inductive relation, for inspection.
    pub fn inductive_rows(&self, name: &str) -> Option<BTreeSet<Vec<Value>>> {
        self.inductive_tables().remove(name)
    }

    fn ctx(&self) -> Ctx<'_> {
        Ctx {
            pre: &self.pre,
            system: &self.system,
            sup: &self.sup,
            ind: &self.ind,
            reads: None,
        }
    }

    fn env_from(&self, nu: &Assignment) -> Env {
        nu.iter().map(|(n, v)| (n.clone(), *v)).collect()
    }

    /// Truth of a formula under an assignment covering its free variables.
    pub fn eval(&self, nu: &Assignment, f: &Formula) -> Result<bool, EvalError> {
        let mut env = self.env_from(nu);
        eval_formula_inner(&mut self.ctx(), &mut env, f)
    }

    /// Value of a term. Unlike atom evaluation, a demanded out-of-domain
    /// integer surfaces as `DomainOverflow`.
    pub fn eval_term(&self, nu: &Assignment, t: &Term) -> Result<Value, EvalError> {
        let mut env = self.env_from(nu);
        eval_term(&mut self.ctx(), &mut env, t)
    }

    /// The support of a formula: the least-fixpoint value of the support
    /// equations, equal to `eval_term` of the wrapped support expression.
    pub fn support(&self, nu: &Assignment, f: &Formula) -> Result<ElemSet, EvalError> {
        let mut env = self.env_from(nu);
        support_formula_inner(&mut self.ctx(), &mut env, f)
    }

    pub fn support_of_term(&self, nu: &Assignment, t: &Term) -> Result<ElemSet, EvalError> {
        let mut env = self.env_from(nu);
        support_term_inner(&mut self.ctx(), &mut env, t)
    }

    /// Re-applies one step of both fixpoint operators and reports whether
    /// anything would change. A frame model is a fixpoint, so this must
    /// always return false; the property suites assert it.
    pub fn one_more_step_changes(&self) -> Result<bool, EvalError> {
        for d in 0..self.system.names.len() {
            for idx in 0..self.system.sizes[d] {
                let mut env = param_env(&self.pre, &self.system.params[d], idx);
                let mut ctx = self.ctx();
                let s = support_formula_inner(&mut ctx, &mut env, &self.system.bodies[d])?;
                if s != self.sup[d][idx] {
                    return Ok(true);
                }
                let mut ctx = self.ctx();
                let b = eval_formula_inner(&mut ctx, &mut env, &self.system.bodies[d])?;
                if b != self.ind[d][idx] {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    pub fn definitions(&self) -> impl Iterator<Item = &str> {
        self.system.names.iter().map(|s| s.as_str())
    }
}

/// Outcome of one frame-theorem instance check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrameVerdict {
    /// The mutation was stable on the support and truth was preserved.
    Pass,
    /// The mutation touched the support; the theorem does not apply.
    NotApplicable,
    /// Stable on the support yet truth changed: a frame-theorem violation.
    Violated { before: bool, after: bool },
}

/// Checks one instance of frame preservation: mutate the model, and if the
/// mutation is stable on the support of `formula` under `nu`, compare truth
/// before and after.
pub fn check_frame_instance(
    fm: &FrameModel,
    defs: &DefinitionSet,
    mutation: &Mutation,
    nu: &Assignment,
    formula: &Formula,
) -> Result<FrameVerdict, EvalError> {
    let x = fm.support(nu, formula)?;
    let mutated = apply_mutation(&fm.pre, mutation)?;
    if !is_stable_on(&fm.pre, &mutated, x)? {
        return Ok(FrameVerdict::NotApplicable);
    }
    let fm2 = frame_model(&mutated, defs)?;
    let before = fm.eval(nu, formula)?;
    let after = fm2.eval(nu, formula)?;
    if before == after {
        Ok(FrameVerdict::Pass)
    } else {
        Ok(FrameVerdict::Violated { before, after })
    }
}

/// Term-level variant of [`check_frame_instance`]: stable mutations must
/// preserve term values.
pub fn check_frame_instance_term(
    fm: &FrameModel,
    defs: &DefinitionSet,
    mutation: &Mutation,
    nu: &Assignment,
    term: &Term,
) -> Result<FrameVerdict, EvalError> {
    let x = fm.support_of_term(nu, term)?;
    let mutated = apply_mutation(&fm.pre, mutation)?;
    if !is_stable_on(&fm.pre, &mutated, x)? {
        return Ok(FrameVerdict::NotApplicable);
    }
    let fm2 = frame_model(&mutated, defs)?;
    let before = fm.eval_term(nu, term);
    let after = fm2.eval_term(nu, term);
    match (before, after) {
        (Ok(a), Ok(b)) if a == b => Ok(FrameVerdict::Pass),
        (Ok(_), Ok(_)) => Ok(FrameVerdict::Violated { before: true, after: false }),
        (Err(e), _) | (_, Err(e)) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{Definition, Signature};
    use crate::model::DEFAULT_INT_RANGE;
    use alloc::sync::Arc;

    fn list_sig() -> Arc<Signature> {
        let mut sig = Signature::new().with_field("next");
        sig.inductives.insert("list".to_owned(), vec![Sort::Fg]);
        Arc::new(sig)
    }

    fn list_defs() -> DefinitionSet {
        let mut defs = DefinitionSet::new();
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
        defs
    }

    /// Chain u2 -> u1 -> u0(nil).
    fn chain3() -> PreModel {
        let mut m = PreModel::new(list_sig(), 3, DEFAULT_INT_RANGE).unwrap();
        m.set_fn("next", &[Value::Elem(2)], Value::Elem(1)).unwrap();
        m.set_fn("next", &[Value::Elem(1)], Value::Elem(0)).unwrap();
        m.set_fn("next", &[Value::Elem(0)], Value::Elem(0)).unwrap();
        m
    }

    /// Two-cycle u1 -> u2 -> u1.
    fn cycle2() -> PreModel {
        let mut m = PreModel::new(list_sig(), 3, DEFAULT_INT_RANGE).unwrap();
        m.set_fn("next", &[Value::Elem(1)], Value::Elem(2)).unwrap();
        m.set_fn("next", &[Value::Elem(2)], Value::Elem(1)).unwrap();
        m
    }

    fn nu(pairs: &[(&str, Value)]) -> Assignment {
        pairs.iter().map(|(n, v)| ((*n).to_owned(), *v)).collect()
    }

    #[test]
    fn empty_defs_supports_are_syntactic() {
        let m = PreModel::new(list_sig(), 2, DEFAULT_INT_RANGE).unwrap();
        let fm = frame_model(&m, &DefinitionSet::new()).unwrap();
        assert!(fm.inductive_tables().is_empty() || fm.inductive_tables().values().all(|t| t.is_empty()));
        // Sp(f(x) = y) = {x}
        let f = Formula::eq(Term::app1("next", Term::var("x")), Term::var("y"));
        let s = fm
            .support(&nu(&[("x", Value::Elem(1)), ("y", Value::Elem(0))]), &f)
            .unwrap();
        assert_eq!(s, ElemSet::singleton(1));
        // Sp(c) and Sp(x) are empty.
        assert_eq!(
            fm.eval_term(&nu(&[]), &Term::sp_term(Term::nil())).unwrap(),
            Value::Set(ElemSet::EMPTY)
        );
        assert_eq!(
            fm.eval_term(&nu(&[("x", Value::Elem(1))]), &Term::sp_term(Term::var("x")))
                .unwrap(),
            Value::Set(ElemSet::EMPTY)
        );
    }

    #[test]
    fn list_holds_along_chain() {
        let fm = frame_model(&chain3(), &list_defs()).unwrap();
        let rows = fm.inductive_rows("list").unwrap();
        let expect: BTreeSet<Vec<Value>> = [0u8, 1, 2]
            .iter()
            .map(|e| vec![Value::Elem(*e)])
            .collect();
        assert_eq!(rows, expect);
    }

    #[test]
    fn list_fails_on_cycle() {
        let fm = frame_model(&cycle2(), &list_defs()).unwrap();
        let rows = fm.inductive_rows("list").unwrap();
        let expect: BTreeSet<Vec<Value>> = [vec![Value::Elem(0)]].into_iter().collect();
        assert_eq!(rows, expect, "only nil is a list on a cycle");
    }

    #[test]
    fn list_support_is_reachability() {
        let fm = frame_model(&chain3(), &list_defs()).unwrap();
        let f = Formula::ind("list", vec![Term::var("x")]);
        let s = fm.support(&nu(&[("x", Value::Elem(2))]), &f).unwrap();
        assert_eq!(s, ElemSet::from_iter([1, 2]));
        let s = fm.support(&nu(&[("x", Value::Elem(0))]), &f).unwrap();
        assert_eq!(s, ElemSet::EMPTY);
    }

    #[test]
    fn support_equals_sp_term_eval() {
        let fm = frame_model(&chain3(), &list_defs()).unwrap();
        let f = Formula::ind("list", vec![Term::var("x")]);
        let assignment = nu(&[("x", Value::Elem(2))]);
        let via_term = fm.eval_term(&assignment, &Term::sp(f.clone())).unwrap();
        let via_support = fm.support(&assignment, &f).unwrap();
        assert_eq!(via_term, Value::Set(via_support));
    }

    #[test]
    fn ite_guard_semantics() {
        let m = PreModel::new(list_sig(), 2, DEFAULT_INT_RANGE).unwrap();
        let fm = frame_model(&m, &DefinitionSet::new()).unwrap();
        let f = Formula::ite(
            Formula::eq(Term::var("x"), Term::nil()),
            Formula::True,
            Formula::False,
        );
        assert!(fm.eval(&nu(&[("x", Value::Elem(0))]), &f).unwrap());
        assert!(!fm.eval(&nu(&[("x", Value::Elem(1))]), &f).unwrap());
        assert!(fm.eval(&nu(&[]), &Formula::True).unwrap());
    }

    #[test]
    fn order_independence_and_fixpoint() {
        for m in [chain3(), cycle2()] {
            let a = frame_model_with(&m, &list_defs(), FixpointOrder::Forward).unwrap();
            let b = frame_model_with(&m, &list_defs(), FixpointOrder::Reversed).unwrap();
            assert!(a.same_tables(&b));
            assert!(!a.one_more_step_changes().unwrap());
        }
    }

    #[test]
    fn frame_instance_on_chain() {
        let defs = list_defs();
        let fm = frame_model(&chain3(), &defs).unwrap();
        let f = Formula::ind("list", vec![Term::var("x")]);
        let assignment = nu(&[("x", Value::Elem(1))]);
        // Sp(list(u1)) = {u1}; mutating next(u2) is outside it.
        let outside = Mutation::new().set("next", vec![Value::Elem(2)], Value::Elem(2));
        assert_eq!(
            check_frame_instance(&fm, &defs, &outside, &assignment, &f).unwrap(),
            FrameVerdict::Pass
        );
        // Mutating next(u1) touches the support.
        let inside = Mutation::new().set("next", vec![Value::Elem(1)], Value::Elem(2));
        assert_eq!(
            check_frame_instance(&fm, &defs, &inside, &assignment, &f).unwrap(),
            FrameVerdict::NotApplicable
        );
        // The empty mutation always passes.
        assert_eq!(
            check_frame_instance(&fm, &defs, &Mutation::new(), &assignment, &f).unwrap(),
            FrameVerdict::Pass
        );
    }

    #[test]
    fn unbound_variable_is_reported() {
        let m = PreModel::new(list_sig(), 2, DEFAULT_INT_RANGE).unwrap();
        let fm = frame_model(&m, &DefinitionSet::new()).unwrap();
        let f = Formula::eq(Term::var("x"), Term::nil());
        assert_eq!(
            fm.eval(&nu(&[]), &f),
            Err(EvalError::UnboundVariable("x".to_owned()))
        );
    }

    #[test]
    fn term_overflow_surfaces_but_atom_is_false() {
        let sig = Arc::new(Signature::new());
        let m = PreModel::new(sig, 1, (-2, 2)).unwrap();
        let fm = frame_model(&m, &DefinitionSet::new()).unwrap();
        let t = Term::add(Term::Int(2), Term::Int(2));
        assert_eq!(fm.eval_term(&nu(&[]), &t), Err(EvalError::DomainOverflow));
        let f = Formula::eq(Term::add(Term::Int(2), Term::Int(2)), Term::Int(0));
        assert_eq!(fm.eval(&nu(&[]), &f), Ok(false));
        // ... and so is its negation's inner atom; negation flips it.
        assert_eq!(fm.eval(&nu(&[]), &Formula::not(f)), Ok(true));
    }
}
