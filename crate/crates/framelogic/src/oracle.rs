//! Independent brute-force references for differential testing.
//!
//! The naive fixpoint evaluator recomputes full tables with Jacobi sweeps
//! from a snapshot until nothing changes; it shares no fixpoint machinery
//! with [`crate::semantics`], deliberately. The enumerators produce every
//! valid configuration and every heaplet within bounds, exactly once.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::ast::{DefinitionSet, Formula, Signature, Sort, Term};
use crate::model::{
    enumerate_pre_models, Assignment, ElemId, ElemSet, EnumFilter, ModelError, PreModel, Value,
};
use crate::psl::Heaplet;
use crate::semantics::EvalError;
use crate::whilelang::{valid_config, Configuration};

/// Enumeration bounds shared by the brute-force suites.
#[derive(Debug, Clone, Copy)]
pub struct Bounds {
    pub fg_size: u8,
    pub int_range: (i64, i64),
    pub fuel: u32,
    pub max_heaplets: usize,
}

impl Bounds {
    pub fn new(fg_size: u8) -> Bounds {
        Bounds {
            fg_size,
            int_range: (-4, 4),
            fuel: 32,
            max_heaplets: 1 << 22,
        }
    }

    pub fn with_int_range(mut self, lo: i64, hi: i64) -> Bounds {
        self.int_range = (lo, hi);
        self
    }

    pub fn with_fuel(mut self, fuel: u32) -> Bounds {
        self.fuel = fuel;
        self
    }

    pub fn check(&self) -> Result<(), ModelError> {
        if self.fg_size == 0 || self.fg_size > crate::model::FG_CAP {
            return Err(ModelError::BoundsTooLarge(format!(
                "fg_size {} outside 1..={}",
                self.fg_size,
                crate::model::FG_CAP
            )));
        }
        if self.int_range.0 > self.int_range.1 {
            return Err(ModelError::BoundsTooLarge("empty integer range".to_owned()));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Naive fixpoint
// ---------------------------------------------------------------------------

/// Frame-model tables computed by plain full-table sweeps.
#[derive(Debug, Clone)]
pub struct NaiveFrameModel {
    pre: PreModel,
    defs: DefinitionSet,
    names: Vec<String>,
    param_sorts: Vec<Vec<Sort>>,
    supports: Vec<Vec<ElemSet>>,
    inductive: Vec<Vec<bool>>,
}

type NEnv = BTreeMap<String, Value>;

struct NaiveCtx<'a> {
    pre: &'a PreModel,
    names: &'a [String],
    param_sorts: &'a [Vec<Sort>],
    supports: &'a [Vec<ElemSet>],
    inductive: &'a [Vec<bool>],
}

impl<'a> NaiveCtx<'a> {
    fn def_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    fn row_of(&self, def: usize, args: &[Value]) -> Option<usize> {
        self.pre.pack_args(&self.param_sorts[def], args).ok()
    }

    /// `None` encodes an out-of-domain integer result.
    fn value(&self, env: &NEnv, t: &Term) -> Result<Option<Value>, EvalError> {
        Ok(match t {
            Term::Const(c) => Some(self.pre.const_value(c).map_err(EvalError::Model)?),
            Term::Var(v, _) => Some(
                *env.get(v)
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
                    match self.value(env, a)? {
                        Some(v) => vals.push(v),
                        None => return Ok(None),
                    }
                }
                Some(self.pre.lookup_fn(f, &vals).map_err(EvalError::Model)?)
            }
            Term::Add(a, b) | Term::Sub(a, b) => {
                let (Some(x), Some(y)) = (self.value(env, a)?, self.value(env, b)?) else {
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
                if self.truth(env, g)? {
                    self.value(env, a)?
                } else {
                    self.value(env, b)?
                }
            }
            Term::SpF(f) => Some(Value::Set(self.sp(env, f)?)),
            Term::SpT(inner) => Some(Value::Set(self.sp_term(env, inner)?)),
            Term::Union(a, b) | Term::Inter(a, b) => {
                let (Some(x), Some(y)) = (self.value(env, a)?, self.value(env, b)?) else {
                    return Ok(None);
                };
                let (Some(x), Some(y)) = (x.as_set(), y.as_set()) else {
                    return Ok(None);
                };
                Some(Value::Set(if matches!(t, Term::Union(..)) {
                    x.union(y)
                } else {
                    x.inter(y)
                }))
            }
            Term::Compl(a) => match self.value(env, a)? {
                Some(v) => v.as_set().map(|s| Value::Set(s.compl(self.pre.fg_size))),
                None => None,
            },
            Term::Empty => Some(Value::Set(ElemSet::EMPTY)),
        })
    }

    fn truth(&self, env: &NEnv, f: &Formula) -> Result<bool, EvalError> {
        Ok(match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Eq(a, b) => match (self.value(env, a)?, self.value(env, b)?) {
                (Some(x), Some(y)) => x == y,
                _ => false,
            },
            Formula::Rel(name, args) => {
                let mut vals = Vec::new();
                for a in args {
                    match self.value(env, a)? {
                        Some(v) => vals.push(v),
                        None => return Ok(false),
                    }
                }
                match name.as_str() {
                    "in" => match (vals[0], vals[1]) {
                        (Value::Elem(e), Value::Set(s)) => s.contains(e),
                        _ => false,
                    },
                    "subseteq" => match (vals[0], vals[1]) {
                        (Value::Set(a), Value::Set(b)) => a.is_subset(b),
                        _ => false,
                    },
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
                let def = self
                    .def_index(name)
                    .ok_or_else(|| EvalError::MissingDefinition(name.clone()))?;
                let mut vals = Vec::new();
                for a in args {
                    match self.value(env, a)? {
                        Some(v) => vals.push(v),
                        None => return Ok(false),
                    }
                }
                match self.row_of(def, &vals) {
                    Some(row) => self.inductive[def][row],
                    None => false,
                }
            }
            Formula::And(a, b) => self.truth(env, a)? && self.truth(env, b)?,
            Formula::Not(a) => !self.truth(env, a)?,
            Formula::Ite(g, a, b) => {
                if self.truth(env, g)? {
                    self.truth(env, a)?
                } else {
                    self.truth(env, b)?
                }
            }
            Formula::Exists { var, sort, guard, body } => {
                let mut found = false;
                for v in self.pre.domain_values(*sort) {
                    let mut env2 = env.clone();
                    env2.insert(var.clone(), v);
                    if self.truth(&env2, guard)? && self.truth(&env2, body)? {
                        found = true;
                    }
                }
                found
            }
        })
    }

    fn sp_term(&self, env: &NEnv, t: &Term) -> Result<ElemSet, EvalError> {
        Ok(match t {
            Term::Const(_) | Term::Var(..) | Term::Int(_) | Term::Empty => ElemSet::EMPTY,
            Term::App(f, args) => {
                let mut acc = ElemSet::EMPTY;
                for a in args {
                    acc = acc.union(self.sp_term(env, a)?);
                }
                if self.pre.sig.is_mutable(f) {
                    let fsig = &self.pre.sig.funcs[f];
                    for (a, s) in args.iter().zip(&fsig.args) {
                        if *s == Sort::Fg {
                            if let Some(Value::Elem(e)) = self.value(env, a)? {
                                acc.insert(e);
                            }
                        }
                    }
                }
                acc
            }
            Term::Add(a, b) | Term::Sub(a, b) | Term::Union(a, b) | Term::Inter(a, b) => {
                self.sp_term(env, a)?.union(self.sp_term(env, b)?)
            }
            Term::Compl(a) => self.sp_term(env, a)?,
            Term::Ite(g, a, b) => {
                let mut acc = self.sp(env, g)?;
                acc = acc.union(if self.truth(env, g)? {
                    self.sp_term(env, a)?
                } else {
                    self.sp_term(env, b)?
                });
                acc
            }
            Term::SpF(f) => self.sp(env, f)?,
            Term::SpT(inner) => self.sp_term(env, inner)?,
        })
    }

    fn sp(&self, env: &NEnv, f: &Formula) -> Result<ElemSet, EvalError> {
        Ok(match f {
            Formula::True | Formula::False => ElemSet::EMPTY,
            Formula::Eq(a, b) => self.sp_term(env, a)?.union(self.sp_term(env, b)?),
            Formula::Rel(_, args) => {
                let mut acc = ElemSet::EMPTY;
                for a in args {
                    acc = acc.union(self.sp_term(env, a)?);
                }
                acc
            }
            Formula::Ind(name, args) => {
                let def = self
                    .def_index(name)
                    .ok_or_else(|| EvalError::MissingDefinition(name.clone()))?;
                let mut acc = ElemSet::EMPTY;
                for a in args {
                    acc = acc.union(self.sp_term(env, a)?);
                }
                let mut vals = Vec::new();
                let mut in_domain = true;
                for a in args {
                    match self.value(env, a)? {
                        Some(v) => vals.push(v),
                        None => in_domain = false,
                    }
                }
                if in_domain {
                    if let Some(row) = self.row_of(def, &vals) {
                        acc = acc.union(self.supports[def][row]);
                    }
                }
                acc
            }
            Formula::And(a, b) => self.sp(env, a)?.union(self.sp(env, b)?),
            Formula::Not(a) => self.sp(env, a)?,
            Formula::Ite(g, a, b) => {
                let mut acc = self.sp(env, g)?;
                acc = acc.union(if self.truth(env, g)? {
                    self.sp(env, a)?
                } else {
                    self.sp(env, b)?
                });
                acc
            }
            Formula::Exists { var, sort, guard, body } => {
                let mut acc = ElemSet::EMPTY;
                for v in self.pre.domain_values(*sort) {
                    let mut env2 = env.clone();
                    env2.insert(var.clone(), v);
                    acc = acc.union(self.sp(&env2, guard)?);
                    if self.truth(&env2, guard)? {
                        acc = acc.union(self.sp(&env2, body)?);
                    }
                }
                acc
            }
        })
    }
}

/// Assigns each definition the least stratum compatible with its negative
/// truth-level dependencies; recomputed here rather than shared.
fn naive_strata(names: &[String], defs: &DefinitionSet) -> Result<Vec<Vec<usize>>, EvalError> {
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
            Formula::Exists { body, .. } => deps(body, neg, out),
            _ => {}
        }
    }
    let n = names.len();
    let mut level = vec![0usize; n];
    for round in 0..=(n + 1) {
        let mut changed = false;
        for (i, name) in names.iter().enumerate() {
            let body = &defs.get(name).unwrap().body;
            let mut ds = Vec::new();
            deps(body, false, &mut ds);
            for (dep, negative) in ds {
                if let Some(j) = names.iter().position(|m| *m == dep) {
                    let need = if negative { level[j] + 1 } else { level[j] };
                    if level[i] < need {
                        level[i] = need;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
        if round == n + 1 {
            return Err(EvalError::NonStratified("negative cycle".to_owned()));
        }
    }
    let mx = level.iter().copied().max().unwrap_or(0);
    let mut strata = vec![Vec::new(); mx + 1];
    for (i, l) in level.iter().enumerate() {
        strata[*l].push(i);
    }
    strata.retain(|s| !s.is_empty());
    Ok(strata)
}

/// Computes frame-model tables by naive full-table Kleene sweeps: supports
/// first from all-empty, then the inductive relations stratum by stratum
/// against the frozen supports. Same contract as
/// [`crate::semantics::frame_model`], structurally independent
/// implementation.
pub fn naive_fixpoint(pre: &PreModel, defs: &DefinitionSet) -> Result<NaiveFrameModel, EvalError> {
    let names: Vec<String> = defs.iter().map(|d| d.name.clone()).collect();
    let param_sorts: Vec<Vec<Sort>> = defs
        .iter()
        .map(|d| d.params.iter().map(|(_, s)| *s).collect())
        .collect();
    let sizes: Vec<usize> = param_sorts
        .iter()
        .map(|ss| ss.iter().map(|s| pre.domain_size(*s)).product())
        .collect();
    let mut supports: Vec<Vec<ElemSet>> = sizes.iter().map(|&n| vec![ElemSet::EMPTY; n]).collect();
    let mut inductive: Vec<Vec<bool>> = sizes.iter().map(|&n| vec![false; n]).collect();

    let row_env = |def: usize, row: usize| -> NEnv {
        let d = defs.get(&names[def]).unwrap();
        let vals = pre.unpack_args(&param_sorts[def], row);
        d.params
            .iter()
            .zip(vals)
            .map(|((n, _), v)| (n.clone(), v))
            .collect()
    };

    // Supports: each Jacobi sweep reads the previous snapshot everywhere.
    loop {
        let snapshot = supports.clone();
        let mut changed = false;
        for def in 0..names.len() {
            let body = &defs.get(&names[def]).unwrap().body;
            for row in 0..sizes[def] {
                let ctx = NaiveCtx {
                    pre,
                    names: &names,
                    param_sorts: &param_sorts,
                    supports: &snapshot,
                    inductive: &inductive,
                };
                let env = row_env(def, row);
                let s = ctx.sp(&env, body)?;
                let merged = supports[def][row].union(s);
                if merged != supports[def][row] {
                    supports[def][row] = merged;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    // Inductive relations against the frozen supports.
    for stratum in naive_strata(&names, defs)? {
        loop {
            let snapshot = inductive.clone();
            let mut changed = false;
            for &def in &stratum {
                let body = &defs.get(&names[def]).unwrap().body;
                for row in 0..sizes[def] {
                    if inductive[def][row] {
                        continue;
                    }
                    let ctx = NaiveCtx {
                        pre,
                        names: &names,
                        param_sorts: &param_sorts,
                        supports: &supports,
                        inductive: &snapshot,
                    };
                    let env = row_env(def, row);
                    if ctx.truth(&env, body)? {
                        inductive[def][row] = true;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }

    Ok(NaiveFrameModel {
        pre: pre.clone(),
        defs: defs.clone(),
        names,
        param_sorts,
        supports,
        inductive,
    })
}

impl NaiveFrameModel {
    fn ctx(&self) -> NaiveCtx<'_> {
        NaiveCtx {
            pre: &self.pre,
            names: &self.names,
            param_sorts: &self.param_sorts,
            supports: &self.supports,
            inductive: &self.inductive,
        }
    }

    pub fn eval(&self, nu: &Assignment, f: &Formula) -> Result<bool, EvalError> {
        self.ctx().truth(nu, f)
    }

    pub fn support(&self, nu: &Assignment, f: &Formula) -> Result<ElemSet, EvalError> {
        self.ctx().sp(nu, f)
    }

    pub fn support_of_term(&self, nu: &Assignment, t: &Term) -> Result<ElemSet, EvalError> {
        self.ctx().sp_term(nu, t)
    }

    pub fn defs(&self) -> &DefinitionSet {
        &self.defs
    }

    pub fn inductive_tables(&self) -> BTreeMap<String, BTreeSet<Vec<Value>>> {
        let mut out = BTreeMap::new();
        for (d, name) in self.names.iter().enumerate() {
            let mut rows = BTreeSet::new();
            for (row, &b) in self.inductive[d].iter().enumerate() {
                if b {
                    rows.insert(self.pre.unpack_args(&self.param_sorts[d], row));
                }
            }
            out.insert(name.clone(), rows);
        }
        out
    }

    pub fn support_tables(&self) -> BTreeMap<String, Vec<ElemSet>> {
        self.names
            .iter()
            .enumerate()
            .map(|(d, n)| (n.clone(), self.supports[d].clone()))
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Reachability
// ---------------------------------------------------------------------------

/// Transitive closure from `start` along the given unary foreground fields,
/// stopping at (and excluding) nil.
pub fn reachable(pre: &PreModel, start: ElemId, fields: &[&str]) -> ElemSet {
    let nil = pre.nil();
    let mut seen = ElemSet::EMPTY;
    let mut frontier = vec![start];
    while let Some(u) = frontier.pop() {
        if u == nil || seen.contains(u) {
            continue;
        }
        seen.insert(u);
        for f in fields {
            if let Ok(Value::Elem(v)) = pre.lookup_fn(f, &[Value::Elem(u)]) {
                frontier.push(v);
            }
        }
    }
    seen
}

// ---------------------------------------------------------------------------
// Configuration enumeration
// ---------------------------------------------------------------------------

fn mixed_radix_iter(radices: Vec<usize>) -> impl Iterator<Item = Vec<usize>> {
    let mut counter = vec![0usize; radices.len()];
    let mut done = radices.iter().any(|&r| r == 0);
    core::iter::from_fn(move || {
        if done {
            return None;
        }
        let out = counter.clone();
        done = true;
        for i in (0..counter.len()).rev() {
            counter[i] += 1;
            if counter[i] < radices[i] {
                done = false;
                break;
            }
            counter[i] = 0;
        }
        if counter.is_empty() {
            done = true;
        }
        Some(out)
    })
}

/// Exhaustively enumerates valid configurations: every pre-model from the
/// filter, every store over `vars`, every allocated set avoiding nil, every
/// allocatable set compatible with validity, filtered by the constraint
/// formula when given (evaluated with the allocatable-set constant bound).
pub fn enumerate_configs(
    sig: Arc<Signature>,
    vars: &[(String, Sort)],
    bounds: &Bounds,
    filter: &EnumFilter,
    defs: &DefinitionSet,
    constraint: Option<&Formula>,
) -> Result<Vec<Configuration>, EvalError> {
    bounds.check().map_err(EvalError::Model)?;
    let mut out = Vec::new();
    for model in enumerate_pre_models(sig.clone(), bounds.fg_size, bounds.int_range, filter)
        .map_err(EvalError::Model)?
    {
        let var_domains: Vec<Vec<Value>> =
            vars.iter().map(|(_, s)| model.domain_values(*s)).collect();
        let radices: Vec<usize> = var_domains.iter().map(|d| d.len()).collect();
        for digits in mixed_radix_iter(radices) {
            let store: Assignment = vars
                .iter()
                .enumerate()
                .map(|(i, (n, _))| (n.clone(), var_domains[i][digits[i]]))
                .collect();
            for heap in ElemSet::full(bounds.fg_size).subsets() {
                if heap.contains(model.nil()) {
                    continue;
                }
                for avail in heap.compl(bounds.fg_size).subsets() {
                    let cfg = Configuration::new(model.clone(), store.clone(), heap, avail);
                    if !valid_config(&cfg) {
                        continue;
                    }
                    if let Some(c) = constraint {
                        let fm = crate::semantics::frame_model(&cfg.eval_model(), defs)?;
                        if !fm.eval(&cfg.store, c)? {
                            continue;
                        }
                    }
                    out.push(cfg);
                }
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Heaplet enumeration
// ---------------------------------------------------------------------------

/// All heaplets with domain inside the universe and all field tables over the
/// domain; exhaustive and duplicate-free.
pub fn enumerate_heaplets(
    universe: u8,
    fields: &[String],
    bounds: &Bounds,
) -> Result<Vec<Heaplet>, EvalError> {
    bounds.check().map_err(EvalError::Model)?;
    let mut out = Vec::new();
    for dom in ElemSet::full(universe).subsets() {
        let cells: Vec<ElemId> = dom.iter().collect();
        let slots = cells.len() * fields.len();
        let radices = vec![universe as usize; slots];
        for digits in mixed_radix_iter(radices) {
            let mut h = Heaplet::empty();
            h.dom = dom;
            for f in fields {
                h.fields.insert(f.clone(), BTreeMap::new());
            }
            for (ci, &cell) in cells.iter().enumerate() {
                for (fi, f) in fields.iter().enumerate() {
                    h.fields
                        .get_mut(f)
                        .unwrap()
                        .insert(cell, digits[ci * fields.len() + fi] as ElemId);
                }
            }
            out.push(h);
            if out.len() > bounds.max_heaplets {
                return Err(EvalError::Model(ModelError::BoundsTooLarge(
                    "heaplet enumeration".to_owned(),
                )));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DEFAULT_INT_RANGE;

    fn sig() -> Arc<Signature> {
        Arc::new(Signature::new().with_field("next"))
    }

    #[test]
    fn reachable_cases() {
        let mut m = PreModel::new(sig(), 3, DEFAULT_INT_RANGE).unwrap();
        m.set_fn("next", &[Value::Elem(1)], Value::Elem(2)).unwrap();
        m.set_fn("next", &[Value::Elem(2)], Value::Elem(0)).unwrap();
        assert_eq!(reachable(&m, 0, &["next"]), ElemSet::EMPTY);
        assert_eq!(reachable(&m, 1, &["next"]), ElemSet::from_iter([1, 2]));
        // Cycle.
        m.set_fn("next", &[Value::Elem(2)], Value::Elem(1)).unwrap();
        assert_eq!(reachable(&m, 1, &["next"]), ElemSet::from_iter([1, 2]));
    }

    #[test]
    fn config_enumeration_smallest_case() {
        // fg 1 (only nil), no vars, no functions: exactly (H = {}, U = {}).
        let sig = Arc::new(Signature::new());
        let configs = enumerate_configs(
            sig,
            &[],
            &Bounds::new(1),
            &EnumFilter::mutables(),
            &DefinitionSet::new(),
            None,
        )
        .unwrap();
        assert_eq!(configs.len(), 1);
        assert_eq!(configs[0].heap, ElemSet::EMPTY);
        assert_eq!(configs[0].avail, ElemSet::EMPTY);
    }

    #[test]
    fn config_enumeration_false_constraint_is_empty() {
        let configs = enumerate_configs(
            sig(),
            &[],
            &Bounds::new(2),
            &EnumFilter::mutables(),
            &DefinitionSet::new(),
            Some(&Formula::False),
        )
        .unwrap();
        assert!(configs.is_empty());
    }

    #[test]
    fn config_enumeration_count_matches_closed_form() {
        // fg 2, no functions, one variable x. Counting by hand:
        //   x=nil: H={}: U in {{},{u1}} (2);  H={u1}: U={} (1).
        //   x=u1:  H={}: U={} (1);            H={u1}: U={} (1).
        let sig = Arc::new(Signature::new());
        let configs = enumerate_configs(
            sig,
            &[("x".to_owned(), Sort::Fg)],
            &Bounds::new(2),
            &EnumFilter::mutables(),
            &DefinitionSet::new(),
            None,
        )
        .unwrap();
        assert_eq!(configs.len(), 5);
        let distinct: BTreeSet<_> = configs.iter().map(|c| alloc::format!("{c:?}")).collect();
        assert_eq!(distinct.len(), configs.len());
    }

    #[test]
    fn heaplet_count_size_two_one_field() {
        // Universe of two locations, one field:
        // 1 (empty dom) + 2 doms * 2 tables + 1 dom * 4 tables = 9.
        let hs = enumerate_heaplets(2, &["next".to_owned()], &Bounds::new(2)).unwrap();
        assert_eq!(hs.len(), 9);
        assert_eq!(hs.iter().filter(|h| h.dom.is_empty()).count(), 1);
        let distinct: BTreeSet<_> = hs.iter().collect();
        assert_eq!(distinct.len(), 9);
    }
}
