//! A heap-mutating while language and its operational semantics.
//!
//! Configurations pair a model and store with the allocated set `H` and the
//! allocatable set `U`. Dereferencing outside `H` aborts; allocation picks
//! nondeterministically from `U` and gets stuck (no transition) when `U` is
//! empty. Loops run under an explicit fuel bound and exhaustion is reported
//! separately from stuckness.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::ast::{Formula, Sort, Term};
use crate::model::{Assignment, ElemSet, PreModel, Value};
use crate::semantics::{frame_model, EvalError};

/// Statements. Conditions are guard formulas over non-set sorts, evaluated
/// against the model and store.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stmt {
    Skip,
    /// `x := c` for a constant location.
    AssignConst { x: String, c: Term },
    /// `x := y`.
    AssignVar { x: String, y: String },
    /// `x := y.f`.
    Lookup { x: String, y: String, field: String },
    /// `v := be` for a background expression.
    AssignBg { v: String, expr: Term },
    /// `x.f := y`.
    Mutate { x: String, field: String, y: String },
    Alloc { x: String },
    Free { x: String },
    If {
        cond: Formula,
        then_branch: Box<Stmt>,
        else_branch: Box<Stmt>,
    },
    While {
        cond: Formula,
        invariant: Option<Formula>,
        body: Box<Stmt>,
    },
    Seq(Vec<Stmt>),
}

impl Stmt {
    pub fn seq(stmts: Vec<Stmt>) -> Stmt {
        Stmt::Seq(stmts)
    }

    pub fn is_basic(&self) -> bool {
        !matches!(self, Stmt::If { .. } | Stmt::While { .. } | Stmt::Seq(_))
    }

    /// Variables assigned anywhere in the statement.
    pub fn assigned_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_assigned(&mut out);
        out
    }

    fn collect_assigned(&self, out: &mut BTreeSet<String>) {
        match self {
            Stmt::AssignConst { x, .. }
            | Stmt::AssignVar { x, .. }
            | Stmt::Lookup { x, .. }
            | Stmt::Alloc { x } => {
                out.insert(x.clone());
            }
            Stmt::AssignBg { v, .. } => {
                out.insert(v.clone());
            }
            Stmt::Mutate { .. } | Stmt::Free { .. } | Stmt::Skip => {}
            Stmt::If { then_branch, else_branch, .. } => {
                then_branch.collect_assigned(out);
                else_branch.collect_assigned(out);
            }
            Stmt::While { body, .. } => body.collect_assigned(out),
            Stmt::Seq(v) => {
                for s in v {
                    s.collect_assigned(out);
                }
            }
        }
    }

    /// All variables mentioned (read or written) by the statement.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        let add_formula = |f: &Formula, out: &mut BTreeSet<String>| {
            for (n, _) in crate::ast::free_vars(f) {
                out.insert(n);
            }
        };
        match self {
            Stmt::Skip => {}
            Stmt::AssignConst { x, .. } => {
                out.insert(x.clone());
            }
            Stmt::AssignVar { x, y } => {
                out.insert(x.clone());
                out.insert(y.clone());
            }
            Stmt::Lookup { x, y, .. } => {
                out.insert(x.clone());
                out.insert(y.clone());
            }
            Stmt::AssignBg { v, expr } => {
                out.insert(v.clone());
                for (n, _) in crate::ast::free_vars_term(expr) {
                    out.insert(n);
                }
            }
            Stmt::Mutate { x, y, .. } => {
                out.insert(x.clone());
                out.insert(y.clone());
            }
            Stmt::Alloc { x } | Stmt::Free { x } => {
                out.insert(x.clone());
            }
            Stmt::If { cond, then_branch, else_branch } => {
                add_formula(cond, out);
                then_branch.collect_vars(out);
                else_branch.collect_vars(out);
            }
            Stmt::While { cond, invariant, body } => {
                add_formula(cond, out);
                if let Some(inv) = invariant {
                    add_formula(inv, out);
                }
                body.collect_vars(out);
            }
            Stmt::Seq(v) => {
                for s in v {
                    s.collect_vars(out);
                }
            }
        }
    }
}

/// Single-static-assignment lint: each location variable should be assigned
/// at most once in the program text, with while-loop bodies exempted.
/// Returns warnings, never errors.
pub fn ssa_lint(program: &Stmt) -> Vec<String> {
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut warnings = Vec::new();
    fn walk(s: &Stmt, seen: &mut BTreeSet<String>, warnings: &mut Vec<String>) {
        match s {
            Stmt::AssignConst { x, .. }
            | Stmt::AssignVar { x, .. }
            | Stmt::Lookup { x, .. }
            | Stmt::Alloc { x } => {
                if !seen.insert(x.clone()) {
                    warnings.push(alloc::format!("variable {x} assigned more than once"));
                }
            }
            Stmt::AssignBg { v, .. } => {
                if !seen.insert(v.clone()) {
                    warnings.push(alloc::format!("variable {v} assigned more than once"));
                }
            }
            Stmt::If { then_branch, else_branch, .. } => {
                walk(then_branch, seen, warnings);
                walk(else_branch, seen, warnings);
            }
            // Loop bodies are exempt.
            Stmt::While { .. } => {}
            Stmt::Seq(v) => {
                for s in v {
                    walk(s, seen, warnings);
                }
            }
            _ => {}
        }
    }
    walk(program, &mut seen, &mut warnings);
    warnings
}

/// A machine configuration: model, store, allocated set, allocatable set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Configuration {
    pub model: PreModel,
    pub store: Assignment,
    pub heap: ElemSet,
    pub avail: ElemSet,
}

impl Configuration {
    pub fn new(model: PreModel, store: Assignment, heap: ElemSet, avail: ElemSet) -> Self {
        Configuration { model, store, heap, avail }
    }

    /// The model with the allocatable-set constant bound, for formula
    /// evaluation; pair with [`Configuration::store`] as the assignment.
    pub fn eval_model(&self) -> PreModel {
        let mut m = self.model.clone();
        m.set_avail(self.avail);
        m
    }

    fn store_elem(&self, x: &str) -> Result<u8, EvalError> {
        match self.store.get(x) {
            Some(Value::Elem(e)) => Ok(*e),
            Some(_) => Err(EvalError::UnboundVariable(x.to_owned())),
            None => Err(EvalError::UnboundVariable(x.to_owned())),
        }
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(H={}, U={})", self.heap, self.avail)
    }
}

/// Validity of a configuration: store images and foreground constants lie
/// outside `U`, allocated locations do not point into `U`, `U` avoids `H`,
/// and neither nil nor any allocated location coincides with `U`; nil is
/// never allocated.
pub fn valid_config(cfg: &Configuration) -> bool {
    let u = cfg.avail;
    let nil = cfg.model.nil();
    if u.contains(nil) || cfg.heap.contains(nil) {
        return false;
    }
    if !u.inter(cfg.heap).is_empty() {
        return false;
    }
    for v in cfg.store.values() {
        if let Value::Elem(e) = v {
            if u.contains(*e) {
                return false;
            }
        }
    }
    for v in cfg.model.consts.values() {
        if let Value::Elem(e) = v {
            if u.contains(*e) {
                return false;
            }
        }
    }
    // Allocated locations do not point into U.
    for (fname, fsig) in &cfg.model.sig.funcs {
        if !fsig.mutable || fsig.ret != Sort::Fg {
            continue;
        }
        let table = &cfg.model.funcs[fname];
        for idx in 0..table.table.len() {
            let args = cfg.model.unpack_args(&fsig.args, idx);
            let touches_heap = args
                .iter()
                .any(|a| matches!(a, Value::Elem(e) if cfg.heap.contains(*e)));
            if touches_heap {
                if let Value::Elem(e) = table.table[idx] {
                    if u.contains(e) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Outcome of executing a statement.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Outcome {
    Final(Configuration),
    /// A dereference outside the allocated set.
    Abort,
    /// No transition available (allocation with nothing allocatable).
    Stuck,
}

/// Collected results of an exhaustive execution.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExecSet {
    pub finals: BTreeSet<Configuration>,
    pub abort: bool,
    pub stuck: bool,
    pub fuel_exhausted: bool,
}

impl ExecSet {
    pub fn outcomes(&self) -> BTreeSet<Outcome> {
        let mut out: BTreeSet<Outcome> = self
            .finals
            .iter()
            .cloned()
            .map(Outcome::Final)
            .collect();
        if self.abort {
            out.insert(Outcome::Abort);
        }
        if self.stuck {
            out.insert(Outcome::Stuck);
        }
        out
    }

    fn merge(&mut self, other: ExecSet) {
        self.finals.extend(other.finals);
        self.abort |= other.abort;
        self.stuck |= other.stuck;
        self.fuel_exhausted |= other.fuel_exhausted;
    }
}

/// Errors from program execution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunError {
    /// The while-unrolling budget ran out on some path; distinct from
    /// stuckness, which is a semantic outcome.
    FuelExhausted,
    Eval(EvalError),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::FuelExhausted => write!(f, "fuel exhausted"),
            RunError::Eval(e) => write!(f, "{e}"),
        }
    }
}

impl From<EvalError> for RunError {
    fn from(e: EvalError) -> Self {
        RunError::Eval(e)
    }
}

/// Evaluates a condition (a guard formula) against the configuration's model
/// and store.
pub fn eval_cond(cfg: &Configuration, cond: &Formula) -> Result<bool, EvalError> {
    let model = cfg.eval_model();
    let fm = frame_model(&model, &crate::ast::DefinitionSet::new())?;
    fm.eval(&cfg.store, cond)
}

fn exec_basic(cfg: &Configuration, stmt: &Stmt) -> Result<ExecSet, EvalError> {
    let mut out = ExecSet::default();
    match stmt {
        Stmt::Skip => {
            out.finals.insert(cfg.clone());
        }
        Stmt::AssignConst { x, c } => {
            let model = cfg.eval_model();
            let fm = frame_model(&model, &crate::ast::DefinitionSet::new())?;
            let v = fm.eval_term(&cfg.store, c)?;
            let mut next = cfg.clone();
            next.store.insert(x.clone(), v);
            out.finals.insert(next);
        }
        Stmt::AssignVar { x, y } => {
            let v = cfg
                .store
                .get(y)
                .copied()
                .ok_or_else(|| EvalError::UnboundVariable(y.clone()))?;
            let mut next = cfg.clone();
            next.store.insert(x.clone(), v);
            out.finals.insert(next);
        }
        Stmt::Lookup { x, y, field } => {
            let uy = cfg.store_elem(y)?;
            if !cfg.heap.contains(uy) {
                out.abort = true;
            } else {
                let v = cfg.model.lookup_fn(field, &[Value::Elem(uy)])?;
                let mut next = cfg.clone();
                next.store.insert(x.clone(), v);
                out.finals.insert(next);
            }
        }
        Stmt::AssignBg { v, expr } => {
            let model = cfg.eval_model();
            let fm = frame_model(&model, &crate::ast::DefinitionSet::new())?;
            let value = fm.eval_term(&cfg.store, expr)?;
            let mut next = cfg.clone();
            next.store.insert(v.clone(), value);
            out.finals.insert(next);
        }
        Stmt::Mutate { x, field, y } => {
            let ux = cfg.store_elem(x)?;
            let vy = cfg
                .store
                .get(y)
                .copied()
                .ok_or_else(|| EvalError::UnboundVariable(y.clone()))?;
            if !cfg.heap.contains(ux) {
                out.abort = true;
            } else {
                let mut next = cfg.clone();
                next.model.set_fn(field, &[Value::Elem(ux)], vy)?;
                out.finals.insert(next);
            }
        }
        Stmt::Alloc { x } => {
            if cfg.avail.is_empty() {
                out.stuck = true;
            } else {
                for a in cfg.avail.iter() {
                    let mut next = cfg.clone();
                    next.store.insert(x.clone(), Value::Elem(a));
                    let fields: Vec<(String, Sort)> = cfg
                        .model
                        .sig
                        .funcs
                        .iter()
                        .filter(|(_, s)| s.mutable && s.args == [Sort::Fg])
                        .map(|(n, s)| (n.clone(), s.ret))
                        .collect();
                    for (fname, ret) in fields {
                        let dv = next.model.default_value(ret);
                        next.model.set_fn(&fname, &[Value::Elem(a)], dv)?;
                    }
                    next.heap.insert(a);
                    next.avail.remove(a);
                    out.finals.insert(next);
                }
            }
        }
        Stmt::Free { x } => {
            let ux = cfg.store_elem(x)?;
            if !cfg.heap.contains(ux) {
                out.abort = true;
            } else {
                let mut next = cfg.clone();
                next.heap.remove(ux);
                out.finals.insert(next);
            }
        }
        _ => unreachable!("exec_basic on composite statement"),
    }
    Ok(out)
}

/// One transition set of a basic statement from a configuration.
pub fn step(cfg: &Configuration, stmt: &Stmt) -> Result<BTreeSet<Outcome>, EvalError> {
    assert!(stmt.is_basic(), "step applies to basic statements; use run");
    Ok(exec_basic(cfg, stmt)?.outcomes())
}

fn exec(cfg: &Configuration, stmt: &Stmt, fuel: u32) -> Result<ExecSet, EvalError> {
    if stmt.is_basic() {
        return exec_basic(cfg, stmt);
    }
    let mut out = ExecSet::default();
    match stmt {
        Stmt::Seq(stmts) => {
            let mut states: BTreeSet<Configuration> = BTreeSet::new();
            states.insert(cfg.clone());
            for s in stmts {
                let mut next: BTreeSet<Configuration> = BTreeSet::new();
                for c in &states {
                    let r = exec(c, s, fuel)?;
                    out.abort |= r.abort;
                    out.stuck |= r.stuck;
                    out.fuel_exhausted |= r.fuel_exhausted;
                    next.extend(r.finals);
                }
                states = next;
            }
            out.finals.extend(states);
        }
        Stmt::If { cond, then_branch, else_branch } => {
            let branch = if eval_cond(cfg, cond)? { then_branch } else { else_branch };
            out.merge(exec(cfg, branch, fuel)?);
        }
        Stmt::While { cond, body, .. } => {
            if !eval_cond(cfg, cond)? {
                out.finals.insert(cfg.clone());
            } else if fuel == 0 {
                out.fuel_exhausted = true;
            } else {
                let after_body = exec(cfg, body, fuel)?;
                out.abort |= after_body.abort;
                out.stuck |= after_body.stuck;
                out.fuel_exhausted |= after_body.fuel_exhausted;
                for c in after_body.finals {
                    out.merge(exec(&c, stmt, fuel - 1)?);
                }
            }
        }
        _ => unreachable!(),
    }
    Ok(out)
}

/// Exhaustive execution: all outcomes reachable through the allocation
/// nondeterminism, with while loops unrolled under the fuel bound. Reports
/// `FuelExhausted` when any path ran out of budget.
pub fn run(cfg: &Configuration, program: &Stmt, fuel: u32) -> Result<BTreeSet<Outcome>, RunError> {
    let r = exec(cfg, program, fuel)?;
    if r.fuel_exhausted {
        return Err(RunError::FuelExhausted);
    }
    Ok(r.outcomes())
}

/// Exhaustive execution keeping the partial outcome set alongside the
/// exhaustion flag; used by the bounded triple checker.
pub fn run_collect(cfg: &Configuration, program: &Stmt, fuel: u32) -> Result<ExecSet, EvalError> {
    exec(cfg, program, fuel)
}

/// One entry of a deterministic trace: the statement executed and the
/// allocated/allocatable sets after it.
#[derive(Debug, Clone)]
pub struct TraceEntry {
    pub stmt: Stmt,
    pub heap: ElemSet,
    pub avail: ElemSet,
}

/// Runs a single canonical path (allocation picks the smallest available
/// location), recording one trace entry per executed basic statement.
pub fn run_trace(
    cfg: &Configuration,
    program: &Stmt,
    fuel: u32,
) -> Result<(Vec<TraceEntry>, Outcome), RunError> {
    let mut trace = Vec::new();
    let mut fuel = fuel;
    let out = trace_stmt(cfg.clone(), program, &mut fuel, &mut trace)?;
    Ok((trace, out))
}

fn trace_stmt(
    cfg: Configuration,
    stmt: &Stmt,
    fuel: &mut u32,
    trace: &mut Vec<TraceEntry>,
) -> Result<Outcome, RunError> {
    match stmt {
        Stmt::Seq(stmts) => {
            let mut cur = cfg;
            for s in stmts {
                match trace_stmt(cur, s, fuel, trace)? {
                    Outcome::Final(c) => cur = c,
                    other => return Ok(other),
                }
            }
            Ok(Outcome::Final(cur))
        }
        Stmt::If { cond, then_branch, else_branch } => {
            let branch = if eval_cond(&cfg, cond)? { then_branch } else { else_branch };
            trace_stmt(cfg, branch, fuel, trace)
        }
        Stmt::While { cond, body, .. } => {
            let mut cur = cfg;
            loop {
                if !eval_cond(&cur, cond)? {
                    return Ok(Outcome::Final(cur));
                }
                if *fuel == 0 {
                    return Err(RunError::FuelExhausted);
                }
                *fuel -= 1;
                match trace_stmt(cur, body, fuel, trace)? {
                    Outcome::Final(c) => cur = c,
                    other => return Ok(other),
                }
            }
        }
        basic => {
            let r = exec_basic(&cfg, basic)?;
            // Canonical choice: smallest allocated location first.
            let outcome = if let Some(c) = r.finals.into_iter().next() {
                Outcome::Final(c)
            } else if r.abort {
                Outcome::Abort
            } else {
                Outcome::Stuck
            };
            if let Outcome::Final(c) = &outcome {
                trace.push(TraceEntry { stmt: basic.clone(), heap: c.heap, avail: c.avail });
            }
            Ok(outcome)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Signature;
    use crate::model::DEFAULT_INT_RANGE;
    use alloc::sync::Arc;
    use alloc::vec;

    fn sig() -> Arc<Signature> {
        Arc::new(Signature::new().with_field("next"))
    }

    fn cfg_with(store: &[(&str, u8)], heap: &[u8], avail: &[u8]) -> Configuration {
        let model = PreModel::new(sig(), 4, DEFAULT_INT_RANGE).unwrap();
        Configuration {
            model,
            store: store
                .iter()
                .map(|(n, e)| ((*n).to_owned(), Value::Elem(*e)))
                .collect(),
            heap: ElemSet::from_iter(heap.iter().copied()),
            avail: ElemSet::from_iter(avail.iter().copied()),
        }
    }

    #[test]
    fn validity_examples() {
        // Everything nil, empty heap, empty avail: valid.
        assert!(valid_config(&cfg_with(&[("x", 0)], &[], &[])));
        // nil in U: invalid.
        assert!(!valid_config(&cfg_with(&[], &[], &[0])));
        // A store variable inside U: invalid.
        assert!(!valid_config(&cfg_with(&[("x", 2)], &[], &[2])));
        // An allocated location pointing into U: invalid.
        let mut c = cfg_with(&[], &[1], &[2]);
        c.model.set_fn("next", &[Value::Elem(1)], Value::Elem(2)).unwrap();
        assert!(!valid_config(&c));
        // Same pointer from an unallocated cell is fine.
        let mut c = cfg_with(&[], &[3], &[2]);
        c.model.set_fn("next", &[Value::Elem(1)], Value::Elem(2)).unwrap();
        assert!(valid_config(&c));
    }

    #[test]
    fn lookup_aborts_outside_heap() {
        let c = cfg_with(&[("x", 0), ("y", 2)], &[], &[]);
        let out = step(&c, &Stmt::Lookup {
            x: "x".to_owned(),
            y: "y".to_owned(),
            field: "next".to_owned(),
        })
        .unwrap();
        assert_eq!(out, [Outcome::Abort].into_iter().collect());
    }

    #[test]
    fn mutation_aborts_when_target_unallocated() {
        let c = cfg_with(&[("x", 2), ("y", 1)], &[1], &[]);
        let out = step(&c, &Stmt::Mutate {
            x: "x".to_owned(),
            field: "next".to_owned(),
            y: "y".to_owned(),
        })
        .unwrap();
        assert_eq!(out, [Outcome::Abort].into_iter().collect());
    }

    #[test]
    fn alloc_with_empty_avail_gets_stuck() {
        let c = cfg_with(&[("x", 0)], &[], &[]);
        let out = step(&c, &Stmt::Alloc { x: "x".to_owned() }).unwrap();
        assert_eq!(out, [Outcome::Stuck].into_iter().collect());
    }

    #[test]
    fn alloc_forks_per_available_location() {
        let c = cfg_with(&[("x", 0)], &[], &[2, 3]);
        let out = step(&c, &Stmt::Alloc { x: "x".to_owned() }).unwrap();
        assert_eq!(out.len(), 2);
        for o in &out {
            match o {
                Outcome::Final(c2) => {
                    let a = c2.store["x"].as_elem().unwrap();
                    assert!(c2.heap.contains(a));
                    assert!(!c2.avail.contains(a));
                    // Fields of the fresh cell default to nil.
                    assert_eq!(
                        c2.model.lookup_fn("next", &[Value::Elem(a)]).unwrap(),
                        Value::Elem(0)
                    );
                    assert!(valid_config(c2));
                }
                _ => panic!("expected finals only"),
            }
        }
    }

    #[test]
    fn assign_var_updates_store_only() {
        let c = cfg_with(&[("x", 0), ("y", 1)], &[1], &[2]);
        let out = step(&c, &Stmt::AssignVar { x: "x".to_owned(), y: "y".to_owned() }).unwrap();
        match out.into_iter().next().unwrap() {
            Outcome::Final(c2) => {
                assert_eq!(c2.store["x"], Value::Elem(1));
                assert_eq!(c2.heap, c.heap);
                assert_eq!(c2.avail, c.avail);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn free_then_dereference_aborts() {
        let c = cfg_with(&[("x", 1), ("y", 0)], &[1], &[]);
        let prog = Stmt::seq(vec![
            Stmt::Free { x: "x".to_owned() },
            Stmt::Lookup { x: "y".to_owned(), y: "x".to_owned(), field: "next".to_owned() },
        ]);
        let out = run(&c, &prog, 8).unwrap();
        assert_eq!(out, [Outcome::Abort].into_iter().collect());
    }

    #[test]
    fn preservation_on_valid_configs() {
        // Every non-abort outcome of a basic step on a valid configuration is
        // valid.
        let statements = [
            Stmt::AssignVar { x: "x".to_owned(), y: "y".to_owned() },
            Stmt::Lookup { x: "x".to_owned(), y: "y".to_owned(), field: "next".to_owned() },
            Stmt::Mutate { x: "x".to_owned(), field: "next".to_owned(), y: "y".to_owned() },
            Stmt::Alloc { x: "x".to_owned() },
            Stmt::Free { x: "x".to_owned() },
        ];
        let mut checked = 0usize;
        for hx in [0u8, 1] {
            for hy in [1u8, 2] {
                let mut c = cfg_with(&[("x", hx), ("y", hy)], &[1, 2], &[3]);
                c.model.set_fn("next", &[Value::Elem(1)], Value::Elem(2)).unwrap();
                if !valid_config(&c) {
                    continue;
                }
                for s in &statements {
                    for o in step(&c, s).unwrap() {
                        if let Outcome::Final(c2) = o {
                            checked += 1;
                            assert!(valid_config(&c2), "stmt {s:?} broke validity");
                        }
                    }
                }
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn deterministic_programs_have_singleton_outcomes() {
        let c = cfg_with(&[("x", 0), ("y", 1), ("z", 2)], &[1, 2], &[]);
        let prog = Stmt::seq(vec![
            Stmt::AssignVar { x: "x".to_owned(), y: "y".to_owned() },
            Stmt::AssignVar { x: "y".to_owned(), y: "z".to_owned() },
        ]);
        let out = run(&c, &prog, 4).unwrap();
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn while_loop_terminates_with_fuel() {
        // x := y; while (x != nil) do x := x.next  over the chain 2 -> 1 -> 0
        let mut c = cfg_with(&[("x", 0), ("y", 2)], &[1, 2], &[]);
        c.model.set_fn("next", &[Value::Elem(2)], Value::Elem(1)).unwrap();
        c.model.set_fn("next", &[Value::Elem(1)], Value::Elem(0)).unwrap();
        let prog = Stmt::seq(vec![
            Stmt::AssignVar { x: "x".to_owned(), y: "y".to_owned() },
            Stmt::While {
                cond: Formula::ne(Term::var("x"), Term::nil()),
                invariant: None,
                body: Box::new(Stmt::Lookup {
                    x: "x".to_owned(),
                    y: "x".to_owned(),
                    field: "next".to_owned(),
                }),
            },
        ]);
        let out = run(&c, &prog, 8).unwrap();
        assert_eq!(out.len(), 1);
        match out.into_iter().next().unwrap() {
            Outcome::Final(c2) => assert_eq!(c2.store["x"], Value::Elem(0)),
            _ => panic!(),
        }
        // Starvation: fuel 1 is not enough for two iterations.
        let mut c2 = c.clone();
        c2.store.insert("x".to_owned(), Value::Elem(0));
        assert_eq!(run(&c, &prog, 1), Err(RunError::FuelExhausted));
    }

    #[test]
    fn ssa_lint_flags_straightline_reassignment_only() {
        let reassign = Stmt::seq(vec![
            Stmt::AssignVar { x: "x".to_owned(), y: "y".to_owned() },
            Stmt::AssignVar { x: "x".to_owned(), y: "z".to_owned() },
        ]);
        assert_eq!(ssa_lint(&reassign).len(), 1);
        let in_loop = Stmt::seq(vec![
            Stmt::AssignVar { x: "j".to_owned(), y: "y".to_owned() },
            Stmt::While {
                cond: Formula::True,
                invariant: None,
                body: Box::new(Stmt::AssignVar { x: "j".to_owned(), y: "z".to_owned() }),
            },
        ]);
        assert!(ssa_lint(&in_loop).is_empty());
    }
}
