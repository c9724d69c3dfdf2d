//! A precise separation-logic front end.
//!
//! The fragment has no negation or disjunction at the heap level: stack
//! formulas, `emp`, points-to atoms, stack-guarded conditionals, plain and
//! separating conjunction, unique-heaplet inductive predicates, and guarded
//! existentials of the shape `exists y. (x |-f-> y) * phi`. Satisfaction is
//! the standard tight-heaplet semantics; every satisfiable formula has a
//! unique minimum heaplet per store, which the translation into frame logic
//! exposes as the support of the translated formula.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::ast::{Definition, DefinitionSet, Formula, Signature, Sort, Term, NIL};
use crate::model::{Assignment, ElemId, ElemSet, PreModel, Value};
use crate::semantics::EvalError;

/// Heap-independent formulas over the store. `nil` is a legal name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum StackFormula {
    True,
    False,
    Eq(String, String),
    And(Box<StackFormula>, Box<StackFormula>),
    Or(Box<StackFormula>, Box<StackFormula>),
    Not(Box<StackFormula>),
}

impl StackFormula {
    pub fn ne(a: &str, b: &str) -> StackFormula {
        StackFormula::Not(Box::new(StackFormula::Eq(a.to_owned(), b.to_owned())))
    }
}

/// Formulas of the precise fragment.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum SlFormula {
    /// Stack formulas hold on every heaplet (imprecise).
    Stack(StackFormula),
    /// The empty heaplet, and only it.
    Emp,
    /// `x |-f-> y`: the heaplet is exactly the cell of `x`.
    PointsTo { x: String, field: String, y: String },
    /// Conditional on a stack formula.
    Ite(StackFormula, Box<SlFormula>, Box<SlFormula>),
    /// Both conjuncts on the same heaplet.
    And(Box<SlFormula>, Box<SlFormula>),
    /// Separating conjunction: a disjoint split of the heaplet.
    Star(Box<SlFormula>, Box<SlFormula>),
    /// Application of a unary inductive predicate.
    Pred { name: String, arg: String },
    /// `exists y. (x |-f-> y) * phi`.
    ExistsPointsTo {
        y: String,
        x: String,
        field: String,
        body: Box<SlFormula>,
    },
}

impl SlFormula {
    pub fn star(a: SlFormula, b: SlFormula) -> SlFormula {
        SlFormula::Star(Box::new(a), Box::new(b))
    }
    pub fn and(a: SlFormula, b: SlFormula) -> SlFormula {
        SlFormula::And(Box::new(a), Box::new(b))
    }
    pub fn points_to(x: &str, field: &str, y: &str) -> SlFormula {
        SlFormula::PointsTo { x: x.to_owned(), field: field.to_owned(), y: y.to_owned() }
    }
    pub fn pred(name: &str, arg: &str) -> SlFormula {
        SlFormula::Pred { name: name.to_owned(), arg: arg.to_owned() }
    }

    /// Field names mentioned anywhere in the formula.
    pub fn fields(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_fields(&mut out);
        out
    }

    fn collect_fields(&self, out: &mut BTreeSet<String>) {
        match self {
            SlFormula::Stack(_) | SlFormula::Emp => {}
            SlFormula::PointsTo { field, .. } => {
                out.insert(field.clone());
            }
            SlFormula::Ite(_, a, b) | SlFormula::And(a, b) | SlFormula::Star(a, b) => {
                a.collect_fields(out);
                b.collect_fields(out);
            }
            SlFormula::Pred { .. } => {}
            SlFormula::ExistsPointsTo { field, body, .. } => {
                out.insert(field.clone());
                body.collect_fields(out);
            }
        }
    }

    /// Free location variables (the existential binds its witness).
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let add = |n: &String, bound: &Vec<String>, out: &mut BTreeSet<String>| {
            if n != NIL && !bound.contains(n) {
                out.insert(n.clone());
            }
        };
        match self {
            SlFormula::Stack(sf) => stack_vars(sf, bound, out),
            SlFormula::Emp => {}
            SlFormula::PointsTo { x, y, .. } => {
                add(x, bound, out);
                add(y, bound, out);
            }
            SlFormula::Ite(sf, a, b) => {
                stack_vars(sf, bound, out);
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            SlFormula::And(a, b) | SlFormula::Star(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            SlFormula::Pred { arg, .. } => add(arg, bound, out),
            SlFormula::ExistsPointsTo { y, x, body, .. } => {
                add(x, bound, out);
                bound.push(y.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }
}

fn stack_vars(sf: &StackFormula, bound: &[String], out: &mut BTreeSet<String>) {
    match sf {
        StackFormula::True | StackFormula::False => {}
        StackFormula::Eq(a, b) => {
            for n in [a, b] {
                if n != NIL && !bound.contains(n) {
                    out.insert(n.clone());
                }
            }
        }
        StackFormula::And(a, b) | StackFormula::Or(a, b) => {
            stack_vars(a, bound, out);
            stack_vars(b, bound, out);
        }
        StackFormula::Not(a) => stack_vars(a, bound, out),
    }
}

/// A named unary inductive definition in the fragment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlDef {
    pub name: String,
    pub param: String,
    pub body: SlFormula,
}

/// A set of separation-logic definitions, at most one per name.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SlDefs {
    pub defs: BTreeMap<String, SlDef>,
}

impl SlDefs {
    pub fn new() -> SlDefs {
        SlDefs::default()
    }
    pub fn insert(&mut self, def: SlDef) {
        self.defs.insert(def.name.clone(), def);
    }
    pub fn get(&self, name: &str) -> Option<&SlDef> {
        self.defs.get(name)
    }
}

/// Errors from the separation-logic operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PslError {
    UnknownPredicate(String),
    UnknownVariable(String),
    /// Satisfying heaplets exist but no minimum one; the fragment is built so
    /// this cannot happen, and hitting it is treated as a failure.
    NoMinimum,
    Bounds(String),
    Eval(EvalError),
}

impl fmt::Display for PslError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PslError::UnknownPredicate(n) => write!(f, "unknown predicate: {n}"),
            PslError::UnknownVariable(n) => write!(f, "unknown variable: {n}"),
            PslError::NoMinimum => write!(f, "satisfying heaplets have no minimum"),
            PslError::Bounds(m) => write!(f, "bounds too large: {m}"),
            PslError::Eval(e) => write!(f, "{e}"),
        }
    }
}

impl From<EvalError> for PslError {
    fn from(e: EvalError) -> Self {
        PslError::Eval(e)
    }
}

/// A heaplet: an allocated domain and per-field tables defined exactly on it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Heaplet {
    pub dom: ElemSet,
    pub fields: BTreeMap<String, BTreeMap<ElemId, ElemId>>,
}

impl Heaplet {
    pub fn empty() -> Heaplet {
        Heaplet::default()
    }

    /// Restriction of the heaplet to a subdomain.
    pub fn restrict(&self, dom: ElemSet) -> Heaplet {
        let mut out = Heaplet::empty();
        out.dom = self.dom.inter(dom);
        for (f, table) in &self.fields {
            let sub: BTreeMap<ElemId, ElemId> = table
                .iter()
                .filter(|(k, _)| out.dom.contains(**k))
                .map(|(k, v)| (*k, *v))
                .collect();
            out.fields.insert(f.clone(), sub);
        }
        out
    }

    /// Subheap order: smaller domain, agreeing field values on it.
    pub fn is_subheap(&self, other: &Heaplet) -> bool {
        if !self.dom.is_subset(other.dom) {
            return false;
        }
        for (f, table) in &self.fields {
            for (k, v) in table {
                match other.fields.get(f).and_then(|t| t.get(k)) {
                    Some(w) if w == v => {}
                    _ => return false,
                }
            }
        }
        true
    }

    /// Disjoint union; `None` when domains overlap.
    pub fn disjoint_union(&self, other: &Heaplet) -> Option<Heaplet> {
        if !self.dom.inter(other.dom).is_empty() {
            return None;
        }
        let mut out = self.clone();
        out.dom = self.dom.union(other.dom);
        for (f, table) in &other.fields {
            let dst = out.fields.entry(f.clone()).or_default();
            for (k, v) in table {
                dst.insert(*k, *v);
            }
        }
        Some(out)
    }
}

impl fmt::Display for Heaplet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dom={}", self.dom)?;
        for (name, table) in &self.fields {
            for (k, v) in table {
                write!(f, " {name}(u{k})=u{v}")?;
            }
        }
        Ok(())
    }
}

/// A store: location variables to elements.
pub type Store = BTreeMap<String, ElemId>;

fn store_elem(store: &Store, name: &str) -> Result<ElemId, PslError> {
    if name == NIL {
        return Ok(0);
    }
    store
        .get(name)
        .copied()
        .ok_or_else(|| PslError::UnknownVariable(name.to_owned()))
}

pub fn eval_stack(store: &Store, sf: &StackFormula) -> Result<bool, PslError> {
    Ok(match sf {
        StackFormula::True => true,
        StackFormula::False => false,
        StackFormula::Eq(a, b) => store_elem(store, a)? == store_elem(store, b)?,
        StackFormula::And(a, b) => eval_stack(store, a)? && eval_stack(store, b)?,
        StackFormula::Or(a, b) => eval_stack(store, a)? || eval_stack(store, b)?,
        StackFormula::Not(a) => !eval_stack(store, a)?,
    })
}

/// Satisfaction evaluator with the inductive tables precomputed as a least
/// fixpoint over (element, heaplet) pairs.
pub struct SlEvaluator {
    universe: u8,
    fields: Vec<String>,
    tables: BTreeMap<String, BTreeSet<(ElemId, Heaplet)>>,
}

impl SlEvaluator {
    /// Builds the evaluator: enumerates every heaplet over the universe and
    /// iterates the definitions to their least fixpoint.
    pub fn new(universe: u8, fields: &[String], defs: &SlDefs) -> Result<SlEvaluator, PslError> {
        let heaplets = all_heaplets(universe, fields)?;
        let mut tables: BTreeMap<String, BTreeSet<(ElemId, Heaplet)>> = defs
            .defs
            .keys()
            .map(|n| (n.clone(), BTreeSet::new()))
            .collect();
        loop {
            let mut changed = false;
            for def in defs.defs.values() {
                let mut grown: Vec<(ElemId, Heaplet)> = Vec::new();
                for u in 0..universe {
                    for h in &heaplets {
                        if tables[&def.name].contains(&(u, h.clone())) {
                            continue;
                        }
                        let mut store = Store::new();
                        store.insert(def.param.clone(), u);
                        let ev = SlEvaluator {
                            universe,
                            fields: fields.to_vec(),
                            tables: tables.clone(),
                        };
                        if ev.sat(&store, h, &def.body)? {
                            grown.push((u, h.clone()));
                        }
                    }
                }
                if !grown.is_empty() {
                    changed = true;
                    tables.get_mut(&def.name).unwrap().extend(grown);
                }
            }
            if !changed {
                break;
            }
        }
        Ok(SlEvaluator { universe, fields: fields.to_vec(), tables })
    }

    /// Tight-heaplet satisfaction.
    pub fn sat(&self, store: &Store, h: &Heaplet, phi: &SlFormula) -> Result<bool, PslError> {
        Ok(match phi {
            SlFormula::Stack(sf) => eval_stack(store, sf)?,
            SlFormula::Emp => h.dom.is_empty(),
            SlFormula::PointsTo { x, field, y } => {
                let ux = store_elem(store, x)?;
                let uy = store_elem(store, y)?;
                h.dom == ElemSet::singleton(ux)
                    && h.fields.get(field).and_then(|t| t.get(&ux)) == Some(&uy)
            }
            SlFormula::Ite(sf, a, b) => {
                if eval_stack(store, sf)? {
                    self.sat(store, h, a)?
                } else {
                    self.sat(store, h, b)?
                }
            }
            SlFormula::And(a, b) => self.sat(store, h, a)? && self.sat(store, h, b)?,
            SlFormula::Star(a, b) => {
                let mut found = false;
                for d1 in h.dom.subsets() {
                    let h1 = h.restrict(d1);
                    let h2 = h.restrict(h.dom.diff(d1));
                    if self.sat(store, &h1, a)? && self.sat(store, &h2, b)? {
                        found = true;
                        break;
                    }
                }
                found
            }
            SlFormula::Pred { name, arg } => {
                let u = store_elem(store, arg)?;
                self.tables
                    .get(name)
                    .ok_or_else(|| PslError::UnknownPredicate(name.clone()))?
                    .contains(&(u, h.clone()))
            }
            SlFormula::ExistsPointsTo { y, x, field, body } => {
                let ux = store_elem(store, x)?;
                if !h.dom.contains(ux) {
                    return Ok(false);
                }
                let Some(&v) = h.fields.get(field).and_then(|t| t.get(&ux)) else {
                    return Ok(false);
                };
                let rest = h.restrict(h.dom.diff(ElemSet::singleton(ux)));
                let mut store2 = store.clone();
                store2.insert(y.clone(), v);
                self.sat(&store2, &rest, body)?
            }
        })
    }

    pub fn universe(&self) -> u8 {
        self.universe
    }

    pub fn fields(&self) -> &[String] {
        &self.fields
    }

    /// The lfp rows of one predicate, for the unique-heaplet check.
    pub fn rows(&self, name: &str) -> Option<&BTreeSet<(ElemId, Heaplet)>> {
        self.tables.get(name)
    }
}

fn all_heaplets(universe: u8, fields: &[String]) -> Result<Vec<Heaplet>, PslError> {
    let mut out = Vec::new();
    for dom in ElemSet::full(universe).subsets() {
        let cells: Vec<ElemId> = dom.iter().collect();
        let slots = cells.len() * fields.len();
        let total = (universe as u64).checked_pow(slots as u32).unwrap_or(u64::MAX);
        if total > 5_000_000 {
            return Err(PslError::Bounds(format!("{total} heaplets for one domain")));
        }
        let mut counter = vec![0u8; slots];
        loop {
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
                        .insert(cell, counter[ci * fields.len() + fi]);
                }
            }
            out.push(h);
            let mut i = slots;
            let mut wrapped = slots == 0;
            while i > 0 {
                i -= 1;
                counter[i] += 1;
                if counter[i] < universe {
                    break;
                }
                counter[i] = 0;
                if i == 0 {
                    wrapped = true;
                }
            }
            if wrapped {
                break;
            }
        }
    }
    Ok(out)
}

/// Convenience satisfaction check that builds a throwaway evaluator.
pub fn eval_sl(
    universe: u8,
    store: &Store,
    h: &Heaplet,
    phi: &SlFormula,
    defs: &SlDefs,
) -> Result<bool, PslError> {
    let fields: Vec<String> = collect_all_fields(phi, defs).into_iter().collect();
    let ev = SlEvaluator::new(universe, &fields, defs)?;
    ev.sat(store, h, phi)
}

pub fn collect_all_fields(phi: &SlFormula, defs: &SlDefs) -> BTreeSet<String> {
    let mut fields = phi.fields();
    for d in defs.defs.values() {
        fields.extend(d.body.fields());
    }
    fields
}

/// Report from the fragment validation.
#[derive(Debug, Clone, Default)]
pub struct PslReport {
    pub violations: Vec<String>,
}

impl PslReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Validates fragment membership: all predicate references resolve, the
/// definitions are unary over fragment bodies, and (semantically, at the
/// given universe size) each inductive predicate determines a unique heaplet
/// per argument within any common ambient heap.
pub fn validate_psl(phi: &SlFormula, defs: &SlDefs, universe: u8) -> Result<PslReport, PslError> {
    let mut report = PslReport::default();
    fn check_refs(phi: &SlFormula, defs: &SlDefs, report: &mut PslReport) {
        match phi {
            SlFormula::Pred { name, .. } => {
                if defs.get(name).is_none() {
                    report.violations.push(format!("unknown predicate {name}"));
                }
            }
            SlFormula::Ite(_, a, b) | SlFormula::And(a, b) | SlFormula::Star(a, b) => {
                check_refs(a, defs, report);
                check_refs(b, defs, report);
            }
            SlFormula::ExistsPointsTo { body, .. } => check_refs(body, defs, report),
            _ => {}
        }
    }
    check_refs(phi, defs, &mut report);
    for d in defs.defs.values() {
        check_refs(&d.body, defs, &mut report);
    }
    if !report.is_ok() {
        return Ok(report);
    }
    // Unique-heaplet side condition, brute force at the given universe:
    // within each total ambient heap, at most one restriction satisfies the
    // predicate per argument.
    let fields: Vec<String> = collect_all_fields(phi, defs).into_iter().collect();
    let ev = SlEvaluator::new(universe, &fields, defs)?;
    'outer: for name in defs.defs.keys() {
        let rows = ev.rows(name).unwrap();
        for ambient in all_total_heaps(universe, &fields)? {
            for u in 0..universe {
                let count = rows
                    .iter()
                    .filter(|(e, h)| *e == u && h.is_subheap(&ambient))
                    .count();
                if count > 1 {
                    report.violations.push(format!(
                        "predicate {name} has {count} satisfying heaplets at u{u} inside one heap"
                    ));
                    continue 'outer;
                }
            }
        }
    }
    Ok(report)
}

/// All total heaps: heaplets whose domain is the whole universe.
pub fn all_total_heaps(universe: u8, fields: &[String]) -> Result<Vec<Heaplet>, PslError> {
    Ok(all_heaplets(universe, fields)?
        .into_iter()
        .filter(|h| h.dom == ElemSet::full(universe))
        .collect())
}

/// The precision predicate: a stack-level formula true exactly when the
/// formula has at most one satisfying heaplet for the given store.
pub fn precision(phi: &SlFormula) -> StackFormula {
    match phi {
        SlFormula::Stack(_) => StackFormula::False,
        SlFormula::Emp => StackFormula::True,
        SlFormula::PointsTo { .. } => StackFormula::True,
        SlFormula::Ite(sf, a, b) => StackFormula::Or(
            Box::new(StackFormula::And(Box::new(sf.clone()), Box::new(precision(a)))),
            Box::new(StackFormula::And(
                Box::new(StackFormula::Not(Box::new(sf.clone()))),
                Box::new(precision(b)),
            )),
        ),
        SlFormula::And(a, b) => StackFormula::Or(Box::new(precision(a)), Box::new(precision(b))),
        SlFormula::Star(a, b) => StackFormula::And(Box::new(precision(a)), Box::new(precision(b))),
        SlFormula::Pred { .. } => StackFormula::True,
        SlFormula::ExistsPointsTo { body, .. } => precision(body),
    }
}

fn stack_to_fl(sf: &StackFormula) -> Formula {
    match sf {
        StackFormula::True => Formula::True,
        StackFormula::False => Formula::False,
        StackFormula::Eq(a, b) => Formula::eq(loc_term(a), loc_term(b)),
        StackFormula::And(a, b) => Formula::and(stack_to_fl(a), stack_to_fl(b)),
        StackFormula::Or(a, b) => Formula::or(stack_to_fl(a), stack_to_fl(b)),
        StackFormula::Not(a) => Formula::not(stack_to_fl(a)),
    }
}

fn loc_term(name: &str) -> Term {
    if name == NIL {
        Term::nil()
    } else {
        Term::var(name)
    }
}

/// Translation into frame logic. Returns the translated formula and the
/// frame-logic definitions generated for the inductive predicates (same
/// names, unary over the foreground sort).
pub fn translate_psl(phi: &SlFormula, defs: &SlDefs) -> (Formula, DefinitionSet) {
    let mut fl_defs = DefinitionSet::new();
    for d in defs.defs.values() {
        let body = translate(&d.body);
        let _ = fl_defs.insert(Definition {
            name: d.name.clone(),
            params: vec![(d.param.clone(), Sort::Fg)],
            body,
        });
    }
    (translate(phi), fl_defs)
}

fn translate(phi: &SlFormula) -> Formula {
    match phi {
        SlFormula::Stack(sf) => stack_to_fl(sf),
        SlFormula::Emp => Formula::True,
        SlFormula::PointsTo { x, field, y } => {
            Formula::eq(Term::app1(field, loc_term(x)), loc_term(y))
        }
        SlFormula::Ite(sf, a, b) => Formula::ite(stack_to_fl(sf), translate(a), translate(b)),
        SlFormula::And(a, b) => {
            let ta = translate(a);
            let tb = translate(b);
            let pa = stack_to_fl(&precision(a));
            let pb = stack_to_fl(&precision(b));
            let inc_ba = Formula::implies(
                pa,
                Formula::subset(Term::sp(tb.clone()), Term::sp(ta.clone())),
            );
            let inc_ab = Formula::implies(
                pb,
                Formula::subset(Term::sp(ta.clone()), Term::sp(tb.clone())),
            );
            Formula::and(Formula::and(ta, tb), Formula::and(inc_ba, inc_ab))
        }
        SlFormula::Star(a, b) => Formula::star(translate(a), translate(b)),
        SlFormula::Pred { name, arg } => Formula::ind(name, vec![loc_term(arg)]),
        SlFormula::ExistsPointsTo { y, x, field, body } => {
            let tb = translate(body);
            Formula::exists(
                y,
                Sort::Fg,
                Formula::eq(Term::app1(field, loc_term(x)), Term::var(y)),
                Formula::and(
                    tb.clone(),
                    Formula::not(Formula::member(loc_term(x), Term::sp(tb))),
                ),
            )
        }
    }
}

/// Builds the frame-logic signature induced by a set of fields.
pub fn field_signature(fields: &[String]) -> Arc<Signature> {
    let mut sig = Signature::new();
    for f in fields {
        sig = sig.with_field(f);
    }
    Arc::new(sig)
}

/// How locations outside the heaplet domain are completed to total tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Completion {
    /// Everything outside the domain points to nil.
    Nil,
    /// Everything outside the domain points to the given element.
    Constant(ElemId),
}

/// The model induced by a store and heaplet: pointer functions agree with
/// the heaplet on its domain and take the completion value outside it.
/// Returns the model and the store as a variable assignment.
pub fn induced_model(
    universe: u8,
    fields: &[String],
    store: &Store,
    h: &Heaplet,
    completion: Completion,
) -> Result<(PreModel, Assignment), PslError> {
    let sig = field_signature(fields);
    let mut m = PreModel::new(sig, universe, crate::model::DEFAULT_INT_RANGE)
        .map_err(EvalError::Model)?;
    let fill = match completion {
        Completion::Nil => 0,
        Completion::Constant(e) => e,
    };
    for f in fields {
        for u in 0..universe {
            let v = h
                .fields
                .get(f)
                .and_then(|t| t.get(&u))
                .copied()
                .unwrap_or(fill);
            m.set_fn(f, &[Value::Elem(u)], Value::Elem(v))
                .map_err(EvalError::Model)?;
        }
    }
    let nu: Assignment = store
        .iter()
        .map(|(n, e)| (n.clone(), Value::Elem(*e)))
        .collect();
    Ok((m, nu))
}

/// Reads a heaplet back out of a model: domain from the given set, field
/// tables restricted to it.
pub fn heaplet_of_support(model: &PreModel, fields: &[String], dom: ElemSet) -> Heaplet {
    let mut h = Heaplet::empty();
    h.dom = dom;
    for f in fields {
        let mut table = BTreeMap::new();
        for u in dom.iter() {
            if let Ok(Value::Elem(v)) = model.lookup_fn(f, &[Value::Elem(u)]) {
                table.insert(u, v);
            }
        }
        h.fields.insert(f.clone(), table);
    }
    h
}

/// Brute-force minimum heaplet within an ambient heap: enumerates every
/// restriction of `ambient`, keeps the satisfying ones, and returns the
/// subheap-minimum. `None` when unsatisfiable at these bounds; `NoMinimum`
/// when satisfying restrictions exist without a least one (contradicting the
/// fragment's guarantee). The ambient heap is needed because heaplets from
/// unrelated heaps are incomparable.
pub fn minimum_heap(
    universe: u8,
    store: &Store,
    ambient: &Heaplet,
    phi: &SlFormula,
    defs: &SlDefs,
) -> Result<Option<Heaplet>, PslError> {
    let fields: Vec<String> = collect_all_fields(phi, defs).into_iter().collect();
    let ev = SlEvaluator::new(universe, &fields, defs)?;
    minimum_heap_with(&ev, store, ambient, phi)
}

/// As [`minimum_heap`], reusing a prebuilt evaluator.
pub fn minimum_heap_with(
    ev: &SlEvaluator,
    store: &Store,
    ambient: &Heaplet,
    phi: &SlFormula,
) -> Result<Option<Heaplet>, PslError> {
    let mut sat: Vec<Heaplet> = Vec::new();
    for dom in ambient.dom.subsets() {
        let h = ambient.restrict(dom);
        if ev.sat(store, &h, phi)? {
            sat.push(h);
        }
    }
    if sat.is_empty() {
        return Ok(None);
    }
    let mut min: Option<&Heaplet> = None;
    for h in &sat {
        if sat.iter().all(|other| h.is_subheap(other)) {
            min = Some(h);
            break;
        }
    }
    match min {
        Some(h) => Ok(Some(h.clone())),
        None => Err(PslError::NoMinimum),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn list_defs() -> SlDefs {
        // lst(x) := ite(x = nil, emp, exists y. (x |-next-> y) * lst(y))
        let mut defs = SlDefs::new();
        defs.insert(SlDef {
            name: "lst".to_owned(),
            param: "x".to_owned(),
            body: SlFormula::Ite(
                StackFormula::Eq("x".to_owned(), NIL.to_owned()),
                Box::new(SlFormula::Emp),
                Box::new(SlFormula::ExistsPointsTo {
                    y: "y".to_owned(),
                    x: "x".to_owned(),
                    field: "next".to_owned(),
                    body: Box::new(SlFormula::pred("lst", "y")),
                }),
            ),
        });
        defs
    }

    fn store1(x: ElemId) -> Store {
        [("x".to_owned(), x)].into_iter().collect()
    }

    fn chain_heaplet(cells: &[(ElemId, ElemId)]) -> Heaplet {
        let mut h = Heaplet::empty();
        let mut table = BTreeMap::new();
        for (u, v) in cells {
            h.dom.insert(*u);
            table.insert(*u, *v);
        }
        h.fields.insert("next".to_owned(), table);
        h
    }

    #[test]
    fn points_to_sat() {
        let defs = SlDefs::new();
        let store: Store = [("x".to_owned(), 1), ("y".to_owned(), 2)].into_iter().collect();
        let h = chain_heaplet(&[(1, 2)]);
        assert!(eval_sl(3, &store, &h, &SlFormula::points_to("x", "next", "y"), &defs).unwrap());
        // Wrong domain.
        let h2 = chain_heaplet(&[(1, 2), (2, 0)]);
        assert!(!eval_sl(3, &store, &h2, &SlFormula::points_to("x", "next", "y"), &defs).unwrap());
    }

    #[test]
    fn stack_formulas_are_heap_independent() {
        let defs = SlDefs::new();
        let sf = SlFormula::Stack(StackFormula::Eq("x".to_owned(), "x".to_owned()));
        let store = store1(1);
        assert!(eval_sl(2, &store, &Heaplet::empty(), &sf, &defs).unwrap());
        assert!(eval_sl(2, &store, &chain_heaplet(&[(1, 0)]), &sf, &defs).unwrap());
    }

    #[test]
    fn star_requires_disjointness() {
        let defs = SlDefs::new();
        let store: Store = [("x".to_owned(), 1), ("y".to_owned(), 2)].into_iter().collect();
        let phi = SlFormula::star(
            SlFormula::points_to("x", "next", "y"),
            SlFormula::points_to("x", "next", "y"),
        );
        // Overlapping minimal heaps cannot be split.
        let h = chain_heaplet(&[(1, 2)]);
        assert!(!eval_sl(3, &store, &h, &phi, &defs).unwrap());
    }

    #[test]
    fn list_lfp_and_minimum_heap() {
        let defs = list_defs();
        // Chain u1 -> u2 -> nil over universe 3.
        let h = chain_heaplet(&[(1, 2), (2, 0)]);
        let store = store1(1);
        assert!(eval_sl(3, &store, &h, &SlFormula::pred("lst", "x"), &defs).unwrap());
        // Minimum heaplet of lst(x) inside the chain heap is the chain.
        let ambient = chain_heaplet(&[(0, 0), (1, 2), (2, 0)]);
        let min = minimum_heap(3, &store, &ambient, &SlFormula::pred("lst", "x"), &defs)
            .unwrap()
            .unwrap();
        assert_eq!(min, h);
        // At nil the minimum is empty.
        let min = minimum_heap(3, &store1(0), &ambient, &SlFormula::pred("lst", "x"), &defs)
            .unwrap()
            .unwrap();
        assert_eq!(min.dom, ElemSet::EMPTY);
        // A cyclic heaplet does not satisfy lst.
        let cyc = chain_heaplet(&[(1, 2), (2, 1)]);
        assert!(!eval_sl(3, &store, &cyc, &SlFormula::pred("lst", "x"), &defs).unwrap());
    }

    #[test]
    fn minimum_of_stack_formula_is_empty() {
        let defs = SlDefs::new();
        let phi = SlFormula::Stack(StackFormula::True);
        let ambient = chain_heaplet(&[(0, 0), (1, 0)]);
        let min = minimum_heap(2, &Store::new(), &ambient, &phi, &defs)
            .unwrap()
            .unwrap();
        assert!(min.dom.is_empty());
    }

    #[test]
    fn precision_clauses() {
        assert_eq!(precision(&SlFormula::Stack(StackFormula::True)), StackFormula::False);
        assert_eq!(precision(&SlFormula::points_to("x", "f", "y")), StackFormula::True);
        let a = SlFormula::points_to("x", "f", "y");
        let b = SlFormula::Stack(StackFormula::True);
        assert_eq!(
            precision(&SlFormula::star(a.clone(), b.clone())),
            StackFormula::And(Box::new(StackFormula::True), Box::new(StackFormula::False))
        );
        assert_eq!(
            precision(&SlFormula::and(a, b)),
            StackFormula::Or(Box::new(StackFormula::True), Box::new(StackFormula::False))
        );
    }

    #[test]
    fn translation_shapes() {
        let (t, _) = translate_psl(&SlFormula::points_to("x", "f", "y"), &SlDefs::new());
        assert_eq!(t, Formula::eq(Term::app1("f", Term::var("x")), Term::var("y")));
        let (t, _) = translate_psl(&SlFormula::Stack(StackFormula::True), &SlDefs::new());
        assert_eq!(t, Formula::True);
        let a = SlFormula::points_to("x", "f", "y");
        let b = SlFormula::points_to("y", "f", "x");
        let (t, _) = translate_psl(&SlFormula::star(a, b), &SlDefs::new());
        match t {
            Formula::And(ab, disjoint) => {
                assert!(matches!(*ab, Formula::And(..)));
                assert!(matches!(*disjoint, Formula::Eq(Term::Inter(..), Term::Empty)));
            }
            _ => panic!("unexpected translation shape"),
        }
    }

    #[test]
    fn unique_heaplet_validation() {
        // lst passes; a predicate with an imprecise base case fails.
        let report = validate_psl(&SlFormula::pred("lst", "x"), &list_defs(), 3).unwrap();
        assert!(report.is_ok(), "{:?}", report.violations);
        let mut bad = SlDefs::new();
        bad.insert(SlDef {
            name: "anyheap".to_owned(),
            param: "x".to_owned(),
            body: SlFormula::Stack(StackFormula::True),
        });
        let report = validate_psl(&SlFormula::pred("anyheap", "x"), &bad, 2).unwrap();
        assert!(!report.is_ok());
    }
}
