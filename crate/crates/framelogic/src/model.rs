//! Finite multi-sorted pre-models: a foreground universe, bounded integer
//! domain, total function tables, base relations, and constants. Pre-models
//! interpret everything except the inductive relations and supports, which
//! the semantics layer adds on top.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::ast::{Signature, Sort, AVAIL_SET, NIL};

/// Identifier of a foreground element; element 0 is nil.
pub type ElemId = u8;

/// Set of foreground elements as a bitset. The foreground universe is capped
/// well below 64 elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ElemSet(pub u64);

impl ElemSet {
    pub const EMPTY: ElemSet = ElemSet(0);

    pub fn singleton(e: ElemId) -> ElemSet {
        ElemSet(1 << e)
    }
    pub fn full(n: u8) -> ElemSet {
        if n >= 64 {
            ElemSet(!0)
        } else {
            ElemSet((1u64 << n) - 1)
        }
    }
    pub fn from_iter<I: IntoIterator<Item = ElemId>>(items: I) -> ElemSet {
        let mut s = ElemSet::EMPTY;
        for e in items {
            s.insert(e);
        }
        s
    }
    pub fn contains(self, e: ElemId) -> bool {
        self.0 & (1 << e) != 0
    }
    pub fn insert(&mut self, e: ElemId) {
        self.0 |= 1 << e;
    }
    pub fn remove(&mut self, e: ElemId) {
        self.0 &= !(1 << e);
    }
    pub fn union(self, other: ElemSet) -> ElemSet {
        ElemSet(self.0 | other.0)
    }
    pub fn inter(self, other: ElemSet) -> ElemSet {
        ElemSet(self.0 & other.0)
    }
    pub fn diff(self, other: ElemSet) -> ElemSet {
        ElemSet(self.0 & !other.0)
    }
    /// Complement relative to a universe of size `n`.
    pub fn compl(self, n: u8) -> ElemSet {
        ElemSet(!self.0).inter(ElemSet::full(n))
    }
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
    pub fn is_subset(self, other: ElemSet) -> bool {
        self.0 & !other.0 == 0
    }
    pub fn len(self) -> u32 {
        self.0.count_ones()
    }
    pub fn iter(self) -> impl Iterator<Item = ElemId> {
        (0..64u8).filter(move |e| self.contains(*e))
    }
    /// All subsets of this set, in subset-mask order starting from the empty
    /// set.
    pub fn subsets(self) -> impl Iterator<Item = ElemSet> {
        let mask = self.0;
        let mut next = Some(0u64);
        core::iter::from_fn(move || {
            let cur = next?;
            next = if cur == mask {
                None
            } else {
                Some((cur.wrapping_sub(mask)) & mask)
            };
            Some(ElemSet(cur))
        })
    }
}

impl fmt::Display for ElemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for e in self.iter() {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "u{e}")?;
        }
        write!(f, "}}")
    }
}

/// A first-order value of any sort.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Elem(ElemId),
    Set(ElemSet),
    Int(i64),
    Bool(bool),
}

impl Value {
    pub fn sort(&self) -> Sort {
        match self {
            Value::Elem(_) => Sort::Fg,
            Value::Set(_) => Sort::FgSet,
            Value::Int(_) => Sort::Int,
            Value::Bool(_) => Sort::Bool,
        }
    }
    pub fn as_elem(&self) -> Option<ElemId> {
        match self {
            Value::Elem(e) => Some(*e),
            _ => None,
        }
    }
    pub fn as_set(&self) -> Option<ElemSet> {
        match self {
            Value::Set(s) => Some(*s),
            _ => None,
        }
    }
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Elem(e) => write!(f, "u{e}"),
            Value::Set(s) => write!(f, "{s}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// Variable assignment: names to values.
pub type Assignment = BTreeMap<String, Value>;

/// Total interpretation of one function symbol as a dense table over the
/// packed argument domain.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct FnTable {
    pub table: Vec<Value>,
}

/// Errors from model-level operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    IllegalMutation(String),
    UniverseMismatch,
    BoundsTooLarge(String),
    UnknownSymbol(String),
    OutOfDomain(String),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::IllegalMutation(n) => write!(f, "illegal mutation of non-mutable {n}"),
            ModelError::UniverseMismatch => write!(f, "models have different universes"),
            ModelError::BoundsTooLarge(m) => write!(f, "bounds too large: {m}"),
            ModelError::UnknownSymbol(n) => write!(f, "unknown symbol: {n}"),
            ModelError::OutOfDomain(m) => write!(f, "out of domain: {m}"),
        }
    }
}

/// Hard cap on the foreground universe for exhaustive enumeration.
pub const FG_CAP: u8 = 6;
/// Default bounded integer domain.
pub const DEFAULT_INT_RANGE: (i64, i64) = (-16, 16);

/// A finite pre-model. Function tables are total over the finite domains;
/// sets of foreground elements are bitsets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PreModel {
    pub sig: Arc<Signature>,
    pub fg_size: u8,
    pub int_range: (i64, i64),
    pub consts: BTreeMap<String, Value>,
    pub funcs: BTreeMap<String, FnTable>,
    pub rels: BTreeMap<String, BTreeSet<Vec<Value>>>,
}

impl PreModel {
    /// Fresh pre-model over `sig`: every constant defaults (nil for
    /// foreground, 0, false, empty set), every function table maps everything
    /// to the default of its result sort, every base relation is empty.
    pub fn new(
        sig: Arc<Signature>,
        fg_size: u8,
        int_range: (i64, i64),
    ) -> Result<PreModel, ModelError> {
        if fg_size == 0 {
            return Err(ModelError::BoundsTooLarge(
                "foreground universe must contain nil".to_owned(),
            ));
        }
        if fg_size > FG_CAP {
            return Err(ModelError::BoundsTooLarge(format!(
                "fg size {fg_size} exceeds cap {FG_CAP}"
            )));
        }
        let mut m = PreModel {
            sig: sig.clone(),
            fg_size,
            int_range,
            consts: BTreeMap::new(),
            funcs: BTreeMap::new(),
            rels: BTreeMap::new(),
        };
        for (name, sort) in &sig.consts {
            m.consts.insert(name.clone(), m.default_value(*sort));
        }
        for (name, fsig) in &sig.funcs {
            let size = m.domain_product(&fsig.args)?;
            m.funcs.insert(
                name.clone(),
                FnTable { table: vec![m.default_value(fsig.ret); size] },
            );
        }
        for name in sig.rels.keys() {
            m.rels.insert(name.clone(), BTreeSet::new());
        }
        Ok(m)
    }

    pub fn default_value(&self, sort: Sort) -> Value {
        match sort {
            Sort::Fg => Value::Elem(0),
            Sort::FgSet => Value::Set(ElemSet::EMPTY),
            Sort::Int => Value::Int(0),
            Sort::Bool => Value::Bool(false),
        }
    }

    pub fn universe(&self) -> ElemSet {
        ElemSet::full(self.fg_size)
    }

    pub fn nil(&self) -> ElemId {
        match self.consts.get(NIL) {
            Some(Value::Elem(e)) => *e,
            _ => 0,
        }
    }

    /// Number of values in the finite domain of a sort. Set-sorted domains
    /// are the powerset of the foreground universe.
    pub fn domain_size(&self, sort: Sort) -> usize {
        match sort {
            Sort::Fg => self.fg_size as usize,
            Sort::Int => (self.int_range.1 - self.int_range.0 + 1) as usize,
            Sort::Bool => 2,
            Sort::FgSet => 1usize << self.fg_size,
        }
    }

    fn domain_product(&self, sorts: &[Sort]) -> Result<usize, ModelError> {
        let mut size = 1usize;
        for s in sorts {
            size = size
                .checked_mul(self.domain_size(*s))
                .ok_or_else(|| ModelError::BoundsTooLarge("domain product".to_owned()))?;
        }
        Ok(size)
    }

    /// All values of a sort, in canonical order.
    pub fn domain_values(&self, sort: Sort) -> Vec<Value> {
        match sort {
            Sort::Fg => (0..self.fg_size).map(Value::Elem).collect(),
            Sort::Int => (self.int_range.0..=self.int_range.1).map(Value::Int).collect(),
            Sort::Bool => vec![Value::Bool(false), Value::Bool(true)],
            Sort::FgSet => (0..(1u64 << self.fg_size)).map(|m| Value::Set(ElemSet(m))).collect(),
        }
    }

    /// Packs a value into its index within the sort's domain.
    pub fn pack_value(&self, v: &Value) -> Result<usize, ModelError> {
        match v {
            Value::Elem(e) => {
                if *e < self.fg_size {
                    Ok(*e as usize)
                } else {
                    Err(ModelError::OutOfDomain(format!("element u{e}")))
                }
            }
            Value::Int(i) => {
                if *i >= self.int_range.0 && *i <= self.int_range.1 {
                    Ok((i - self.int_range.0) as usize)
                } else {
                    Err(ModelError::OutOfDomain(format!("integer {i}")))
                }
            }
            Value::Bool(b) => Ok(*b as usize),
            Value::Set(s) => Ok(s.0 as usize),
        }
    }

    /// Packs an argument tuple into a table index (mixed radix, first
    /// argument most significant).
    pub fn pack_args(&self, sorts: &[Sort], args: &[Value]) -> Result<usize, ModelError> {
        let mut idx = 0usize;
        for (s, v) in sorts.iter().zip(args.iter()) {
            idx = idx * self.domain_size(*s) + self.pack_value(v)?;
        }
        Ok(idx)
    }

    /// Inverse of [`PreModel::pack_args`].
    pub fn unpack_args(&self, sorts: &[Sort], mut idx: usize) -> Vec<Value> {
        let mut out = vec![Value::Bool(false); sorts.len()];
        for i in (0..sorts.len()).rev() {
            let r = self.domain_size(sorts[i]);
            let digit = idx % r;
            idx /= r;
            out[i] = self.unpack_value(sorts[i], digit);
        }
        out
    }

    pub fn unpack_value(&self, sort: Sort, digit: usize) -> Value {
        match sort {
            Sort::Fg => Value::Elem(digit as ElemId),
            Sort::Int => Value::Int(self.int_range.0 + digit as i64),
            Sort::Bool => Value::Bool(digit != 0),
            Sort::FgSet => Value::Set(ElemSet(digit as u64)),
        }
    }

    pub fn lookup_fn(&self, name: &str, args: &[Value]) -> Result<Value, ModelError> {
        let fsig = self
            .sig
            .funcs
            .get(name)
            .ok_or_else(|| ModelError::UnknownSymbol(name.to_owned()))?;
        let table = self
            .funcs
            .get(name)
            .ok_or_else(|| ModelError::UnknownSymbol(name.to_owned()))?;
        let idx = self.pack_args(&fsig.args, args)?;
        Ok(table.table[idx])
    }

    pub fn set_fn(&mut self, name: &str, args: &[Value], value: Value) -> Result<(), ModelError> {
        let fsig = self
            .sig
            .funcs
            .get(name)
            .ok_or_else(|| ModelError::UnknownSymbol(name.to_owned()))?
            .clone();
        let idx = self.pack_args(&fsig.args, args)?;
        let table = self
            .funcs
            .get_mut(name)
            .ok_or_else(|| ModelError::UnknownSymbol(name.to_owned()))?;
        table.table[idx] = value;
        Ok(())
    }

    pub fn const_value(&self, name: &str) -> Result<Value, ModelError> {
        self.consts
            .get(name)
            .copied()
            .ok_or_else(|| ModelError::UnknownSymbol(name.to_owned()))
    }

    /// Interpretation of the allocatable-set constant, when present.
    pub fn avail_set(&self) -> ElemSet {
        match self.consts.get(AVAIL_SET) {
            Some(Value::Set(s)) => *s,
            _ => ElemSet::EMPTY,
        }
    }

    pub fn set_avail(&mut self, u: ElemSet) {
        self.consts.insert(AVAIL_SET.to_owned(), Value::Set(u));
    }
}

/// Sparse overrides of mutable function entries.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Mutation {
    pub overrides: BTreeMap<String, Vec<(Vec<Value>, Value)>>,
}

impl Mutation {
    pub fn new() -> Self {
        Mutation::default()
    }

    pub fn set(mut self, f: &str, args: Vec<Value>, value: Value) -> Self {
        self.overrides.entry(f.to_owned()).or_default().push((args, value));
        self
    }

    pub fn is_empty(&self) -> bool {
        self.overrides.is_empty()
    }
}

/// New pre-model equal to the input except at overridden entries. Overriding
/// a non-mutable function is an error.
pub fn apply_mutation(model: &PreModel, mutation: &Mutation) -> Result<PreModel, ModelError> {
    let mut out = model.clone();
    for (fname, entries) in &mutation.overrides {
        let fsig = model
            .sig
            .funcs
            .get(fname)
            .ok_or_else(|| ModelError::UnknownSymbol(fname.clone()))?;
        if !fsig.mutable {
            return Err(ModelError::IllegalMutation(fname.clone()));
        }
        for (args, value) in entries {
            out.set_fn(fname, args, *value)?;
        }
    }
    Ok(out)
}

/// True iff for every mutable function and every argument tuple meeting `x`,
/// the two models interpret the function identically.
pub fn is_stable_on(m1: &PreModel, m2: &PreModel, x: ElemSet) -> Result<bool, ModelError> {
    if m1.fg_size != m2.fg_size || m1.int_range != m2.int_range {
        return Err(ModelError::UniverseMismatch);
    }
    for (fname, fsig) in &m1.sig.funcs {
        if !fsig.mutable {
            continue;
        }
        let t1 = m1
            .funcs
            .get(fname)
            .ok_or_else(|| ModelError::UnknownSymbol(fname.clone()))?;
        let t2 = m2
            .funcs
            .get(fname)
            .ok_or_else(|| ModelError::UnknownSymbol(fname.clone()))?;
        for idx in 0..t1.table.len() {
            if t1.table[idx] == t2.table[idx] {
                continue;
            }
            let args = m1.unpack_args(&fsig.args, idx);
            let touches = args
                .iter()
                .any(|a| matches!(a, Value::Elem(e) if x.contains(*e)));
            if touches {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// All single-entry mutations of the mutable functions of `m`: for every
/// mutable function, every argument tuple, and every result value different
/// from the current one.
pub fn single_entry_mutations(m: &PreModel) -> Vec<Mutation> {
    let mut out = Vec::new();
    for (fname, fsig) in &m.sig.funcs {
        if !fsig.mutable {
            continue;
        }
        let table = &m.funcs[fname];
        for idx in 0..table.table.len() {
            let args = m.unpack_args(&fsig.args, idx);
            let cur = table.table[idx];
            for v in m.domain_values(fsig.ret) {
                if v != cur {
                    out.push(Mutation::new().set(fname, args.clone(), v));
                }
            }
        }
    }
    out
}

/// Controls which interpretations [`enumerate_pre_models`] varies. Everything
/// else keeps its default (or identity-like) interpretation.
#[derive(Debug, Clone, Default)]
pub struct EnumFilter {
    /// Function names to vary; when `None`, all mutable functions vary.
    pub vary_fns: Option<BTreeSet<String>>,
    /// Constants to vary over their domains (beyond the fixed nil).
    pub vary_consts: BTreeSet<String>,
    /// Data fields (integer-valued functions) pinned to an identity-like
    /// table (`f(u_i) = i`) instead of varying or defaulting.
    pub identity_data: BTreeSet<String>,
}

impl EnumFilter {
    pub fn mutables() -> Self {
        EnumFilter::default()
    }

    pub fn fns(names: &[&str]) -> Self {
        EnumFilter {
            vary_fns: Some(names.iter().map(|s| (*s).to_owned()).collect()),
            ..EnumFilter::default()
        }
    }

    pub fn with_consts(mut self, names: &[&str]) -> Self {
        for n in names {
            self.vary_consts.insert((*n).to_owned());
        }
        self
    }

    pub fn with_identity_data(mut self, names: &[&str]) -> Self {
        for n in names {
            self.identity_data.insert((*n).to_owned());
        }
        self
    }
}

/// Exhaustively enumerates pre-models over `sig` with the given foreground
/// size: every combination of tables for the varied functions and every value
/// of the varied constants, exactly once, in a deterministic order.
pub fn enumerate_pre_models(
    sig: Arc<Signature>,
    fg_size: u8,
    int_range: (i64, i64),
    filter: &EnumFilter,
) -> Result<impl Iterator<Item = PreModel>, ModelError> {
    let base = {
        let mut base = PreModel::new(sig.clone(), fg_size, int_range)?;
        for name in &filter.identity_data {
            let fsig = sig
                .funcs
                .get(name)
                .ok_or_else(|| ModelError::UnknownSymbol(name.clone()))?;
            let n = base.funcs[name].table.len();
            let (lo, hi) = int_range;
            let table: Vec<Value> = (0..n)
                .map(|i| match fsig.ret {
                    Sort::Int => Value::Int((i as i64).clamp(lo, hi)),
                    s => base.default_value(s),
                })
                .collect();
            base.funcs.get_mut(name).unwrap().table = table;
        }
        base
    };

    // Each varied slot is one table cell or one constant; its radix is the
    // size of the value domain.
    enum Slot {
        FnCell { name: String, idx: usize, ret: Sort },
        Const { name: String, sort: Sort },
    }

    let mut slots: Vec<Slot> = Vec::new();
    for (name, fsig) in &sig.funcs {
        let vary = match &filter.vary_fns {
            Some(set) => set.contains(name),
            None => fsig.mutable && !filter.identity_data.contains(name),
        };
        if !vary {
            continue;
        }
        let len = base.funcs[name].table.len();
        for idx in 0..len {
            slots.push(Slot::FnCell { name: name.clone(), idx, ret: fsig.ret });
        }
    }
    for name in &filter.vary_consts {
        let sort = *sig
            .consts
            .get(name)
            .ok_or_else(|| ModelError::UnknownSymbol(name.clone()))?;
        slots.push(Slot::Const { name: name.clone(), sort });
    }

    let radices: Vec<usize> = slots
        .iter()
        .map(|s| {
            let sort = match s {
                Slot::FnCell { ret, .. } => *ret,
                Slot::Const { sort, .. } => *sort,
            };
            base.domain_size(sort)
        })
        .collect();

    let total: u128 = radices.iter().map(|r| *r as u128).product();
    if total > 100_000_000 {
        return Err(ModelError::BoundsTooLarge(format!(
            "{total} pre-models requested"
        )));
    }

    let mut counter = vec![0usize; slots.len()];
    let mut done = false;
    Ok(core::iter::from_fn(move || {
        if done {
            return None;
        }
        let mut m = base.clone();
        for (slot, digit) in slots.iter().zip(counter.iter()) {
            match slot {
                Slot::FnCell { name, idx, ret } => {
                    let v = m.unpack_value(*ret, *digit);
                    m.funcs.get_mut(name).unwrap().table[*idx] = v;
                }
                Slot::Const { name, sort } => {
                    let v = m.unpack_value(*sort, *digit);
                    m.consts.insert(name.clone(), v);
                }
            }
        }
        // Increment the mixed-radix counter, last slot fastest.
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
        Some(m)
    }))
}
