//! A frame logic engine over finite models.
//!
//! Frame logic extends first-order logic with recursive definitions by a
//! support operator `Sp(..)` that evaluates to the set of locations a
//! formula's meaning depends on. This crate implements:
//!
//! - sorted syntax, validation, and the usual formula plumbing ([`ast`]);
//! - finite pre-models with exhaustive enumeration ([`model`]);
//! - frame models: the simultaneous least fixpoint of the support equations
//!   and the inductive equations, plus evaluation and per-instance frame
//!   checks ([`semantics`]);
//! - translation of support expressions into ordinary recursive relations
//!   and an evaluator for the translated programs ([`ford`]);
//! - a heap-mutating while language with abort and stuck outcomes
//!   ([`whilelang`]);
//! - a program logic: weakest tightest preconditions, verification-condition
//!   generation, and bounded triple checking ([`hoare`]);
//! - a precise separation-logic front end with heaplet semantics, a precision
//!   predicate, and a translation into frame logic ([`psl`]);
//! - independent brute-force oracles for differential testing ([`oracle`]).
//!
//! The crate is `no_std` (with `alloc`); everything IO-shaped lives in the
//! companion `framelogic-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod ast;
pub mod ford;
pub mod hoare;
pub mod model;
pub mod oracle;
pub mod psl;
pub mod semantics;
pub mod whilelang;

pub use ast::{
    alpha_normalize, free_vars, free_vars_term, substitute, substitute_term, validate,
    validate_with, Definition, DefinitionSet, Formula, RuleName, Signature, Sort, Term,
    ValidationReport,
};
pub use model::{
    apply_mutation, enumerate_pre_models, is_stable_on, Assignment, ElemId, ElemSet, EnumFilter,
    Mutation, PreModel, Value,
};
pub use semantics::{frame_model, FrameModel, FrameVerdict};
