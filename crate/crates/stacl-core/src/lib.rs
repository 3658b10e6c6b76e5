//! Core kernel for reasoning about statistical causality over finite domains.
//!
//! The crate is split along the data flow of a causal query:
//!
//! - [`syntax`]: variable tuples, causal terms, general terms, conditional
//!   variables, formulas, and the operations on them (merge, substitution,
//!   free variables, conditioning-variable extraction).
//! - [`parse`] / printing via `Display`: the concrete text grammar.
//! - [`generator`]: data generators (variable → depth-≤1 term maps), their
//!   validation, eager/lazy intervention transforms, expansion, and the
//!   induced causal diagram.
//! - [`graph`]: the purely graphical oracle — parents, ancestors, the causal
//!   predicates, d-separation (fast traversal plus a naive path enumerator),
//!   and the back-door criterion.
//! - [`dist`] / [`world`]: exact rational distributions, kernels, worlds,
//!   term interpretation, formula satisfaction, and causal effects via
//!   truncated factorization.
//! - [`proof`]: judgments, axiom-schema instantiation, derivation checking,
//!   and a builder for constructing derivations programmatically.
//! - [`fuzz`]: random world generation and the statistical soundness harness
//!   for every axiom schema, plus counterexample search for the known
//!   invalid schemas.
//!
//! Everything here is exact (rational arithmetic, no floats) and
//! deterministic for a fixed seed.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod dist;
pub mod fuzz;
pub mod generator;
pub mod graph;
pub mod parse;
pub mod proof;
pub mod syntax;
pub mod world;

pub use syntax::{CausalTerm, CondVar, Formula, Term, VarTuple};
