//! Tools for first-order arithmetic with a fixed minimal connective kernel.
//!
//! The crate provides, in dependency order:
//!
//! * [`syntax`] — terms and formulas over `{0, S, +, *, =, !, |, E}`, with
//!   the usual derived connectives expanded eagerly, plus parsing, printing,
//!   substitution, and the eta family of padded tautologies.
//! * [`goedel`] — arbitrary-precision structural codes for terms, formulas,
//!   and sequences, built on the Cantor pairing function, together with total
//!   recognizers for every code class.
//! * [`evaluation`] — bounded three-valued evaluation over the standard
//!   model, propositional evaluation over designated atoms, truth oracles,
//!   and checkers for the compositional truth axioms.
//! * [`stopdisj`] — disjunctions with stopping conditions: the guarded
//!   disjunction builder, its naive foil, and the collapse property checker.
//! * [`rank`] — rank experiments for one-variable formulas: type ranks,
//!   induction/biconditional ranks over enumerated formulas, extension ranks
//!   against eta tables, and rank-trajectory classification.
//! * [`satclass`] — finite satisfaction-class fragments: occurrence
//!   equivalence, subformula order, the staged construction, and its
//!   verifier.

pub mod evaluation;
pub mod goedel;
pub mod rank;
pub mod satclass;
pub mod stopdisj;
pub mod syntax;

pub use syntax::{Formula, FormulaNode, Term, TermNode, Valuation, VarIndex};
