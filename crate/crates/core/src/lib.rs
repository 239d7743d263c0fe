//! A workbench for quantified reason-based preference logic.
//!
//! Formulas compare propositions relative to sets of reasons, `(φ >=[X] ψ)`,
//! and are interpreted over finite models with a selection function and
//! either utilities, preorders or a generalized ranking of propositions.

pub mod corpus;
pub mod eval;
pub mod folc;
pub mod model;
pub mod search;
pub mod syntax;

pub use syntax::{Formula, IndexSet, Signature, SurfaceFormula, Term, Var};
pub use model::{Assignment, Model, Proposition, Selector, Structure};
