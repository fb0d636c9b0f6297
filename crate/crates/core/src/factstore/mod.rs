//! Typed first-order fact store.
//!
//! Predicates and entity types live in a [`Schema`]; constants are interned
//! in a [`Universe`] shared by every [`FactBase`] over the same entities.
//! Conjunctive queries are answered by left-to-right backtracking with
//! existential semantics for unbound variables and negation as failure.

mod clause;
mod parse;
mod schema;
mod store;

pub use clause::{check_range_restricted, Binding, Exclusion, Literal, Term, Var};
pub use parse::{parse_atoms, parse_facts, render_atoms, serialize_facts};
pub use schema::{
    ConstId, GroundAtom, PredId, PredicateSchema, Schema, TypeId, Universe, MAX_ARITY,
};
pub use store::FactBase;

pub(crate) use schema::{is_constant_token, split_call, strip_comment};
