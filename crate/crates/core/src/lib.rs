//! Travel planning from structured requests.
//!
//! A [`model::SymbolicRequest`] describes legs and constraints. [`milp`]
//! compiles it with an [`model::Inventory`] into a 0-1 program, [`solver`]
//! finds the optimal booking, [`nl`] converts between requests and English,
//! [`datagen`] produces synthetic corpora and [`eval`] scores translations.

pub mod datagen;
pub mod eval;
pub mod milp;
pub mod model;
pub mod nl;
pub mod pipeline;
pub mod solver;
