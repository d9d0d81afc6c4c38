//! Structured-grid solver for a two-species compressible tissue growth model
//! with pressure `p = n^gamma`, and a diagnostics engine that tracks the
//! a priori estimates of the model along a run.
//!
//! Modules, bottom up:
//! - [`field`], [`stencil`]: grids, cell fields and discrete operators
//! - [`model`]: pressure law, growth rate families, initial data
//! - [`scheme`]: explicit time stepping of the regularized system
//! - [`diagnostics`]: monitored quantities and their audit
//! - [`harness`]: configuration, snapshots, convergence studies, output

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod field;
pub mod harness;
pub mod model;
pub mod scheme;
pub mod stencil;

pub use field::{Field, Grid, GridError, VectorField};
pub use model::{InitialData, ReactionFamily, ReactionModel};
pub use scheme::{run, SchemeParams, State};
