//! Numerical experiments with higher-order metric subregularity on the real
//! line: interval-union set values, set-valued maps with a catalog of worked
//! examples, sup-ratio modulus estimators and a quasi-Newton solver for
//! generalized equations `0 ∈ g(x) + F(x)`.

// `!(a > b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod dyadic;
pub mod error;
pub mod grid;
pub mod interval;
pub mod maps;
pub mod regularity;
pub mod solver;

pub use catalog::{catalog, lookup, CatalogEntry, QStaircase};
pub use error::{Error, Result};
pub use grid::GridSpec;
pub use interval::{ClosedInterval, IntervalUnion};
pub use maps::{SetValuedMap, SmoothMap};
