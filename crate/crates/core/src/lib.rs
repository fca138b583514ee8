//! Desk-scale laboratory for the weighted boundary monotonicity formula of
//! varifolds stationary along fields tangent to a boundary manifold, and for
//! the linear theory of (Q−½)-valued Dirichlet minimizers.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod error;
pub mod geometry;
pub mod monotonicity;
pub mod qvalued;
pub mod scenarios;
pub mod varifold;

pub use error::{Error, Result};
