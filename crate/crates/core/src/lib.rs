//! Edge-length functionals of polyhedra, their first-order shape
//! derivatives, and audits against local minimality conditions for the
//! ratio `e(P)³ / v(P)`.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod catalog;
pub mod criteria;
pub mod error;
pub mod gauss;
pub mod math;
pub mod optimizer;
pub mod perturb;
pub mod poly;
pub mod sample;
pub mod tol;
pub mod wedge;

pub use error::{Error, Result};
pub use math::Vec3;
pub use poly::{HalfSpace, Polyhedron, Shape, ValidationReport};
