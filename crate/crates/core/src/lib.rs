//! Lorentzian 3-manifolds carrying a parallel lightlike vector field.
//!
//! The crate builds metrics on Heisenberg nilmanifolds and flat tori from
//! Fourier data, computes their curvature, reduces them to normal form,
//! classifies affine transformations and checks deformations of the metric
//! along which a given affine map stays affine.

#![allow(clippy::needless_range_loop)]

pub mod acceptance;
pub mod classify;
pub mod corpus;
pub mod curvature;
pub mod deform;
pub mod error;
pub mod map;
pub mod model;
pub mod normalform;
pub mod periodic;
pub mod transforms;

pub use error::{Error, Result};
