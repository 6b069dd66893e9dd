//! Random-matrix universality laboratory.
//!
//! Samples Wigner and GUE ensembles, evolves them under the matrix
//! Ornstein–Uhlenbeck flow and Dyson Brownian motion, and measures local
//! eigenvalue statistics against the Dyson sine kernel. The local side is
//! modelled by orthogonal polynomials for the varying weight generated by
//! the eigenvalues outside a window.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod archive;
pub mod ensemble;
pub mod equilibrium;
pub mod error;
pub mod localwindow;
pub mod orthopoly;
pub mod quadrature;
pub mod report;
pub mod rng;
pub mod spectral;
pub mod stats;
pub mod universality;

pub use error::{Error, Result};
pub use num_complex::Complex64;
