//! Simulation and cross-validation of one-dimensional skew diffusions with
//! local time on moving interface curves.
//!
//! The process solves
//!
//! ```text
//! dX_t = σ(t, X_t) dW_t + b(t, X_t) dt + Σ_i β_i(t) dL^{x_i}_t(X)
//! ```
//!
//! where `L^{x_i}` is the symmetric local time of `X` along the curve `x_i`.
//! Paths are generated by removing the local-time terms with a piecewise
//! affine space bijection and running Euler–Maruyama on the resulting
//! ordinary SDE. The backward parabolic transmission problem associated with
//! the same coefficients is solved by an interface-aligned finite-volume
//! θ-scheme, and [`validation`] ties the two together through the
//! Feynman–Kac representation.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. The `parallel` feature distributes paths over a rayon pool.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod coefficients;
pub mod error;
pub mod functions;
pub mod geometry;
pub mod pde_solver;
pub mod rng;
pub mod simulator;
pub mod stats;
pub mod transform;
pub mod validation;

mod math;
mod par;

pub use coefficients::{BetaFn, CoefficientClass, PiecewiseCoefficient, ProblemSpec, Side, SkewnessSchedule, SmoothFn};
pub use error::{Error, Result};
pub use geometry::{CurveFamily, CurveKind, InterfaceCurve};
pub use simulator::{PathEnsemble, Scheme, SimConfig, Simulator};
