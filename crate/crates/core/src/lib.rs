//! Weak values of position projectors, weak trajectories and de Broglie–Bohm
//! dynamics for a one-dimensional two-packet ("simplified double slit") setup.
//!
//! Atomic units throughout (ħ = 1).
//!
//! * [`qcore`] – analytic Gaussian packets, the free propagator, grid states.
//! * [`weakval`] – weak values under pre/post-selection and the pointer shift.
//! * [`paths`] – classical skeletons of the weak trajectories.
//! * [`bipartite`] – coupled system⊗pointer evolution in a standing-wave box basis.
//! * [`bohm`] – guidance velocity fields and trajectory ensembles.
//! * [`scenario`] – configuration, the scenario registry and CSV outputs.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bipartite;
pub mod bohm;
mod error;
pub mod exec;
pub mod paths;
pub mod qcore;
pub mod quad;
pub mod sampling;
pub mod scenario;
pub mod weakval;

pub use error::{Error, Result};
pub use exec::Exec;
