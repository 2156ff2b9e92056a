//! Equilibrium and bifurcation analysis of a planar predator-prey system.
//!
//! The model is a Holling type I Leslie-Gower system with constant prey
//! harvesting and a predator Allee effect. After nondimensionalization it
//! has four parameters (q, h, s, m) and reads
//!
//! ```text
//! dx/dt = x(1 - x) - q*x*y - h
//! dy/dt = s*y*(1 - y/x)*(y - m)
//! ```
//!
//! on the domain x > 0, y >= 0. The crate provides:
//!
//! - closed-form equilibria on the three branches y = 0, y = m, y = x
//!   ([`equilibria`]),
//! - local stability classification including the degenerate types
//!   (saddle-node, weak center, codimension-2 cusp) ([`classification`]),
//! - saddle-node transversality, the Hopf first Lyapunov coefficient, and
//!   the two-parameter cusp unfolding ([`bifurcation`]),
//! - an adaptive Runge-Kutta integrator with section / return-map machinery
//!   used to verify the analytical results numerically ([`dynamics`]),
//! - plain-text serialization of every result type ([`io`]).
//!
//! All operations are pure functions of their inputs; every type is `Send`
//! and `Sync` and safe to share across worker threads.

// Validation deliberately writes `!(v > 0.0)` so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bifurcation;
pub mod classification;
pub mod dynamics;
pub mod equilibria;
pub mod io;
pub mod model;
pub mod poly;

mod error;

pub use error::{Error, Result};
pub use model::{DimensionalParams, Jet3, ModelParams, State};
