//! Extremal worldlines of the second-order Kawaguchi metric function
//! `L = (k² + A)|u|` in pseudo-Riemannian spacetimes.
//!
//! * [`geometry`]: charts, metric jets, Christoffel symbols, curvature.
//! * [`variational`]: invariants, Lagrangians, covariant momenta and the
//!   covariant Euler–Poisson expression.
//! * [`dynamics`]: arc-length integration of the fourth-order extremal flow,
//!   Dixon state, closed-form Riewe helix.
//! * [`oracles`]: brute-force coordinate-space verifiers.
//! * [`verify`]: named check suites producing JSON-serialisable reports.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod numdiff;
pub mod oracles;
pub mod tensor;
pub mod variational;
pub mod verify;

pub use error::{Error, Result};
