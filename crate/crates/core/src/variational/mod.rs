//! Second-order Lagrangian layer: differential invariants, invariant
//! Lagrangians, covariant momenta and the covariant Euler–Poisson expression.

mod euler_poisson;
mod jet;
mod lagrangian;
mod momenta;
mod series;
mod zermelo;

pub use euler_poisson::{euler_poisson_at, euler_poisson_covariant};
pub use jet::{
    coordinate_to_covariant_at, covariant_to_coordinate_at, jet_coordinate_to_covariant,
    jet_covariant_to_coordinate, CoordinateJet, CovariantJet, GAUGE_EPS,
};
pub use lagrangian::{
    InvariantLagrangian, Kawaguchi, LagrangianSpec, SecondSample, DEFAULT_SECOND_SAMPLE_C,
};
pub use momenta::{
    frenet_curvature, frenet_curvature_at, invariants, invariants_at, momenta_general,
    momenta_general_at, momenta_kawaguchi, momenta_kawaguchi_at, reconstruction_residual,
    Invariants, Momenta,
};
pub use series::Series;
pub use zermelo::{coordinate_lagrangian, coordinate_lagrangian_at, zermelo_check, PARTIAL_STEP};
