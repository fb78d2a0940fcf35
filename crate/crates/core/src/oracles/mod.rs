//! Independent brute-force verifiers: the coordinate-space Euler–Poisson
//! expression from finite differences, the Ostrohrads'kyj momenta, the
//! partial-derivative recalculation identities and the discrete first
//! variation of the action.

mod action;
mod coordinate;
mod curve;

pub use action::{action, action_variation, ActionVariation, QUADRATURE_PANELS, QUADRATURE_TOL};
pub use coordinate::{
    coordinate_euler_poisson, coordinate_euler_poisson_with, coordinate_momenta,
    momentum_relation_residual, partials_recalculation_check, CoordinateMomenta, OracleSteps,
};
pub use curve::{
    min_gamma, random_coordinate_jet, random_test_curve, Bump, CoordinateCurve, Perturbed, PolynomialCurve, Reparametrized,
    TEST_CURVE_DEGREE, TEST_CURVE_MIN_GAMMA, TEST_CURVE_SPREAD,
};
