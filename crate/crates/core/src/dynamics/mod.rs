//! Arc-length integration of the fourth-order extremal flow, the Dixon
//! state of a worldline and the closed-form flat-space helix.

mod dixon;
mod helix;
mod integrator;
mod solve;

pub use dixon::{
    dixon_one_residuals, dixon_state, dixon_state_at, dixon_two_residual, dixon_two_residual_at, momenta_for, wedge,
    DixonOneResidual, DixonState,
};
pub use helix::RieweHelix;
pub use integrator::{
    integrate, integrate_with, project_natural, Diagnostics, IntegratorConfig, Method, Sample, Trajectory,
};
pub use solve::{solve_u3, solve_u3_kawaguchi, solve_u3_linear, U3Method};
