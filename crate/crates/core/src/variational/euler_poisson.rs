use nalgebra::DVector;

use super::jet::CovariantJet;
use super::lagrangian::InvariantLagrangian;
use super::momenta::{invariant_series, momenta_general_at, MomentumCoefficients};
use crate::error::{Error, Result};
use crate::geometry::{LocalGeometry, SpacetimeChart};

/// E_n = −π′_n − π⁽¹⁾_l R_nkm^l u^m u^k for an invariant Lagrangian.
///
/// π′ is the covariant derivative of π = c1 u + c2 u′ + c3 u″, expanded with
/// the covariant Leibniz rule; the jet must carry u‴.
pub fn euler_poisson_at(
    local: &LocalGeometry,
    jet: &CovariantJet,
    l: &dyn InvariantLagrangian,
) -> Result<DVector<f64>> {
    let u3 = jet
        .u3
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("Euler–Poisson expression needs u‴".into()))?;
    let series = invariant_series(local, jet)?;
    let coeffs = MomentumCoefficients::new(l, series);
    let [(c1, dc1), (c2, dc2), (c3, dc3)] = coeffs.pi_coefficients();

    let pi_prime = dc1 * &jet.u + (c1 + dc2) * &jet.u1 + (c2 + dc3) * &jet.u2 + c3 * u3;
    let momenta = momenta_general_at(local, jet, l)?;
    Ok(-local.lower(&pi_prime) - local.curvature_force(&momenta.pi1, &jet.u))
}

pub fn euler_poisson_covariant(
    chart: &SpacetimeChart,
    jet: &CovariantJet,
    l: &dyn InvariantLagrangian,
) -> Result<DVector<f64>> {
    euler_poisson_at(&chart.local(&jet.x)?, jet, l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variational::Kawaguchi;

    #[test]
    fn straight_line_is_extremal() {
        let chart = SpacetimeChart::minkowski(4);
        let u = DVector::from_vec(vec![1.4, 0.3, -0.2, 0.5]);
        let z = DVector::zeros(4);
        let jet = CovariantJet::new(vec![0.0; 4], u, z.clone(), z.clone()).with_u3(z);
        let e = euler_poisson_covariant(&chart, &jet, &Kawaguchi { a: 2.0 }).unwrap();
        assert_eq!(e.amax(), 0.0);
    }

    #[test]
    fn missing_third_derivative_is_an_error() {
        let chart = SpacetimeChart::minkowski(2);
        let jet = CovariantJet::new(vec![0.0; 2], DVector::from_vec(vec![1.0, 0.0]), DVector::zeros(2), DVector::zeros(2));
        assert!(euler_poisson_covariant(&chart, &jet, &Kawaguchi { a: 1.0 }).is_err());
    }
}
