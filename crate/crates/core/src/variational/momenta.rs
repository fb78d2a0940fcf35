use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::jet::CovariantJet;
use super::lagrangian::InvariantLagrangian;
use super::series::Series;
use crate::error::{Error, Result};
use crate::geometry::{LocalGeometry, SpacetimeChart};

/// The three differential invariants of a jet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Invariants {
    /// ⟨u, u⟩
    pub gamma: f64,
    /// ⟨u, u′⟩
    pub beta: f64,
    /// ⟨u′, u′⟩
    pub alpha: f64,
}

/// Covariant momenta, all with lower indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Momenta {
    pub pi: DVector<f64>,
    pub pi1: DVector<f64>,
    pub pi1_prime: DVector<f64>,
}

pub fn invariants_at(local: &LocalGeometry, jet: &CovariantJet) -> Result<Invariants> {
    let gamma = local.inner(&jet.u, &jet.u);
    if !(gamma > 0.0) {
        return Err(Error::NonTimelike { gamma });
    }
    Ok(Invariants {
        gamma,
        beta: local.inner(&jet.u, &jet.u1),
        alpha: local.inner(&jet.u1, &jet.u1),
    })
}

pub fn invariants(chart: &SpacetimeChart, jet: &CovariantJet) -> Result<Invariants> {
    invariants_at(&chart.local(&jet.x)?, jet)
}

/// (αγ − β²)/γ³: the squared first Frenet curvature in invariant form. It can
/// be negative in Lorentzian signature; at natural gauge it equals α.
pub fn frenet_curvature_at(local: &LocalGeometry, jet: &CovariantJet) -> Result<f64> {
    let inv = invariants_at(local, jet)?;
    Ok((inv.alpha * inv.gamma - inv.beta * inv.beta) / inv.gamma.powi(3))
}

pub fn frenet_curvature(chart: &SpacetimeChart, jet: &CovariantJet) -> Result<f64> {
    frenet_curvature_at(&chart.local(&jet.x)?, jet)
}

/// Taylor series of (γ, β, α) along the jet. The second-order coefficients
/// need u‴ and are NaN without it.
pub(crate) fn invariant_series(local: &LocalGeometry, jet: &CovariantJet) -> Result<[Series; 3]> {
    let inv = invariants_at(local, jet)?;
    let ip = |a: &DVector<f64>, b: &DVector<f64>| local.inner(a, b);
    let delta = ip(&jet.u, &jet.u2);
    let eps = ip(&jet.u1, &jet.u2);
    let (zeta, eta, theta) = match &jet.u3 {
        Some(u3) => (ip(&jet.u, u3), ip(&jet.u2, &jet.u2), ip(&jet.u1, u3)),
        None => (f64::NAN, f64::NAN, f64::NAN),
    };
    // γ′ = 2β, β′ = α + ⟨u,u″⟩, α′ = 2⟨u′,u″⟩ and one derivative further
    Ok([
        Series([inv.gamma, 2.0 * inv.beta, inv.alpha + delta]),
        Series([inv.beta, inv.alpha + delta, 0.5 * (3.0 * eps + zeta)]),
        Series([inv.alpha, 2.0 * eps, eta + theta]),
    ])
}

/// Coefficients of π = c1 u + c2 u′ + c3 u″ (as series, so their parameter
/// derivatives are available) together with the Lagrangian partials.
pub(crate) struct MomentumCoefficients {
    pub partials: [Series; 3],
}

impl MomentumCoefficients {
    pub(crate) fn new(l: &dyn InvariantLagrangian, series: [Series; 3]) -> Self {
        let [g, b, a] = series;
        Self {
            partials: l.partials(g, b, a),
        }
    }

    /// (c, c′) for each of the u, u′, u″ coefficients of π.
    pub(crate) fn pi_coefficients(&self) -> [(f64, f64); 3] {
        let [lg, lb, la] = &self.partials;
        [
            (
                2.0 * lg.derivative(0) - lb.derivative(1),
                2.0 * lg.derivative(1) - lb.derivative(2),
            ),
            (-2.0 * la.derivative(1), -2.0 * la.derivative(2)),
            (-2.0 * la.derivative(0), -2.0 * la.derivative(1)),
        ]
    }
}

/// Covariant momenta of an arbitrary invariant Lagrangian from
/// π⁽¹⁾ = L_β u + 2 L_α u′ and π⁽¹⁾′ + π = 2 L_γ u + L_β u′, with π⁽¹⁾′ taken
/// from the differential prolongation of the first formula.
pub fn momenta_general_at(
    local: &LocalGeometry,
    jet: &CovariantJet,
    l: &dyn InvariantLagrangian,
) -> Result<Momenta> {
    let series = invariant_series(local, jet)?;
    let coeffs = MomentumCoefficients::new(l, series);
    let [lg, lb, la] = &coeffs.partials;
    let (u, u1, u2) = (&jet.u, &jet.u1, &jet.u2);

    let pi1 = lb.derivative(0) * u + 2.0 * la.derivative(0) * u1;
    let pi1_prime = lb.derivative(1) * u
        + (lb.derivative(0) + 2.0 * la.derivative(1)) * u1
        + 2.0 * la.derivative(0) * u2;
    let pi = (2.0 * lg.derivative(0)) * u + lb.derivative(0) * u1 - &pi1_prime;

    Ok(Momenta {
        pi: local.lower(&pi),
        pi1: local.lower(&pi1),
        pi1_prime: local.lower(&pi1_prime),
    })
}

pub fn momenta_general(
    chart: &SpacetimeChart,
    jet: &CovariantJet,
    l: &dyn InvariantLagrangian,
) -> Result<Momenta> {
    momenta_general_at(&chart.local(&jet.x)?, jet, l)
}

/// Closed-form momenta of the Kawaguchi function,
///
/// π⁽¹⁾ = (2/‖u‖³) u′ − (2⟨u,u′⟩/‖u‖⁵) u,
/// π = (2⟨u,u″⟩/‖u‖⁵ − ⟨u′,u′⟩/‖u‖⁵ − 5⟨u,u′⟩²/‖u‖⁷ + A/‖u‖) u
///     + (6⟨u,u′⟩/‖u‖⁵) u′ − (2/‖u‖³) u″,
///
/// with π⁽¹⁾′ obtained by differentiating the first line by hand.
pub fn momenta_kawaguchi_at(local: &LocalGeometry, jet: &CovariantJet, a: f64) -> Result<Momenta> {
    let inv = invariants_at(local, jet)?;
    let (gamma, beta, alpha) = (inv.gamma, inv.beta, inv.alpha);
    let delta = local.inner(&jet.u, &jet.u2);
    let n = gamma.sqrt();
    let (n3, n5, n7) = (n.powi(3), n.powi(5), n.powi(7));
    let (u, u1, u2) = (&jet.u, &jet.u1, &jet.u2);

    let pi1 = (2.0 / n3) * u1 - (2.0 * beta / n5) * u;
    let pi = (2.0 * delta / n5 - alpha / n5 - 5.0 * beta * beta / n7 + a / n) * u
        + (6.0 * beta / n5) * u1
        - (2.0 / n3) * u2;
    let pi1_prime = (2.0 / n3) * u2 - (8.0 * beta / n5) * u1
        + (-2.0 * (alpha + delta) / n5 + 10.0 * beta * beta / n7) * u;

    Ok(Momenta {
        pi: local.lower(&pi),
        pi1: local.lower(&pi1),
        pi1_prime: local.lower(&pi1_prime),
    })
}

pub fn momenta_kawaguchi(chart: &SpacetimeChart, jet: &CovariantJet, a: f64) -> Result<Momenta> {
    momenta_kawaguchi_at(&chart.local(&jet.x)?, jet, a)
}

/// π⁽¹⁾′ + π − 2 L_γ u − L_β u′, lowered. Vanishes identically for momenta
/// of an invariant Lagrangian.
pub fn reconstruction_residual(
    local: &LocalGeometry,
    jet: &CovariantJet,
    l: &dyn InvariantLagrangian,
    momenta: &Momenta,
) -> Result<DVector<f64>> {
    let inv = invariants_at(local, jet)?;
    let [lg, lb, _] = l.partials(inv.gamma.into(), inv.beta.into(), inv.alpha.into());
    let rhs = local.lower(&(2.0 * lg.value() * &jet.u + lb.value() * &jet.u1));
    Ok(&momenta.pi1_prime + &momenta.pi - rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variational::Kawaguchi;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn minkowski_invariants_follow_signature() {
        let chart = SpacetimeChart::minkowski(4);
        let jet = CovariantJet::new(vec![0.0; 4], v(&[1.0, 0.0, 0.0, 0.0]), v(&[0.0, 0.7, 0.0, 0.0]), DVector::zeros(4));
        let inv = invariants(&chart, &jet).unwrap();
        assert_eq!((inv.gamma, inv.beta), (1.0, 0.0));
        assert!((inv.alpha + 0.49).abs() < 1e-15);
        let spacelike = CovariantJet::new(vec![0.0; 4], v(&[0.0, 1.0, 0.0, 0.0]), DVector::zeros(4), DVector::zeros(4));
        assert!(matches!(invariants(&chart, &spacelike), Err(Error::NonTimelike { .. })));
    }

    #[test]
    fn frenet_curvature_degenerate_and_natural() {
        let chart = SpacetimeChart::minkowski(4);
        let u = v(&[1.3, 0.2, -0.4, 0.1]);
        let parallel = CovariantJet::new(vec![0.0; 4], u.clone(), 0.6 * &u, DVector::zeros(4));
        assert!(frenet_curvature(&chart, &parallel).unwrap().abs() < 1e-15);
        let natural = CovariantJet::new(vec![0.0; 4], v(&[1.0, 0.0, 0.0, 0.0]), v(&[0.0, 0.0, 0.3, 0.4]), DVector::zeros(4));
        assert!((frenet_curvature(&chart, &natural).unwrap() + 0.25).abs() < 1e-15);
    }

    #[test]
    fn geodesic_momenta() {
        let chart = SpacetimeChart::schwarzschild(1.0).unwrap();
        let x = vec![0.0, 9.0, 1.2, 0.0];
        let u = v(&[1.3, 0.1, 0.02, 0.04]);
        let jet = CovariantJet::new(x.clone(), u.clone(), DVector::zeros(4), DVector::zeros(4));
        let a = 1.7;
        let local = chart.local(&x).unwrap();
        let gamma = local.inner(&u, &u);
        let expect = local.lower(&u) * (a / gamma.sqrt());
        for m in [
            momenta_general(&chart, &jet, &Kawaguchi { a }).unwrap(),
            momenta_kawaguchi(&chart, &jet, a).unwrap(),
        ] {
            assert_eq!(m.pi1.amax(), 0.0);
            assert!((m.pi - &expect).amax() < 1e-14);
        }
    }

    #[test]
    fn natural_gauge_momenta() {
        let chart = SpacetimeChart::minkowski(4);
        let u1 = v(&[0.0, 0.0, 0.3, 0.4]);
        let jet = CovariantJet::new(vec![0.0; 4], v(&[1.0, 0.0, 0.0, 0.0]), u1.clone(), DVector::zeros(4));
        let m = momenta_general(&chart, &jet, &Kawaguchi { a: 0.0 }).unwrap();
        let local = chart.local(&jet.x).unwrap();
        assert!((&m.pi1 - local.lower(&(2.0 * &u1))).amax() < 1e-15);
        // with u″ = 0 and A = 0 the closed form gives π = −α u
        let k = momenta_kawaguchi(&chart, &jet, 0.0).unwrap();
        assert!((&k.pi - local.lower(&jet.u) * 0.25).amax() < 1e-15);
    }
}
