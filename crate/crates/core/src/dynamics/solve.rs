use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::LocalGeometry;
use crate::variational::{euler_poisson_at, invariants_at, momenta_kawaguchi_at, CovariantJet, InvariantLagrangian};

/// How u‴ is obtained from (x, u, u′, u″).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum U3Method {
    /// Closed-form arc-length equation of the Kawaguchi function.
    Kawaguchi,
    /// Linear solve of E(u‴) = 0 with the gauge row ⟨u, u‴⟩ = −3⟨u′, u″⟩.
    Linear,
}

impl U3Method {
    /// Closed form when the Lagrangian is the Kawaguchi function.
    pub fn for_lagrangian(l: &dyn InvariantLagrangian) -> Self {
        if l.kawaguchi_a().is_some() {
            U3Method::Kawaguchi
        } else {
            U3Method::Linear
        }
    }
}

fn check_gauge(local: &LocalGeometry, jet: &CovariantJet, limit: f64) -> Result<()> {
    let inv = invariants_at(local, jet)?;
    let (gamma_drift, beta_drift) = ((inv.gamma - 1.0).abs(), inv.beta.abs());
    if gamma_drift > limit || beta_drift > limit {
        return Err(Error::GaugeViolated {
            s: jet.param,
            gamma_drift,
            beta_drift,
            limit,
        });
    }
    Ok(())
}

/// Arc-length form of the Kawaguchi equation,
/// D/ds[(A − 3α) u − 2u″] = −π⁽¹⁾_l R_nkm^l u^m u^k, solved for u‴:
///
/// u‴ = ½[(A − 3α) u′ − 6⟨u′,u″⟩ u + g⁻¹ π⁽¹⁾_l R_·km^l u^m u^k].
pub fn solve_u3_kawaguchi(local: &LocalGeometry, jet: &CovariantJet, a: f64, drift_limit: f64) -> Result<DVector<f64>> {
    check_gauge(local, jet, drift_limit)?;
    let alpha = local.inner(&jet.u1, &jet.u1);
    let eps = local.inner(&jet.u1, &jet.u2);
    let pi1 = momenta_kawaguchi_at(local, jet, a)?.pi1;
    let force = local.raise(&local.curvature_force(&pi1, &jet.u));
    Ok(0.5 * ((a - 3.0 * alpha) * &jet.u1 - 6.0 * eps * &jet.u + force))
}

/// u‴ for any invariant Lagrangian. E is affine in u‴ with a principal
/// matrix M annihilating u from the right and u_l from the left, so the
/// gauge row is added to make the system regular: (M + u_l u_lᵀ) u‴ =
/// −E(0) − 3⟨u′,u″⟩ u_l.
pub fn solve_u3_linear(
    local: &LocalGeometry,
    jet: &CovariantJet,
    l: &dyn InvariantLagrangian,
    drift_limit: f64,
) -> Result<DVector<f64>> {
    check_gauge(local, jet, drift_limit)?;
    let d = jet.dim();
    let mut probe = jet.clone();
    let mut eval = |u3: DVector<f64>| {
        probe.u3 = Some(u3);
        euler_poisson_at(local, &probe, l)
    };
    let e0 = eval(DVector::zeros(d))?;
    let mut m = DMatrix::zeros(d, d);
    for j in 0..d {
        let col = eval(DVector::from_fn(d, |i, _| if i == j { 1.0 } else { 0.0 }))? - &e0;
        m.set_column(j, &col);
    }
    let ul = local.lower(&jet.u);
    let eps = local.inner(&jet.u1, &jet.u2);
    let system = &m + &ul * ul.transpose();
    let rhs = -e0 - 3.0 * eps * &ul;
    let scale = system.amax().max(f64::MIN_POSITIVE);
    let lu = system.lu();
    let det = lu.determinant();
    if !(det.abs() > 1e-12 * scale.powi(d as i32)) {
        return Err(Error::SingularPrincipal(format!("det = {det:e} at s = {}", jet.param)));
    }
    lu.solve(&rhs)
        .ok_or_else(|| Error::SingularPrincipal(format!("LU solve failed at s = {}", jet.param)))
}

/// Dispatches on [`U3Method`].
pub fn solve_u3(
    local: &LocalGeometry,
    jet: &CovariantJet,
    l: &dyn InvariantLagrangian,
    method: U3Method,
    drift_limit: f64,
) -> Result<DVector<f64>> {
    match (method, l.kawaguchi_a()) {
        (U3Method::Kawaguchi, Some(a)) => solve_u3_kawaguchi(local, jet, a, drift_limit),
        (U3Method::Kawaguchi, None) => Err(Error::InvalidConfig(format!(
            "closed-form u‴ is only available for the Kawaguchi function, not {}",
            l.name()
        ))),
        (U3Method::Linear, _) => solve_u3_linear(local, jet, l, drift_limit),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::RieweHelix;
    use crate::geometry::SpacetimeChart;
    use crate::variational::Kawaguchi;

    #[test]
    fn geodesic_data_gives_zero() {
        let chart = SpacetimeChart::minkowski(4);
        let local = chart.local(&[0.0; 4]).unwrap();
        let u = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        let jet = CovariantJet::new(vec![0.0; 4], u, DVector::zeros(4), DVector::zeros(4));
        let u3 = solve_u3_kawaguchi(&local, &jet, 1.0, 1e-3).unwrap();
        assert_eq!(u3.amax(), 0.0);
    }

    #[test]
    fn helix_third_derivative_is_reproduced() {
        let helix = RieweHelix::new(0.5, 2.0);
        let l = Kawaguchi { a: helix.on_constraint_a() };
        let chart = SpacetimeChart::minkowski(4);
        let jet = helix.jet(0.0);
        let local = chart.local(&jet.x).unwrap();
        let exact = jet.u3.clone().unwrap();
        for method in [U3Method::Kawaguchi, U3Method::Linear] {
            let u3 = solve_u3(&local, &jet, &l, method, 1e-3).unwrap();
            assert!((u3 - &exact).amax() < 1e-9, "{method:?}");
        }
    }

    #[test]
    fn drift_is_rejected() {
        let chart = SpacetimeChart::minkowski(2);
        let local = chart.local(&[0.0; 2]).unwrap();
        let jet = CovariantJet::new(
            vec![0.0; 2],
            DVector::from_vec(vec![1.1, 0.0]),
            DVector::zeros(2),
            DVector::zeros(2),
        );
        let err = solve_u3_kawaguchi(&local, &jet, 1.0, 1e-3).unwrap_err();
        assert!(matches!(err, Error::GaugeViolated { .. }));
    }
}
