use nalgebra::DVector;

use super::jet::{coordinate_to_covariant_at, CoordinateJet};
use super::lagrangian::InvariantLagrangian;
use super::momenta::invariants_at;
use crate::error::Result;
use crate::geometry::{LocalGeometry, SpacetimeChart};
use crate::numdiff::gradient;

/// Relative step for the numeric partials of the coordinate Lagrangian.
pub const PARTIAL_STEP: f64 = 1e-5;

/// L(x, u, u̇) evaluated through u′ = u̇ + Γ(u, u) at a fixed point.
pub fn coordinate_lagrangian_at(
    local: &LocalGeometry,
    l: &dyn InvariantLagrangian,
    u: &DVector<f64>,
    udot: &DVector<f64>,
) -> Result<f64> {
    let cj = CoordinateJet {
        x: local.x.clone(),
        u: u.clone(),
        udot: udot.clone(),
        uddot: DVector::zeros(u.len()),
        udddot: None,
    };
    let jet = coordinate_to_covariant_at(local, &cj);
    let inv = invariants_at(local, &jet)?;
    Ok(l.value(inv.gamma, inv.beta, inv.alpha))
}

/// L(x, u, u̇) with the geometry recomputed at `x`.
pub fn coordinate_lagrangian(
    chart: &SpacetimeChart,
    l: &dyn InvariantLagrangian,
    x: &[f64],
    u: &DVector<f64>,
    udot: &DVector<f64>,
) -> Result<f64> {
    coordinate_lagrangian_at(&chart.local(x)?, l, u, udot)
}

/// Residuals of the second-order Zermelo conditions,
///
/// u·∂L/∂u + 2 u̇·∂L/∂u̇ − L  and  u·∂L/∂u̇,
///
/// with numeric partials of the coordinate expression of L.
pub fn zermelo_check(
    chart: &SpacetimeChart,
    x: &[f64],
    u: &DVector<f64>,
    udot: &DVector<f64>,
    l: &dyn InvariantLagrangian,
) -> Result<(f64, f64)> {
    let local = chart.local(x)?;
    let d = u.len();
    let value = coordinate_lagrangian_at(&local, l, u, udot)?;

    let mut packed: Vec<f64> = u.iter().chain(udot.iter()).copied().collect();
    let mut failure = None;
    let mut f = |z: &[f64]| {
        let uu = DVector::from_column_slice(&z[..d]);
        let ud = DVector::from_column_slice(&z[d..]);
        coordinate_lagrangian_at(&local, l, &uu, &ud).unwrap_or_else(|e| {
            failure = Some(e);
            f64::NAN
        })
    };
    let grad = gradient(&mut f, &packed, PARTIAL_STEP);
    if let Some(e) = failure {
        return Err(e);
    }
    packed.clear();
    let (dl_du, dl_dudot) = grad.split_at(d);
    let dot = |a: &[f64], b: &DVector<f64>| a.iter().zip(b.iter()).map(|(p, q)| p * q).sum::<f64>();
    let homogeneity = dot(dl_du, u) + 2.0 * dot(dl_dudot, udot) - value;
    let transversality = dot(dl_dudot, u);
    Ok((homogeneity, transversality))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variational::{Invariants, Kawaguchi, Series};

    #[derive(Debug)]
    struct Energy;

    impl InvariantLagrangian for Energy {
        fn name(&self) -> &'static str {
            "energy"
        }
        fn value(&self, gamma: f64, _: f64, _: f64) -> f64 {
            gamma
        }
        fn partials(&self, _: Series, _: Series, _: Series) -> [Series; 3] {
            [1.0.into(), 0.0.into(), 0.0.into()]
        }
    }

    #[test]
    fn kawaguchi_satisfies_zermelo_in_flat_space() {
        let chart = SpacetimeChart::minkowski(4);
        let u = DVector::from_vec(vec![1.2, 0.3, -0.1, 0.2]);
        let ud = DVector::from_vec(vec![0.1, 0.4, 0.2, -0.3]);
        let (r1, r2) = zermelo_check(&chart, &[0.0; 4], &u, &ud, &Kawaguchi { a: 0.7 }).unwrap();
        assert!(r1.abs() < 1e-7 && r2.abs() < 1e-7, "{r1} {r2}");
    }

    #[test]
    fn quadratic_lagrangian_is_detected() {
        let chart = SpacetimeChart::minkowski(4);
        let u = DVector::from_vec(vec![1.2, 0.3, -0.1, 0.2]);
        let ud = DVector::from_vec(vec![0.1, 0.4, 0.2, -0.3]);
        let (r1, r2) = zermelo_check(&chart, &[0.0; 4], &u, &ud, &Energy).unwrap();
        let gamma = Invariants { gamma: 1.44 - 0.09 - 0.01 - 0.04, beta: 0.0, alpha: 0.0 }.gamma;
        assert!((r1 - gamma).abs() < 1e-8);
        assert!(r2.abs() < 1e-12);
    }
}
