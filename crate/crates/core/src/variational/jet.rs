use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::{LocalGeometry, SpacetimeChart};

/// Tolerance on |γ − 1| and |β| for a jet flagged as naturally parametrised.
pub const GAUGE_EPS: f64 = 1e-6;

/// Point of a worldline with its covariant velocity chain.
///
/// `u1`, `u2`, `u3` are successive covariant derivatives of `u = ẋ` along the
/// curve; `param` is ξ, or the arc length s for natural jets.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariantJet {
    pub x: Vec<f64>,
    pub u: DVector<f64>,
    pub u1: DVector<f64>,
    pub u2: DVector<f64>,
    pub u3: Option<DVector<f64>>,
    pub param: f64,
    pub natural: bool,
}

impl CovariantJet {
    pub fn new(x: Vec<f64>, u: DVector<f64>, u1: DVector<f64>, u2: DVector<f64>) -> Self {
        Self {
            x,
            u,
            u1,
            u2,
            u3: None,
            param: 0.0,
            natural: false,
        }
    }

    pub fn with_u3(mut self, u3: DVector<f64>) -> Self {
        self.u3 = Some(u3);
        self
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        let mut lens = vec![self.x.len(), self.u.len(), self.u1.len(), self.u2.len()];
        lens.extend(self.u3.as_ref().map(|v| v.len()));
        match lens.into_iter().find(|l| *l != dim) {
            Some(found) => Err(Error::DimensionMismatch { expected: dim, found }),
            None => Ok(()),
        }
    }

    /// Whether γ = 1 and β = 0 hold to [`GAUGE_EPS`].
    pub fn is_natural(&self, local: &LocalGeometry) -> bool {
        let gamma = local.inner(&self.u, &self.u);
        let beta = local.inner(&self.u, &self.u1);
        (gamma - 1.0).abs() <= GAUGE_EPS && beta.abs() <= GAUGE_EPS
    }
}

/// Ordinary parameter derivatives of a coordinate curve at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateJet {
    pub x: Vec<f64>,
    pub u: DVector<f64>,
    pub udot: DVector<f64>,
    pub uddot: DVector<f64>,
    pub udddot: Option<DVector<f64>>,
}

/// {x, u, u̇, ü, u⃛} ↦ {x, u, u′, u″, u‴}.
///
/// Works from the Christoffel symbols along the curve, Γ(ξ) = Γ(x(ξ)), whose
/// parameter derivatives are ∂Γ·u and ∂∂Γ·(u,u) + ∂Γ·u̇. The third-order part
/// needs `local` built with [`SpacetimeChart::local3`].
pub fn coordinate_to_covariant_at(local: &LocalGeometry, cj: &CoordinateJet) -> CovariantJet {
    let c = &local.chris;
    let (u, ud, udd) = (&cj.u, &cj.udot, &cj.uddot);

    let u1 = ud + c.contract(u, u);
    // d/dξ u1
    let du1 = udd + c.contract_derivative(u, u, u) + 2.0 * c.contract(ud, u);
    let u2 = &du1 + c.contract(u, &u1);

    let u3 = cj.udddot.as_ref().map(|uddd| {
        let d2u1 = uddd
            + c.contract_second_derivative(u, u, u, u)
            + c.contract_derivative(ud, u, u)
            + 4.0 * c.contract_derivative(u, ud, u)
            + 2.0 * c.contract(udd, u)
            + 2.0 * c.contract(ud, ud);
        let du2 = d2u1 + c.contract_derivative(u, u, &u1) + c.contract(ud, &u1) + c.contract(u, &du1);
        du2 + c.contract(u, &u2)
    });

    CovariantJet {
        x: cj.x.clone(),
        u: u.clone(),
        u1,
        u2,
        u3,
        param: 0.0,
        natural: false,
    }
}

/// Inverse of [`coordinate_to_covariant_at`].
pub fn covariant_to_coordinate_at(local: &LocalGeometry, jet: &CovariantJet) -> CoordinateJet {
    let c = &local.chris;
    let u = &jet.u;
    let ud = &jet.u1 - c.contract(u, u);
    let du1 = &jet.u2 - c.contract(u, &jet.u1);
    let udd = &du1 - c.contract_derivative(u, u, u) - 2.0 * c.contract(&ud, u);
    let udddot = jet.u3.as_ref().map(|u3| {
        let du2 = u3 - c.contract(u, &jet.u2);
        let d2u1 = du2 - c.contract_derivative(u, u, &jet.u1) - c.contract(&ud, &jet.u1) - c.contract(u, &du1);
        d2u1 - c.contract_second_derivative(u, u, u, u)
            - c.contract_derivative(&ud, u, u)
            - 4.0 * c.contract_derivative(u, &ud, u)
            - 2.0 * c.contract(&udd, u)
            - 2.0 * c.contract(&ud, &ud)
    });
    CoordinateJet {
        x: jet.x.clone(),
        u: u.clone(),
        udot: ud,
        uddot: udd,
        udddot,
    }
}

pub fn jet_coordinate_to_covariant(chart: &SpacetimeChart, cj: &CoordinateJet) -> Result<CovariantJet> {
    let local = if cj.udddot.is_some() {
        chart.local3(&cj.x)?
    } else {
        chart.local(&cj.x)?
    };
    Ok(coordinate_to_covariant_at(&local, cj))
}

pub fn jet_covariant_to_coordinate(chart: &SpacetimeChart, jet: &CovariantJet) -> Result<CoordinateJet> {
    let local = if jet.u3.is_some() {
        chart.local3(&jet.x)?
    } else {
        chart.local(&jet.x)?
    };
    Ok(covariant_to_coordinate_at(&local, jet))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn minkowski_conversion_is_identity() {
        let chart = SpacetimeChart::minkowski(4);
        let cj = CoordinateJet {
            x: vec![0.0, 1.0, 2.0, 3.0],
            u: v(&[1.2, 0.1, 0.2, 0.3]),
            udot: v(&[0.0, 0.5, -0.1, 0.2]),
            uddot: v(&[0.1, 0.0, 0.3, -0.4]),
            udddot: Some(v(&[0.7, 0.1, 0.0, 0.2])),
        };
        let jet = jet_coordinate_to_covariant(&chart, &cj).unwrap();
        assert_eq!(jet.u1, cj.udot);
        assert_eq!(jet.u2, cj.uddot);
        assert_eq!(jet.u3.as_ref(), cj.udddot.as_ref());
    }

    #[test]
    fn zero_coordinate_acceleration_gives_christoffel_term() {
        let chart = SpacetimeChart::schwarzschild(1.0).unwrap();
        let x = vec![0.0, 8.0, 1.3, 0.2];
        let u = v(&[1.1, 0.2, 0.01, 0.03]);
        let cj = CoordinateJet {
            x: x.clone(),
            u: u.clone(),
            udot: DVector::zeros(4),
            uddot: DVector::zeros(4),
            udddot: None,
        };
        let jet = jet_coordinate_to_covariant(&chart, &cj).unwrap();
        let local = chart.local(&x).unwrap();
        assert!((jet.u1 - local.chris.contract(&u, &u)).amax() < 1e-15);
    }
}
