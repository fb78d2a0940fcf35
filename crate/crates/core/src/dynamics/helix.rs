use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracles::CoordinateCurve;
use crate::variational::CovariantJet;

/// Closed-form Zitterbewegung helix of flat spacetime,
/// x(s) = (b s, r cos(ωs + φ₀), r sin(ωs + φ₀), 0) with b² = 1 + r²ω², so that
/// s is arc length in signature (+,−,−,−). It solves x⁗ + ω² x″ = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RieweHelix {
    pub r: f64,
    pub omega: f64,
    #[serde(default)]
    pub phase: f64,
    /// Spatial coordinates carrying the rotation.
    #[serde(default = "default_axes")]
    pub axes: (usize, usize),
    #[serde(default = "default_dim")]
    pub dim: usize,
}

fn default_axes() -> (usize, usize) {
    (1, 2)
}

fn default_dim() -> usize {
    4
}

impl RieweHelix {
    pub fn new(r: f64, omega: f64) -> Self {
        Self {
            r,
            omega,
            phase: 0.0,
            axes: default_axes(),
            dim: default_dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (i, j) = self.axes;
        let ok = self.dim >= 3 && i != j && i > 0 && j > 0 && i < self.dim && j < self.dim;
        if !ok {
            return Err(Error::InvalidConfig(format!(
                "helix axes {:?} must be two distinct spatial indices below {}",
                self.axes, self.dim
            )));
        }
        if !(self.r.is_finite() && self.omega.is_finite() && self.r >= 0.0) {
            return Err(Error::InvalidConfig("helix needs finite r ≥ 0 and ω".into()));
        }
        Ok(())
    }

    /// Longitudinal rate b = √(1 + r²ω²).
    pub fn b(&self) -> f64 {
        (1.0 + (self.r * self.omega).powi(2)).sqrt()
    }

    /// ⟨u′,u′⟩ = −r²ω⁴ along the whole helix.
    pub fn alpha(&self) -> f64 {
        -(self.r * self.r) * self.omega.powi(4)
    }

    /// The A for which the helix extremises the Kawaguchi action:
    /// A = 3α − 2ω², equivalently k² = A/3 + 2ω²/3 with k² = α.
    pub fn on_constraint_a(&self) -> f64 {
        3.0 * self.alpha() - 2.0 * self.omega * self.omega
    }

    /// `[x, x′, x″, x‴, x⁗]` at arc length s.
    pub fn derivatives_at(&self, s: f64) -> [DVector<f64>; 5] {
        let (i, j) = self.axes;
        let theta = self.omega * s + self.phase;
        let (sin, cos) = theta.sin_cos();
        let mut out: [DVector<f64>; 5] = std::array::from_fn(|_| DVector::zeros(self.dim));
        out[0][0] = self.b() * s;
        out[1][0] = self.b();
        // k-th derivative of (cos θ, sin θ) is ω^k (cos, sin)(θ + kπ/2)
        let rot = [(cos, sin), (-sin, cos), (-cos, -sin), (sin, -cos), (cos, sin)];
        for (k, (c, sn)) in rot.iter().enumerate() {
            let scale = self.r * self.omega.powi(k as i32);
            out[k][i] = scale * c;
            out[k][j] = scale * sn;
        }
        out
    }

    /// Natural-gauge jet at s, carrying u‴. Covariant and coordinate
    /// derivatives coincide in Minkowski coordinates.
    pub fn jet(&self, s: f64) -> CovariantJet {
        let [x, u, u1, u2, u3] = self.derivatives_at(s);
        let mut jet = CovariantJet::new(x.iter().copied().collect(), u, u1, u2).with_u3(u3);
        jet.param = s;
        jet.natural = true;
        jet
    }
}

impl CoordinateCurve for RieweHelix {
    fn dim(&self) -> usize {
        self.dim
    }

    fn derivatives(&self, xi: f64) -> [DVector<f64>; 5] {
        self.derivatives_at(xi)
    }

    fn window(&self) -> (f64, f64) {
        (0.0, std::f64::consts::TAU / self.omega.abs().max(1e-12))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SpacetimeChart;
    use crate::variational::invariants;

    #[test]
    fn satisfies_riewe_equation_and_gauge() {
        let helix = RieweHelix::new(0.5, 2.0);
        let chart = SpacetimeChart::minkowski(4);
        for s in [0.0, 0.3, 1.7, 9.2] {
            let d = helix.derivatives_at(s);
            let riewe = &d[4] + &d[2] * helix.omega.powi(2);
            assert!(riewe.amax() < 1e-12);
            let inv = invariants(&chart, &helix.jet(s)).unwrap();
            assert!((inv.gamma - 1.0).abs() < 1e-14);
            assert!(inv.beta.abs() < 1e-14);
            assert!((inv.alpha - helix.alpha()).abs() < 1e-13);
        }
        assert_eq!(helix.alpha(), -4.0);
        assert_eq!(helix.on_constraint_a(), -20.0);
    }

    #[test]
    fn zero_radius_is_a_straight_line() {
        let helix = RieweHelix::new(0.0, 3.0);
        let d = helix.derivatives_at(2.0);
        assert_eq!(d[0][0], 2.0);
        assert!(d[2].amax() == 0.0 && d[4].amax() == 0.0);
    }

    #[test]
    fn axes_are_validated() {
        let mut helix = RieweHelix::new(0.5, 2.0);
        helix.axes = (0, 2);
        assert!(helix.validate().is_err());
        helix.axes = (3, 1);
        assert!(helix.validate().is_ok());
    }
}
