use super::curve::{Bump, CoordinateCurve, Perturbed};
use crate::error::{Error, Result};
use crate::geometry::SpacetimeChart;
use crate::variational::{coordinate_lagrangian, euler_poisson_at, jet_coordinate_to_covariant, InvariantLagrangian};

// five-point Gauss–Legendre rule on [-1, 1]
const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

/// Panels of the composite rule; the result is cross-checked at twice this.
pub const QUADRATURE_PANELS: usize = 64;
/// Largest tolerated relative change between the two panel counts.
pub const QUADRATURE_TOL: f64 = 1e-9;

fn composite(f: &mut dyn FnMut(f64) -> Result<f64>, a: f64, b: f64, panels: usize) -> Result<f64> {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (node, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            total += w * 0.5 * h * f(mid + 0.5 * h * node)?;
        }
    }
    Ok(total)
}

fn checked_integral(f: &mut dyn FnMut(f64) -> Result<f64>, a: f64, b: f64) -> Result<f64> {
    let coarse = composite(f, a, b, QUADRATURE_PANELS)?;
    let fine = composite(f, a, b, 2 * QUADRATURE_PANELS)?;
    if !((fine - coarse).abs() <= QUADRATURE_TOL * fine.abs().max(1.0)) {
        return Err(Error::QuadratureFailure(format!(
            "panel doubling changed the integral from {coarse:e} to {fine:e}"
        )));
    }
    Ok(fine)
}

/// ∫ L(x, ẋ, ẍ) dξ over [a, b].
pub fn action(
    chart: &SpacetimeChart,
    curve: &dyn CoordinateCurve,
    l: &dyn InvariantLagrangian,
    a: f64,
    b: f64,
) -> Result<f64> {
    let mut f = |xi: f64| {
        let [x, u, udot, ..] = curve.derivatives(xi);
        let x: Vec<f64> = x.iter().copied().collect();
        coordinate_lagrangian(chart, l, &x, &u, &udot)
    };
    checked_integral(&mut f, a, b)
}

/// First variation of the action along `bump`, two ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionVariation {
    /// [S(x + ε b) − S(x − ε b)] / 2ε, Richardson-extrapolated in ε.
    pub derivative: f64,
    /// ∫ E_n b^n dξ with E from the covariant Euler–Poisson expression.
    pub pairing: f64,
}

impl ActionVariation {
    pub fn relative_gap(&self) -> f64 {
        (self.derivative - self.pairing).abs() / self.pairing.abs().max(self.derivative.abs()).max(1e-300)
    }
}

pub fn action_variation(
    chart: &SpacetimeChart,
    curve: &dyn CoordinateCurve,
    l: &dyn InvariantLagrangian,
    bump: &Bump,
    eps: f64,
) -> Result<ActionVariation> {
    let (a, b) = bump.support;
    let s_at = |e: f64| {
        let perturbed = Perturbed { base: curve, bump, eps: e };
        action(chart, &perturbed, l, a, b)
    };
    let central = |e: f64| -> Result<f64> { Ok((s_at(e)? - s_at(-e)?) / (2.0 * e)) };
    let derivative = (4.0 * central(0.5 * eps)? - central(eps)?) / 3.0;

    let mut integrand = |xi: f64| -> Result<f64> {
        let cj = curve.coordinate_jet(xi);
        let jet = jet_coordinate_to_covariant(chart, &cj)?;
        let local = chart.local(&cj.x)?;
        let e = euler_poisson_at(&local, &jet, l)?;
        Ok(e.dot(&bump.derivatives(xi)[0]))
    };
    let pairing = checked_integral(&mut integrand, a, b)?;
    Ok(ActionVariation { derivative, pairing })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_degree_nine() {
        let mut f = |x: f64| Ok(x.powi(9) - 3.0 * x.powi(4));
        let v = composite(&mut f, 0.0, 2.0, 1).unwrap();
        assert!((v - (1024.0 / 10.0 - 3.0 * 32.0 / 5.0)).abs() < 1e-12);
    }
}
