use nalgebra::DVector;
use rand::Rng;

use crate::geometry::{MetricSource, SpacetimeChart};
use crate::variational::CoordinateJet;

/// A coordinate curve ξ ↦ x(ξ) with ordinary derivatives through fourth
/// order.
pub trait CoordinateCurve: Send + Sync {
    fn dim(&self) -> usize;

    /// `[x, ẋ, ẍ, x⃛, x⁗]` at ξ.
    fn derivatives(&self, xi: f64) -> [DVector<f64>; 5];

    /// Parameter window on which the curve is meant to be used.
    fn window(&self) -> (f64, f64);

    fn coordinate_jet(&self, xi: f64) -> CoordinateJet {
        let [x, u, udot, uddot, udddot] = self.derivatives(xi);
        CoordinateJet {
            x: x.iter().copied().collect(),
            u,
            udot,
            uddot,
            udddot: Some(udddot),
        }
    }
}

/// x(ξ) = Σ_k c_k ξ^k.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialCurve {
    pub coeffs: Vec<DVector<f64>>,
    pub window: (f64, f64),
}

impl PolynomialCurve {
    pub fn new(coeffs: Vec<DVector<f64>>, window: (f64, f64)) -> Self {
        assert!(!coeffs.is_empty(), "polynomial curve needs at least one coefficient");
        Self { coeffs, window }
    }
}

/// k-th derivative of Σ_j c_j ξ^j.
fn poly_derivative(coeffs: &[DVector<f64>], xi: f64, k: usize) -> DVector<f64> {
    let mut out = DVector::zeros(coeffs[0].len());
    for (j, c) in coeffs.iter().enumerate().skip(k) {
        let falling: f64 = ((j - k + 1)..=j).map(|v| v as f64).product();
        out += c * (falling * xi.powi((j - k) as i32));
    }
    out
}

impl CoordinateCurve for PolynomialCurve {
    fn dim(&self) -> usize {
        self.coeffs[0].len()
    }

    fn derivatives(&self, xi: f64) -> [DVector<f64>; 5] {
        std::array::from_fn(|k| poly_derivative(&self.coeffs, xi, k))
    }

    fn window(&self) -> (f64, f64) {
        self.window
    }
}

/// y(τ) = x(φ(τ)) for a smooth increasing φ with derivatives through fourth
/// order.
pub struct Reparametrized<'a> {
    pub inner: &'a dyn CoordinateCurve,
    /// Returns `[φ, φ′, φ″, φ‴, φ⁗]` at τ.
    pub phi: Box<dyn Fn(f64) -> [f64; 5] + Send + Sync + 'a>,
    pub window: (f64, f64),
}

impl CoordinateCurve for Reparametrized<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn derivatives(&self, tau: f64) -> [DVector<f64>; 5] {
        let [p0, p1, p2, p3, p4] = (self.phi)(tau);
        let [x, x1, x2, x3, x4] = self.inner.derivatives(p0);
        // Faà di Bruno through fourth order
        let y1 = &x1 * p1;
        let y2 = &x2 * (p1 * p1) + &x1 * p2;
        let y3 = &x3 * p1.powi(3) + &x2 * (3.0 * p1 * p2) + &x1 * p3;
        let y4 = &x4 * p1.powi(4)
            + &x3 * (6.0 * p1 * p1 * p2)
            + &x2 * (3.0 * p2 * p2 + 4.0 * p1 * p3)
            + &x1 * p4;
        [x, y1, y2, y3, y4]
    }

    fn window(&self) -> (f64, f64) {
        self.window
    }
}

/// Compactly supported perturbation b(ξ) = v ((ξ − a)(b − ξ))³ / ((b − a)/2)⁶,
/// vanishing with two derivatives at both ends of [a, b].
#[derive(Debug, Clone, PartialEq)]
pub struct Bump {
    pub direction: DVector<f64>,
    pub support: (f64, f64),
}

impl Bump {
    /// `[b, b′, b″, b‴, b⁗]` at ξ (zero outside the support).
    pub fn derivatives(&self, xi: f64) -> [DVector<f64>; 5] {
        let (a, b) = self.support;
        let d = self.direction.len();
        if xi <= a || xi >= b {
            return std::array::from_fn(|_| DVector::zeros(d));
        }
        // q = (ξ − a)(b − ξ), ψ = q³ / h⁶ with h = (b − a)/2
        let h6 = ((b - a) / 2.0).powi(6);
        let q = (xi - a) * (b - xi);
        let q1 = a + b - 2.0 * xi;
        let q2 = -2.0;
        let psi = [
            q.powi(3),
            3.0 * q * q * q1,
            6.0 * q * q1 * q1 + 3.0 * q * q * q2,
            6.0 * q1.powi(3) + 18.0 * q * q1 * q2,
            36.0 * q1 * q1 * q2 + 18.0 * q * q2 * q2,
        ];
        std::array::from_fn(|k| &self.direction * (psi[k] / h6))
    }
}

/// x(ξ) + ε b(ξ).
pub struct Perturbed<'a> {
    pub base: &'a dyn CoordinateCurve,
    pub bump: &'a Bump,
    pub eps: f64,
}

impl CoordinateCurve for Perturbed<'_> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn derivatives(&self, xi: f64) -> [DVector<f64>; 5] {
        let base = self.base.derivatives(xi);
        let bump = self.bump.derivatives(xi);
        std::array::from_fn(|k| &base[k] + &bump[k] * self.eps)
    }

    fn window(&self) -> (f64, f64) {
        self.base.window()
    }
}

/// Smallest γ = ⟨ẋ, ẋ⟩ over `samples` evenly spaced points of the window;
/// `None` if any point leaves the chart.
pub fn min_gamma(chart: &SpacetimeChart, curve: &dyn CoordinateCurve, samples: usize) -> Option<f64> {
    let (a, b) = curve.window();
    (0..=samples)
        .map(|i| {
            let xi = a + (b - a) * i as f64 / samples as f64;
            let [x, u, ..] = curve.derivatives(xi);
            let x: Vec<f64> = x.iter().copied().collect();
            chart.metric(&x).ok().map(|g| u.dot(&(g * &u)))
        })
        .try_fold(f64::INFINITY, |m, v| v.map(|v| m.min(v)))
}

/// Degree of the random test curves.
pub const TEST_CURVE_DEGREE: usize = 6;
/// Half-width of the uniform distribution of perturbation coefficients.
pub const TEST_CURVE_SPREAD: f64 = 0.1;
/// Curves with γ at or below this anywhere in the window are rejected.
pub const TEST_CURVE_MIN_GAMMA: f64 = 0.1;

/// Random admissible degree-6 polynomial curve on ξ ∈ [0, 1]: a timelike
/// base line plus coefficients uniform in [−0.1, 0.1].
pub fn random_test_curve(chart: &SpacetimeChart, rng: &mut impl Rng) -> PolynomialCurve {
    let d = chart.dim();
    loop {
        let (x0, u0) = base_line(chart, rng);
        let mut coeffs = Vec::with_capacity(TEST_CURVE_DEGREE + 1);
        coeffs.push(DVector::from_vec(x0));
        coeffs.push(DVector::from_vec(u0));
        for k in 1..=TEST_CURVE_DEGREE {
            let noise = DVector::from_fn(d, |_, _| rng.gen_range(-TEST_CURVE_SPREAD..=TEST_CURVE_SPREAD));
            if k == 1 {
                coeffs[1] += noise;
            } else {
                coeffs.push(noise);
            }
        }
        let curve = PolynomialCurve::new(coeffs, (0.0, 1.0));
        if matches!(min_gamma(chart, &curve, 40), Some(g) if g > TEST_CURVE_MIN_GAMMA) {
            return curve;
        }
    }
}

/// Coordinate jet at a random interior point of a random test curve.
pub fn random_coordinate_jet(chart: &SpacetimeChart, rng: &mut impl Rng) -> CoordinateJet {
    let curve = random_test_curve(chart, rng);
    curve.coordinate_jet(rng.gen_range(0.2..=0.8))
}

fn base_line(chart: &SpacetimeChart, rng: &mut impl Rng) -> (Vec<f64>, Vec<f64>) {
    let d = chart.dim();
    let time_sign = chart.signature()[0] as f64;
    match chart.source() {
        MetricSource::Schwarzschild { mass } => {
            let r = rng.gen_range(3.0 * mass..=12.0 * mass);
            let x0 = vec![
                rng.gen_range(-1.0..=1.0),
                r,
                rng.gen_range(1.1..=2.0),
                rng.gen_range(0.0..=std::f64::consts::TAU),
            ];
            let u0 = vec![
                rng.gen_range(1.0..=1.5),
                rng.gen_range(-0.2..=0.2),
                rng.gen_range(-0.3..=0.3) / r,
                rng.gen_range(-0.5..=0.5) / r,
            ];
            (x0, u0)
        }
        _ => {
            let x0 = (0..d).map(|_| rng.gen_range(-0.5..=0.5)).collect();
            let mut u0: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.3..=0.3)).collect();
            u0[0] = rng.gen_range(1.0..=1.5) * time_sign.abs();
            (x0, u0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numdiff::five_point_first;

    #[test]
    fn polynomial_derivatives_are_consistent() {
        let curve = PolynomialCurve::new(
            vec![
                DVector::from_vec(vec![1.0, 2.0]),
                DVector::from_vec(vec![0.5, -1.0]),
                DVector::from_vec(vec![0.1, 0.3]),
                DVector::from_vec(vec![-0.2, 0.05]),
                DVector::from_vec(vec![0.07, 0.0]),
                DVector::from_vec(vec![0.0, -0.09]),
            ],
            (0.0, 1.0),
        );
        for k in 0..4 {
            let mut f = |t: f64| curve.derivatives(t)[k].iter().copied().collect::<Vec<_>>();
            let fd = five_point_first(&mut f, 0.4, 1e-3);
            let exact = &curve.derivatives(0.4)[k + 1];
            for i in 0..2 {
                assert!((fd[i] - exact[i]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn bump_derivatives_and_support() {
        let bump = Bump {
            direction: DVector::from_vec(vec![1.0, -2.0]),
            support: (0.2, 0.9),
        };
        for k in 0..4 {
            let mut f = |t: f64| bump.derivatives(t)[k].iter().copied().collect::<Vec<_>>();
            let fd = five_point_first(&mut f, 0.47, 1e-3);
            let exact = &bump.derivatives(0.47)[k + 1];
            for i in 0..2 {
                assert!((fd[i] - exact[i]).abs() < 1e-7 * exact[i].abs().max(1.0));
            }
        }
        // b and b′ vanish quadratically at the edge, b″ linearly
        let edge = bump.derivatives(0.2 + 1e-9);
        assert!(edge[0].amax() < 1e-12 && edge[1].amax() < 1e-12);
        assert!(edge[2].amax() < 1e-5);
        assert!((bump.derivatives(0.55)[0][0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reparametrization_chain_rule() {
        let base = PolynomialCurve::new(
            vec![
                DVector::from_vec(vec![0.0]),
                DVector::from_vec(vec![1.0]),
                DVector::from_vec(vec![0.2]),
                DVector::from_vec(vec![0.1]),
                DVector::from_vec(vec![0.03]),
            ],
            (0.0, 1.0),
        );
        let re = Reparametrized {
            inner: &base,
            phi: Box::new(|t: f64| {
                [t + 0.3 * t.sin(), 1.0 + 0.3 * t.cos(), -0.3 * t.sin(), -0.3 * t.cos(), 0.3 * t.sin()]
            }),
            window: (0.0, 1.0),
        };
        for k in 0..4 {
            let mut f = |t: f64| re.derivatives(t)[k].iter().copied().collect::<Vec<_>>();
            let fd = five_point_first(&mut f, 0.6, 1e-3);
            assert!((fd[0] - re.derivatives(0.6)[k + 1][0]).abs() < 1e-8);
        }
    }
}
