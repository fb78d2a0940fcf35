use std::fmt;

use serde::{Deserialize, Serialize};

use super::series::Series;

/// A second-order Lagrangian that depends on the curve only through the
/// invariants γ = ⟨u,u⟩, β = ⟨u,u′⟩, α = ⟨u′,u′⟩.
///
/// `partials` must accept Taylor series so callers can differentiate the
/// partials along a jet.
pub trait InvariantLagrangian: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    fn value(&self, gamma: f64, beta: f64, alpha: f64) -> f64;

    /// `[∂L/∂γ, ∂L/∂β, ∂L/∂α]`.
    fn partials(&self, gamma: Series, beta: Series, alpha: Series) -> [Series; 3];

    /// The `A` parameter when this is the Kawaguchi function; enables the
    /// closed-form paths.
    fn kawaguchi_a(&self) -> Option<f64> {
        None
    }
}

/// L = (αγ − β²)/γ^{5/2} + A γ^{1/2}, i.e. (k² + A)|u|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kawaguchi {
    pub a: f64,
}

impl InvariantLagrangian for Kawaguchi {
    fn name(&self) -> &'static str {
        "kawaguchi"
    }

    fn value(&self, gamma: f64, beta: f64, alpha: f64) -> f64 {
        (alpha * gamma - beta * beta) / gamma.powf(2.5) + self.a * gamma.sqrt()
    }

    fn partials(&self, gamma: Series, beta: Series, alpha: Series) -> [Series; 3] {
        let g_m72 = gamma.powf(-3.5);
        let g_m52 = gamma.powf(-2.5);
        let l_gamma = -1.5 * (alpha * g_m52) + 2.5 * (beta * beta * g_m72) + 0.5 * self.a * gamma.powf(-0.5);
        let l_beta = -2.0 * (beta * g_m52);
        let l_alpha = gamma.powf(-1.5);
        [l_gamma, l_beta, l_alpha]
    }

    fn kawaguchi_a(&self) -> Option<f64> {
        Some(self.a)
    }
}

/// Second sample Lagrangian L₂ = γ^{1/2} + c (αγ − β²)² / γ^{11/2},
/// homogeneous of degree one like the Kawaguchi function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondSample {
    pub c: f64,
}

pub const DEFAULT_SECOND_SAMPLE_C: f64 = 0.1;

impl Default for SecondSample {
    fn default() -> Self {
        Self {
            c: DEFAULT_SECOND_SAMPLE_C,
        }
    }
}

impl InvariantLagrangian for SecondSample {
    fn name(&self) -> &'static str {
        "test2"
    }

    fn value(&self, gamma: f64, beta: f64, alpha: f64) -> f64 {
        let w = alpha * gamma - beta * beta;
        gamma.sqrt() + self.c * w * w / gamma.powf(5.5)
    }

    fn partials(&self, gamma: Series, beta: Series, alpha: Series) -> [Series; 3] {
        let c = self.c;
        let w = alpha * gamma - beta * beta;
        let g_m112 = gamma.powf(-5.5);
        let l_gamma = 0.5 * gamma.powf(-0.5)
            + c * (2.0 * (w * alpha * g_m112) - 5.5 * (w * w * gamma.powf(-6.5)));
        let l_beta = (-4.0 * c) * (beta * w * g_m112);
        let l_alpha = (2.0 * c) * (w * gamma.powf(-4.5));
        [l_gamma, l_beta, l_alpha]
    }
}

/// JSON selection of a Lagrangian:
/// `{"lagrangian": "kawaguchi", "A": 1.0}` or `{"lagrangian": "test2", "c": 0.1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "lagrangian", deny_unknown_fields)]
pub enum LagrangianSpec {
    #[serde(rename = "kawaguchi")]
    Kawaguchi {
        #[serde(rename = "A")]
        a: f64,
    },
    #[serde(rename = "test2")]
    SecondSample {
        #[serde(default = "default_c")]
        c: f64,
    },
}

fn default_c() -> f64 {
    DEFAULT_SECOND_SAMPLE_C
}

impl LagrangianSpec {
    pub fn build(&self) -> Box<dyn InvariantLagrangian> {
        match *self {
            LagrangianSpec::Kawaguchi { a } => Box::new(Kawaguchi { a }),
            LagrangianSpec::SecondSample { c } => Box::new(SecondSample { c }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numdiff::gradient;

    fn check_partials(l: &dyn InvariantLagrangian, point: [f64; 3]) {
        let mut f = |v: &[f64]| l.value(v[0], v[1], v[2]);
        let fd = gradient(&mut f, &point, 1e-5);
        let [lg, lb, la] = l.partials(point[0].into(), point[1].into(), point[2].into());
        for (an, num) in [lg.value(), lb.value(), la.value()].iter().zip(&fd) {
            assert!((an - num).abs() < 1e-8 * num.abs().max(1.0), "{} {an} vs {num}", l.name());
        }
    }

    #[test]
    fn partials_match_finite_differences() {
        for point in [[1.0, 0.0, -0.3], [1.7, 0.4, -2.1], [0.6, -0.2, 0.5]] {
            check_partials(&Kawaguchi { a: 1.3 }, point);
            check_partials(&SecondSample::default(), point);
        }
    }

    #[test]
    fn both_lagrangians_are_degree_one() {
        let (g, b, a) = (1.3, 0.2, -0.7);
        let lam: f64 = 1.9;
        for l in [&Kawaguchi { a: 0.4 } as &dyn InvariantLagrangian, &SecondSample::default()] {
            let scaled = l.value(lam * lam * g, lam.powi(3) * b, lam.powi(4) * a);
            assert!((scaled - lam * l.value(g, b, a)).abs() < 1e-12);
        }
    }

    #[test]
    fn spec_json() {
        let k: LagrangianSpec = serde_json::from_str(r#"{"lagrangian": "kawaguchi", "A": 1.0}"#).unwrap();
        assert_eq!(k, LagrangianSpec::Kawaguchi { a: 1.0 });
        let t: LagrangianSpec = serde_json::from_str(r#"{"lagrangian": "test2"}"#).unwrap();
        assert_eq!(t, LagrangianSpec::SecondSample { c: 0.1 });
        assert!(serde_json::from_str::<LagrangianSpec>(r#"{"lagrangian": "kawaguchi", "A": 1.0, "B": 2}"#).is_err());
    }
}
