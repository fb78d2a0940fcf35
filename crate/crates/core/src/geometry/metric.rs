use nalgebra::DMatrix;

use crate::tensor::{Tensor3, Tensor4, Tensor5};

/// Metric values and coordinate derivatives at one point.
///
/// Index placement: `dg[[m, n, k]] = ∂g_mn/∂x^k`,
/// `ddg[[m, n, k, j]] = ∂²g_mn/∂x^k∂x^j`, and likewise for `dddg`.
#[derive(Debug, Clone)]
pub struct MetricJet {
    pub g: DMatrix<f64>,
    pub dg: Tensor3,
    pub ddg: Tensor4,
    /// Third derivatives; only produced on request because they are needed
    /// solely to convert fourth-order coordinate jets.
    pub dddg: Option<Tensor5>,
}

impl MetricJet {
    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    /// Largest violation of the (m, n) symmetry across `g`, `dg` and `ddg`,
    /// plus the symmetry of `ddg` in its derivative slots.
    pub fn max_asymmetry(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0_f64;
        for m in 0..d {
            for n in 0..d {
                worst = worst.max((self.g[(m, n)] - self.g[(n, m)]).abs());
                for k in 0..d {
                    worst = worst.max((self.dg[[m, n, k]] - self.dg[[n, m, k]]).abs());
                    for j in 0..d {
                        worst = worst.max((self.ddg[[m, n, k, j]] - self.ddg[[n, m, k, j]]).abs());
                        worst = worst.max((self.ddg[[m, n, k, j]] - self.ddg[[m, n, j, k]]).abs());
                    }
                }
            }
        }
        worst
    }
}

/// One-variable factor of a diagonal metric component, with derivatives
/// through third order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Factor {
    /// `1 - 2m/r`
    Lapse { mass: f64 },
    /// `1 / (1 - 2m/r)`
    InvLapse { mass: f64 },
    /// `r^2`
    Square,
    /// `sin^2 θ`
    SinSquare,
    /// `exp(rate · t)`
    Exp { rate: f64 },
}

impl Factor {
    pub(crate) fn derivatives(self, v: f64) -> [f64; 4] {
        match self {
            Factor::Lapse { mass } => {
                let r = v;
                [
                    1.0 - 2.0 * mass / r,
                    2.0 * mass / (r * r),
                    -4.0 * mass / r.powi(3),
                    12.0 * mass / r.powi(4),
                ]
            }
            Factor::InvLapse { mass } => {
                let [f, f1, f2, f3] = Factor::Lapse { mass }.derivatives(v);
                // derivatives of 1/f
                [
                    1.0 / f,
                    -f1 / (f * f),
                    -f2 / (f * f) + 2.0 * f1 * f1 / f.powi(3),
                    -f3 / (f * f) + 6.0 * f1 * f2 / f.powi(3) - 6.0 * f1.powi(3) / f.powi(4),
                ]
            }
            Factor::Square => [v * v, 2.0 * v, 2.0, 0.0],
            Factor::SinSquare => {
                let (s2, c2) = (2.0 * v).sin_cos();
                [v.sin().powi(2), s2, 2.0 * c2, -4.0 * s2]
            }
            Factor::Exp { rate } => {
                let e = (rate * v).exp();
                [e, rate * e, rate * rate * e, rate.powi(3) * e]
            }
        }
    }
}

/// Diagonal metric whose components are constants times products of
/// single-coordinate factors. Every built-in chart has this form, which makes
/// all partial derivatives exact.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SeparableDiagonal {
    pub(crate) components: Vec<(f64, Vec<(usize, Factor)>)>,
}

impl SeparableDiagonal {
    fn partial(&self, comp: usize, x: &[f64], orders: &[usize]) -> f64 {
        let (coef, factors) = &self.components[comp];
        let mut remaining: usize = orders.iter().sum();
        let mut value = *coef;
        for &(coord, factor) in factors {
            let o = orders[coord];
            remaining -= o;
            value *= factor.derivatives(x[coord])[o];
        }
        // a derivative along a coordinate the component does not depend on
        if remaining > 0 {
            0.0
        } else {
            value
        }
    }

    pub(crate) fn metric(&self, x: &[f64]) -> DMatrix<f64> {
        let d = x.len();
        let zero = vec![0; d];
        DMatrix::from_fn(d, d, |m, n| {
            if m == n {
                self.partial(m, x, &zero)
            } else {
                0.0
            }
        })
    }

    pub(crate) fn jet(&self, x: &[f64], third: bool) -> MetricJet {
        let d = x.len();
        let mut orders = vec![0; d];
        let mut dg = Tensor3::zeros(d);
        let mut ddg = Tensor4::zeros(d);
        let mut dddg = third.then(|| Tensor5::zeros(d));
        for m in 0..d {
            for k in 0..d {
                orders[k] += 1;
                dg[[m, m, k]] = self.partial(m, x, &orders);
                for j in 0..d {
                    orders[j] += 1;
                    ddg[[m, m, k, j]] = self.partial(m, x, &orders);
                    if let Some(t) = dddg.as_mut() {
                        for i in 0..d {
                            orders[i] += 1;
                            t[[m, m, k, j, i]] = self.partial(m, x, &orders);
                            orders[i] -= 1;
                        }
                    }
                    orders[j] -= 1;
                }
                orders[k] -= 1;
            }
        }
        MetricJet {
            g: self.metric(x),
            dg,
            ddg,
            dddg,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numdiff::central_richardson;

    #[test]
    fn factor_derivatives_match_finite_differences() {
        let cases = [
            (Factor::Lapse { mass: 1.0 }, 7.3),
            (Factor::InvLapse { mass: 1.0 }, 7.3),
            (Factor::Square, 3.1),
            (Factor::SinSquare, 1.1),
            (Factor::Exp { rate: 0.2 }, 0.4),
        ];
        for (factor, v) in cases {
            let d = factor.derivatives(v);
            for order in 0..3 {
                let mut f = |t: f64| vec![factor.derivatives(t)[order]];
                let fd = central_richardson(&mut f, v, 1e-3)[0];
                assert!(
                    (fd - d[order + 1]).abs() <= 1e-8 * d[order + 1].abs().max(1.0),
                    "{factor:?} order {}: fd {fd} vs {}",
                    order + 1,
                    d[order + 1]
                );
            }
        }
    }
}
