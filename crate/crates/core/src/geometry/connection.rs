use nalgebra::{DMatrix, DVector};

use super::metric::MetricJet;
use crate::error::{Error, Result};
use crate::tensor::{Tensor3, Tensor4, Tensor5};

/// Levi-Civita connection coefficients at a point.
///
/// `gamma[[l, k, n]] = Γ^l_kn`, `dgamma[[l, k, n, j]] = ∂Γ^l_kn/∂x^j`,
/// `ddgamma[[l, k, n, j, i]] = ∂²Γ^l_kn/∂x^j∂x^i`.
#[derive(Debug, Clone)]
pub struct Christoffel {
    pub gamma: Tensor3,
    pub dgamma: Tensor4,
    pub ddgamma: Option<Tensor5>,
}

/// Curvature tensor with `riemann[[k, m, n, l]] = R_kmn^l`, where
///
/// R_kmn^l = ∂_m Γ^l_kn − ∂_k Γ^l_mn + Γ^l_mq Γ^q_kn − Γ^l_kq Γ^q_mn.
///
/// This is the opposite overall sign to Dixon's convention.
#[derive(Debug, Clone)]
pub struct Curvature {
    pub riemann: Tensor4,
}

fn inverse(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let det = g.determinant();
    if !(det.abs() > super::chart::DET_FLOOR) {
        return Err(Error::DegenerateMetric { det });
    }
    g.clone()
        .try_inverse()
        .ok_or(Error::DegenerateMetric { det })
}

/// Builds Γ (and its derivatives) from a metric jet through
/// Γ^l_kn = ½ g^lq (∂_k g_qn + ∂_n g_qk − ∂_q g_kn).
pub fn christoffel(jet: &MetricJet) -> Result<Christoffel> {
    let d = jet.dim();
    let ginv = inverse(&jet.g)?;
    let dg = &jet.dg;
    let ddg = &jet.ddg;

    // first-kind symbols C_qkn and their derivatives
    let c = Tensor3::from_fn(d, |[q, k, n]| dg[[q, n, k]] + dg[[q, k, n]] - dg[[k, n, q]]);
    let dc = Tensor4::from_fn(d, |[q, k, n, j]| {
        ddg[[q, n, k, j]] + ddg[[q, k, n, j]] - ddg[[k, n, q, j]]
    });
    // ∂_j g^{-1} = −g^{-1} (∂_j g) g^{-1}
    let dg_mat: Vec<DMatrix<f64>> = (0..d)
        .map(|j| DMatrix::from_fn(d, d, |m, n| dg[[m, n, j]]))
        .collect();
    let dginv: Vec<DMatrix<f64>> = dg_mat.iter().map(|dj| -(&ginv * dj * &ginv)).collect();

    let gamma = Tensor3::from_fn(d, |[l, k, n]| {
        0.5 * (0..d).map(|q| ginv[(l, q)] * c[[q, k, n]]).sum::<f64>()
    });
    let dgamma = Tensor4::from_fn(d, |[l, k, n, j]| {
        0.5 * (0..d)
            .map(|q| dginv[j][(l, q)] * c[[q, k, n]] + ginv[(l, q)] * dc[[q, k, n, j]])
            .sum::<f64>()
    });

    let ddgamma = jet.dddg.as_ref().map(|dddg| {
        let ddc = Tensor5::from_fn(d, |[q, k, n, j, i]| {
            dddg[[q, n, k, j, i]] + dddg[[q, k, n, j, i]] - dddg[[k, n, q, j, i]]
        });
        // ∂_i∂_j g^{-1} = g^{-1}(∂_i g g^{-1} ∂_j g + ∂_j g g^{-1} ∂_i g − ∂_i∂_j g) g^{-1}
        let mut ddginv = Vec::with_capacity(d * d);
        for j in 0..d {
            for i in 0..d {
                let ddg_ji = DMatrix::from_fn(d, d, |m, n| ddg[[m, n, j, i]]);
                let inner = &dg_mat[i] * &ginv * &dg_mat[j] + &dg_mat[j] * &ginv * &dg_mat[i] - ddg_ji;
                ddginv.push(&ginv * inner * &ginv);
            }
        }
        Tensor5::from_fn(d, |[l, k, n, j, i]| {
            0.5 * (0..d)
                .map(|q| {
                    ddginv[j * d + i][(l, q)] * c[[q, k, n]]
                        + dginv[j][(l, q)] * dc[[q, k, n, i]]
                        + dginv[i][(l, q)] * dc[[q, k, n, j]]
                        + ginv[(l, q)] * ddc[[q, k, n, j, i]]
                })
                .sum::<f64>()
        })
    });

    Ok(Christoffel {
        gamma,
        dgamma,
        ddgamma,
    })
}

pub fn riemann(chris: &Christoffel) -> Curvature {
    let d = chris.gamma.dim();
    let g = &chris.gamma;
    let dg = &chris.dgamma;
    let riemann = Tensor4::from_fn(d, |[k, m, n, l]| {
        let quad: f64 = (0..d)
            .map(|q| g[[l, m, q]] * g[[q, k, n]] - g[[l, k, q]] * g[[q, m, n]])
            .sum();
        dg[[l, k, n, m]] - dg[[l, m, n, k]] + quad
    });
    Curvature { riemann }
}

impl Christoffel {
    /// (Γ(a, b))^n = Γ^n_lm a^l b^m.
    pub fn contract(&self, a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
        contract3(&self.gamma, a, b)
    }

    /// Directional derivative of Γ along `v`, contracted with `a`, `b`:
    /// ∂_j Γ^n_lm v^j a^l b^m.
    pub fn contract_derivative(&self, v: &DVector<f64>, a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
        let d = a.len();
        DVector::from_fn(d, |n, _| {
            let mut s = 0.0;
            for l in 0..d {
                for m in 0..d {
                    let ab = a[l] * b[m];
                    if ab == 0.0 {
                        continue;
                    }
                    for j in 0..d {
                        s += self.dgamma[[n, l, m, j]] * v[j] * ab;
                    }
                }
            }
            s
        })
    }

    /// ∂_i∂_j Γ^n_lm v^j w^i a^l b^m. Panics if second derivatives were not
    /// requested when building the connection.
    pub fn contract_second_derivative(
        &self,
        v: &DVector<f64>,
        w: &DVector<f64>,
        a: &DVector<f64>,
        b: &DVector<f64>,
    ) -> DVector<f64> {
        let dd = self
            .ddgamma
            .as_ref()
            .expect("second Christoffel derivatives require a third-order metric jet");
        let d = a.len();
        DVector::from_fn(d, |n, _| {
            let mut s = 0.0;
            for l in 0..d {
                for m in 0..d {
                    let ab = a[l] * b[m];
                    if ab == 0.0 {
                        continue;
                    }
                    for j in 0..d {
                        for i in 0..d {
                            s += dd[[n, l, m, j, i]] * v[j] * w[i] * ab;
                        }
                    }
                }
            }
            s
        })
    }
}

fn contract3(t: &Tensor3, a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    let d = a.len();
    DVector::from_fn(d, |n, _| {
        let mut s = 0.0;
        for l in 0..d {
            for m in 0..d {
                s += t[[n, l, m]] * a[l] * b[m];
            }
        }
        s
    })
}

/// Everything the variational layer needs at one point of the chart.
#[derive(Debug, Clone)]
pub struct LocalGeometry {
    pub x: Vec<f64>,
    pub g: DMatrix<f64>,
    pub ginv: DMatrix<f64>,
    pub chris: Christoffel,
    pub curvature: Curvature,
}

impl LocalGeometry {
    pub fn from_jet(x: &[f64], jet: &MetricJet) -> Result<Self> {
        let chris = christoffel(jet)?;
        let curvature = riemann(&chris);
        Ok(Self {
            x: x.to_vec(),
            g: jet.g.clone(),
            ginv: inverse(&jet.g)?,
            chris,
            curvature,
        })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        a.dot(&(&self.g * b))
    }

    pub fn lower(&self, a: &DVector<f64>) -> DVector<f64> {
        &self.g * a
    }

    pub fn raise(&self, w: &DVector<f64>) -> DVector<f64> {
        &self.ginv * w
    }

    /// a′^n = da^n/dξ + Γ^n_lm a^m u^l
    pub fn covariant_derivative(&self, u: &DVector<f64>, a: &DVector<f64>, da: &DVector<f64>) -> DVector<f64> {
        da + self.chris.contract(u, a)
    }

    /// a′_n = da_n/dξ − Γ^m_ln a_m u^l
    pub fn covariant_derivative_covector(
        &self,
        u: &DVector<f64>,
        a: &DVector<f64>,
        da: &DVector<f64>,
    ) -> DVector<f64> {
        let d = self.dim();
        let g = &self.chris.gamma;
        DVector::from_fn(d, |n, _| {
            let mut s = da[n];
            for m in 0..d {
                for l in 0..d {
                    s -= g[[m, l, n]] * a[m] * u[l];
                }
            }
            s
        })
    }

    /// F_n = ω_l R_nkm^l u^m u^k, the curvature term of the Euler–Poisson
    /// expression for a covector ω.
    pub fn curvature_force(&self, omega: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let d = self.dim();
        let r = &self.curvature.riemann;
        DVector::from_fn(d, |n, _| {
            let mut s = 0.0;
            for k in 0..d {
                for m in 0..d {
                    let uu = u[m] * u[k];
                    for l in 0..d {
                        s += omega[l] * r[[n, k, m, l]] * uu;
                    }
                }
            }
            s
        })
    }

    /// ½ R_nm^kl u^m S_kl with R_nm^kl = g^kq R_nmq^l and S given with
    /// lower indices.
    pub fn spin_curvature(&self, u: &DVector<f64>, spin: &DMatrix<f64>) -> DVector<f64> {
        let d = self.dim();
        let r = &self.curvature.riemann;
        // S^q_l = g^qk S_kl
        let s_mixed = &self.ginv * spin;
        DVector::from_fn(d, |n, _| {
            let mut s = 0.0;
            for m in 0..d {
                for q in 0..d {
                    for l in 0..d {
                        s += r[[n, m, q, l]] * u[m] * s_mixed[(q, l)];
                    }
                }
            }
            0.5 * s
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SpacetimeChart;

    #[test]
    fn minkowski_connection_vanishes() {
        let chart = SpacetimeChart::minkowski(4);
        let local = chart.local3(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(local.chris.gamma.max_abs(), 0.0);
        assert_eq!(local.chris.dgamma.max_abs(), 0.0);
        assert_eq!(local.curvature.riemann.max_abs(), 0.0);
    }

    #[test]
    fn schwarzschild_radial_acceleration_symbol() {
        let chart = SpacetimeChart::schwarzschild(1.0).unwrap();
        let local = chart.local(&[0.0, 10.0, 1.0, 0.0]).unwrap();
        assert!((local.chris.gamma[[1, 0, 0]] - 0.008).abs() < 1e-15);
    }

    #[test]
    fn lower_and_raise_are_inverse() {
        let chart = SpacetimeChart::schwarzschild(1.0).unwrap();
        let local = chart.local(&[0.0, 4.0, 0.8, 2.0]).unwrap();
        let a = DVector::from_vec(vec![1.3, -0.2, 0.05, 0.7]);
        let back = local.raise(&local.lower(&a));
        assert!((back - &a).amax() < 1e-12);
    }
}
