use nalgebra::DVector;

use super::curve::CoordinateCurve;
use crate::error::{Error, Result};
use crate::geometry::{LocalGeometry, SpacetimeChart};
use crate::numdiff::five_point_checked;
use crate::variational::{coordinate_lagrangian_at, invariants_at, CovariantJet, InvariantLagrangian};

/// Finite-difference settings of the coordinate-space oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSteps {
    /// Relative step for the five-point partials of L in (x, u, u̇).
    pub partial: f64,
    /// Step along the curve for the five-point ξ-derivatives.
    pub curve: f64,
    /// Largest tolerated relative disagreement between the step-h and
    /// step-h/2 curve derivatives.
    pub max_disagreement: f64,
}

impl Default for OracleSteps {
    fn default() -> Self {
        Self {
            partial: 3e-3,
            curve: 5e-3,
            max_disagreement: 1e-2,
        }
    }
}

/// Ostrohrads'kyj momenta p⁽¹⁾ = ∂L/∂u̇ and p = ∂L/∂u − dp⁽¹⁾/dξ.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateMomenta {
    pub p1: DVector<f64>,
    pub p: DVector<f64>,
}

/// Step for a velocity-like component: velocities carry the metric's scale,
/// so the step is measured in units of unit proper length.
fn velocity_step(local: &LocalGeometry, v: &DVector<f64>, k: usize, step: f64) -> f64 {
    step * v[k].abs().max(local.g[(k, k)].abs().sqrt().recip())
}

fn partial(f: &mut impl FnMut(f64) -> Vec<f64>, at: f64, h: f64) -> f64 {
    five_point_checked(f, at, h, 1).0[0]
}

/// `[∂L/∂x, ∂L/∂u, ∂L/∂u̇]` packed into one vector of length 3n.
fn coordinate_partials(
    chart: &SpacetimeChart,
    l: &dyn InvariantLagrangian,
    x: &[f64],
    u: &DVector<f64>,
    udot: &DVector<f64>,
    step: f64,
) -> Result<Vec<f64>> {
    let d = x.len();
    let local = chart.local(x)?;
    let mut failure: Option<Error> = None;
    let mut out = Vec::with_capacity(3 * d);

    let mut xs = x.to_vec();
    for k in 0..d {
        let h = step * x[k].abs().max(1.0);
        let mut f = |t: f64| {
            xs[k] = t;
            let v = chart
                .local(&xs)
                .and_then(|loc| coordinate_lagrangian_at(&loc, l, u, udot));
            xs[k] = x[k];
            vec![v.unwrap_or_else(|e| {
                failure.get_or_insert(e);
                f64::NAN
            })]
        };
        out.push(partial(&mut f, x[k], h));
    }
    for slot in 0..2 {
        let base = if slot == 0 { u } else { udot };
        let mut work = base.clone();
        for k in 0..d {
            let h = velocity_step(&local, base, k, step);
            let mut f = |t: f64| {
                work[k] = t;
                let v = if slot == 0 {
                    coordinate_lagrangian_at(&local, l, &work, udot)
                } else {
                    coordinate_lagrangian_at(&local, l, u, &work)
                };
                work[k] = base[k];
                vec![v.unwrap_or_else(|e| {
                    failure.get_or_insert(e);
                    f64::NAN
                })]
            };
            out.push(partial(&mut f, base[k], h));
        }
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

fn partials_along<'a>(
    chart: &'a SpacetimeChart,
    curve: &'a dyn CoordinateCurve,
    l: &'a dyn InvariantLagrangian,
    steps: OracleSteps,
) -> impl Fn(f64) -> Result<Vec<f64>> + 'a {
    move |xi: f64| {
        let [x, u, udot, ..] = curve.derivatives(xi);
        let x: Vec<f64> = x.iter().copied().collect();
        let gamma = chart.metric(&x).map(|g| u.dot(&(g * &u)))?;
        if !(gamma > 0.0) {
            return Err(Error::NonTimelike { gamma });
        }
        coordinate_partials(chart, l, &x, &u, &udot, steps.partial)
    }
}

/// Applies a five-point ξ-derivative to a fallible vector function.
fn curve_derivative(
    f: &dyn Fn(f64) -> Result<Vec<f64>>,
    xi: f64,
    order: usize,
    steps: OracleSteps,
    len: usize,
) -> Result<Vec<f64>> {
    let mut failure = None;
    let mut g = |t: f64| {
        f(t).unwrap_or_else(|e| {
            failure.get_or_insert(e);
            vec![f64::NAN; len]
        })
    };
    let (est, gap) = five_point_checked(&mut g, xi, steps.curve, order);
    if let Some(e) = failure {
        return Err(e);
    }
    if !(gap <= steps.max_disagreement) {
        return Err(Error::DifferentiationFailure(format!(
            "Richardson disagreement {gap:e} at xi = {xi}"
        )));
    }
    Ok(est)
}

/// E_n = ∂L/∂x^n − d/dξ (∂L/∂u^n) + d²/dξ² (∂L/∂u̇^n), by brute-force finite
/// differences of the coordinate expression of L.
pub fn coordinate_euler_poisson_with(
    chart: &SpacetimeChart,
    curve: &dyn CoordinateCurve,
    xi: f64,
    l: &dyn InvariantLagrangian,
    steps: OracleSteps,
) -> Result<DVector<f64>> {
    let d = curve.dim();
    let partials = partials_along(chart, curve, l, steps);
    let here = partials(xi)?;
    let first = curve_derivative(&partials, xi, 1, steps, 3 * d)?;
    let second = curve_derivative(&partials, xi, 2, steps, 3 * d)?;
    Ok(DVector::from_fn(d, |n, _| {
        here[n] - first[d + n] + second[2 * d + n]
    }))
}

pub fn coordinate_euler_poisson(
    chart: &SpacetimeChart,
    curve: &dyn CoordinateCurve,
    xi: f64,
    l: &dyn InvariantLagrangian,
) -> Result<DVector<f64>> {
    coordinate_euler_poisson_with(chart, curve, xi, l, OracleSteps::default())
}

pub fn coordinate_momenta(
    chart: &SpacetimeChart,
    curve: &dyn CoordinateCurve,
    xi: f64,
    l: &dyn InvariantLagrangian,
) -> Result<CoordinateMomenta> {
    let steps = OracleSteps::default();
    let d = curve.dim();
    let partials = partials_along(chart, curve, l, steps);
    let here = partials(xi)?;
    let first = curve_derivative(&partials, xi, 1, steps, 3 * d)?;
    Ok(CoordinateMomenta {
        p1: DVector::from_fn(d, |n, _| here[2 * d + n]),
        p: DVector::from_fn(d, |n, _| here[d + n] - first[2 * d + n]),
    })
}

/// p_n − π_n − Γ^q_mn u^m π⁽¹⁾_q for covariant momenta `pi`, `pi1` of the
/// same jet.
pub fn momentum_relation_residual(
    local: &LocalGeometry,
    jet: &CovariantJet,
    coord: &CoordinateMomenta,
    pi: &DVector<f64>,
    pi1: &DVector<f64>,
) -> DVector<f64> {
    let d = jet.dim();
    let g = &local.chris.gamma;
    DVector::from_fn(d, |n, _| {
        let mut corr = 0.0;
        for q in 0..d {
            for m in 0..d {
                corr += g[[q, m, n]] * jet.u[m] * pi1[q];
            }
        }
        coord.p[n] - pi[n] - corr
    })
}

/// L̃(x, u, u′): the Lagrangian in covariant velocity coordinates.
fn covariant_lagrangian(
    chart: &SpacetimeChart,
    l: &dyn InvariantLagrangian,
    x: &[f64],
    u: &DVector<f64>,
    u1: &DVector<f64>,
) -> Result<f64> {
    let local = chart.local(x)?;
    let jet = CovariantJet::new(x.to_vec(), u.clone(), u1.clone(), DVector::zeros(u.len()));
    let inv = invariants_at(&local, &jet)?;
    Ok(l.value(inv.gamma, inv.beta, inv.alpha))
}

/// Checks the change of variables {x, u, u̇} ↦ {x, u, u′} on partials:
///
/// ∂L/∂u^n = ∂L̃/∂u^n + 2 (∂L̃/∂u′^q) Γ^q_mn u^m,
/// ∂L/∂x^n = ∂L̃/∂x^n + (∂L̃/∂u′^q) ∂_n Γ^q_ml u^l u^m.
///
/// Returns the max-abs residual of each identity.
pub fn partials_recalculation_check(
    chart: &SpacetimeChart,
    x: &[f64],
    u: &DVector<f64>,
    udot: &DVector<f64>,
    l: &dyn InvariantLagrangian,
) -> Result<(f64, f64)> {
    let d = x.len();
    let step = OracleSteps::default().partial;
    let local = chart.local(x)?;
    let u1 = udot + local.chris.contract(u, u);
    let coord = coordinate_partials(chart, l, x, u, udot, step)?;

    // partials of L̃ in (x, u, u′)
    let mut failure = None;
    let mut tilde = |xs: &[f64], us: &DVector<f64>, u1s: &DVector<f64>| {
        covariant_lagrangian(chart, l, xs, us, u1s).unwrap_or_else(|e| {
            failure.get_or_insert(e);
            f64::NAN
        })
    };
    let mut dx = Vec::with_capacity(d);
    let mut du = Vec::with_capacity(d);
    let mut du1 = Vec::with_capacity(d);
    for k in 0..d {
        let mut xs = x.to_vec();
        let h = step * x[k].abs().max(1.0);
        dx.push(partial(&mut |t| {
            xs[k] = t;
            vec![tilde(&xs, u, &u1)]
        }, x[k], h));
        let mut us = u.clone();
        let h = velocity_step(&local, u, k, step);
        du.push(partial(&mut |t| {
            us[k] = t;
            vec![tilde(x, &us, &u1)]
        }, u[k], h));
        let mut u1s = u1.clone();
        let h = velocity_step(&local, &u1, k, step);
        du1.push(partial(&mut |t| {
            u1s[k] = t;
            vec![tilde(x, u, &u1s)]
        }, u1[k], h));
    }
    if let Some(e) = failure {
        return Err(e);
    }

    let g = &local.chris.gamma;
    let dg = &local.chris.dgamma;
    let mut res_u = 0.0_f64;
    let mut res_x = 0.0_f64;
    for n in 0..d {
        let mut rhs_u = du[n];
        let mut rhs_x = dx[n];
        for q in 0..d {
            for m in 0..d {
                rhs_u += 2.0 * du1[q] * g[[q, m, n]] * u[m];
                for lidx in 0..d {
                    rhs_x += du1[q] * dg[[q, m, lidx, n]] * u[lidx] * u[m];
                }
            }
        }
        res_u = res_u.max((coord[d + n] - rhs_u).abs());
        res_x = res_x.max((coord[n] - rhs_x).abs());
    }
    Ok((res_u, res_x))
}
