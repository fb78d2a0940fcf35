use nalgebra::{DMatrix, DVector};

use super::integrator::Trajectory;
use crate::error::{Error, Result};
use crate::geometry::{LocalGeometry, SpacetimeChart};
use crate::variational::{momenta_general_at, momenta_kawaguchi_at, CovariantJet, InvariantLagrangian, Momenta};

/// Momentum P = π and spin S = u ∧ π⁽¹⁾ (lower indices).
#[derive(Debug, Clone, PartialEq)]
pub struct DixonState {
    pub p: DVector<f64>,
    pub s: DMatrix<f64>,
}

/// (a ∧ b)_nm = a_n b_m − a_m b_n
pub fn wedge(a: &DVector<f64>, b: &DVector<f64>) -> DMatrix<f64> {
    a * b.transpose() - b * a.transpose()
}

/// Closed-form momenta for the Kawaguchi function, the general construction
/// otherwise.
pub fn momenta_for(local: &LocalGeometry, jet: &CovariantJet, l: &dyn InvariantLagrangian) -> Result<Momenta> {
    match l.kawaguchi_a() {
        Some(a) => momenta_kawaguchi_at(local, jet, a),
        None => momenta_general_at(local, jet, l),
    }
}

pub(crate) fn dixon_state_from(local: &LocalGeometry, jet: &CovariantJet, momenta: &Momenta) -> DixonState {
    DixonState {
        p: momenta.pi.clone(),
        s: wedge(&local.lower(&jet.u), &momenta.pi1),
    }
}

pub fn dixon_state_at(local: &LocalGeometry, jet: &CovariantJet, l: &dyn InvariantLagrangian) -> Result<DixonState> {
    Ok(dixon_state_from(local, jet, &momenta_for(local, jet, l)?))
}

pub fn dixon_state(chart: &SpacetimeChart, jet: &CovariantJet, l: &dyn InvariantLagrangian) -> Result<DixonState> {
    dixon_state_at(&chart.local(&jet.x)?, jet, l)
}

/// max |S′_nm − (P_n u_m − P_m u_n)| on one jet.
///
/// S′ = u′ ∧ π⁽¹⁾ + u ∧ π⁽¹⁾′ by the Leibniz rule (lowering commutes with the
/// covariant derivative), with π⁽¹⁾′ from the differential prolongation and
/// P from [`momenta_for`].
pub fn dixon_two_residual_at(local: &LocalGeometry, jet: &CovariantJet, l: &dyn InvariantLagrangian) -> Result<f64> {
    let prolonged = momenta_general_at(local, jet, l)?;
    let p = momenta_for(local, jet, l)?.pi;
    let ul = local.lower(&jet.u);
    let s_prime = wedge(&local.lower(&jet.u1), &prolonged.pi1) + wedge(&ul, &prolonged.pi1_prime);
    Ok((s_prime - wedge(&p, &ul)).amax())
}

pub fn dixon_two_residual(chart: &SpacetimeChart, jet: &CovariantJet, l: &dyn InvariantLagrangian) -> Result<f64> {
    dixon_two_residual_at(&chart.local(&jet.x)?, jet, l)
}

/// Dixon I residual at one interior sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DixonOneResidual {
    pub s: f64,
    /// max |P′_n + ½ R_nm^kl u^m S_kl|
    pub absolute: f64,
    /// `absolute / max(max|P′_n|, 1)`
    pub normalized: f64,
}

/// Evaluates P′_n + ½ R_nm^kl u^m S_kl along a trajectory. P′ is the
/// five-point central difference of the sampled P, corrected to the
/// covariant derivative P′_n = dP_n/ds − Γ^m_ln P_m u^l; the samples must be
/// evenly spaced. `curvature_sign` scales the curvature term (1 for the
/// physical check).
pub fn dixon_one_residuals(
    chart: &SpacetimeChart,
    traj: &Trajectory,
    curvature_sign: f64,
) -> Result<Vec<DixonOneResidual>> {
    let samples = &traj.samples;
    if samples.len() < 5 {
        return Err(Error::InvalidConfig("Dixon I needs at least five samples".into()));
    }
    let h = samples[1].s - samples[0].s;
    let mut out = Vec::with_capacity(samples.len() - 4);
    for i in 2..samples.len() - 2 {
        let spacing = [-2, -1, 1, 2].iter().all(|&k| {
            let j = (i as isize + k) as usize;
            ((samples[j].s - samples[i].s) - k as f64 * h).abs() <= 1e-9 * h.abs().max(1.0)
        });
        if !spacing {
            return Err(Error::InvalidConfig(format!(
                "Dixon I needs evenly spaced samples (irregular near s = {})",
                samples[i].s
            )));
        }
        let p = |k: usize| &samples[k].dixon.p;
        let dp = (p(i - 2) - p(i - 1) * 8.0 + p(i + 1) * 8.0 - p(i + 2)) / (12.0 * h);
        let here = &samples[i];
        let local = chart.local(&here.jet.x)?;
        let p_prime = local.covariant_derivative_covector(&here.jet.u, p(i), &dp);
        let residual = &p_prime + local.spin_curvature(&here.jet.u, &here.dixon.s) * curvature_sign;
        let absolute = residual.amax();
        out.push(DixonOneResidual {
            s: here.s,
            absolute,
            normalized: absolute / p_prime.amax().max(1.0),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variational::Kawaguchi;

    #[test]
    fn geodesic_jet_has_no_spin() {
        let chart = SpacetimeChart::minkowski(4);
        let u = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        let jet = CovariantJet::new(vec![0.0; 4], u, DVector::zeros(4), DVector::zeros(4));
        let state = dixon_state(&chart, &jet, &Kawaguchi { a: 1.5 }).unwrap();
        assert_eq!(state.s.amax(), 0.0);
        assert_eq!(state.p, DVector::from_vec(vec![1.5, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn natural_spin_is_twice_the_wedge() {
        let chart = SpacetimeChart::minkowski(4);
        let u = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        let u1 = DVector::from_vec(vec![0.0, 0.3, -0.1, 0.0]);
        let jet = CovariantJet::new(vec![0.0; 4], u.clone(), u1.clone(), DVector::zeros(4));
        let local = chart.local(&jet.x).unwrap();
        let state = dixon_state(&chart, &jet, &Kawaguchi { a: 1.0 }).unwrap();
        let expected = wedge(&local.lower(&u), &local.lower(&u1)) * 2.0;
        assert!((&state.s - expected).amax() < 1e-15);
        assert_eq!((&state.s + state.s.transpose()).amax(), 0.0);
    }
}
