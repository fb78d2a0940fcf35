use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::dixon::{dixon_state_from, momenta_for, DixonState};
use super::solve::{solve_u3, U3Method};
use crate::error::{Error, Result};
use crate::geometry::{LocalGeometry, SpacetimeChart};
use crate::variational::{
    euler_poisson_at, invariants_at, CovariantJet, InvariantLagrangian, Invariants, Momenta, GAUGE_EPS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Classical fixed-step Runge–Kutta.
    Rk4,
    /// Dormand–Prince 5(4) with error control.
    Rk45,
}

fn default_method() -> Method {
    Method::Rk4
}
fn default_atol() -> f64 {
    1e-10
}
fn default_rtol() -> f64 {
    1e-8
}
fn default_min_step() -> f64 {
    1e-12
}
fn default_true() -> bool {
    true
}
fn default_drift_abort() -> f64 {
    1e-3
}
fn default_sample_every() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    /// Δs; the initial trial step for RK45.
    pub step: f64,
    /// s_max.
    pub horizon: f64,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_min_step")]
    pub min_step: f64,
    /// Re-impose γ = 1, β = 0 (and ⟨u,u″⟩ = −α) after every step.
    #[serde(default = "default_true")]
    pub gauge_projection: bool,
    #[serde(default = "default_drift_abort")]
    pub drift_abort: f64,
    /// Record every n-th accepted step (the final state is always recorded).
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
}

impl IntegratorConfig {
    pub fn rk4(step: f64, horizon: f64) -> Self {
        Self {
            step,
            horizon,
            method: Method::Rk4,
            atol: default_atol(),
            rtol: default_rtol(),
            min_step: default_min_step(),
            gauge_projection: true,
            drift_abort: default_drift_abort(),
            sample_every: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("step", self.step),
            ("horizon", self.horizon),
            ("atol", self.atol),
            ("rtol", self.rtol),
            ("min_step", self.min_step),
            ("drift_abort", self.drift_abort),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("integrator.{name} must be positive, got {v}")));
            }
        }
        if self.sample_every == 0 {
            return Err(Error::InvalidConfig("integrator.sample_every must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// |γ − 1|
    pub gamma_drift: f64,
    /// |β|
    pub beta_drift: f64,
    /// (αγ − β²)/γ³
    pub k2: f64,
    /// max |E_n| with u‴ from the solver.
    pub e_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub s: f64,
    /// Carries u‴ as returned by the solver.
    pub jet: CovariantJet,
    pub invariants: Invariants,
    pub momenta: Momenta,
    pub dixon: DixonState,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    /// Why integration stopped before the horizon, if it did.
    pub truncated: Option<Error>,
    /// Largest |γ − 1| or |β| produced by a single step before projection.
    pub max_step_defect: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn is_complete(&self) -> bool {
        self.truncated.is_none()
    }

    fn fold(&self, f: impl Fn(&Diagnostics) -> f64) -> f64 {
        self.samples.iter().map(|s| f(&s.diagnostics)).fold(0.0, f64::max)
    }

    pub fn max_gamma_drift(&self) -> f64 {
        self.fold(|d| d.gamma_drift)
    }

    pub fn max_beta_drift(&self) -> f64 {
        self.fold(|d| d.beta_drift)
    }

    pub fn max_e_residual(&self) -> f64 {
        self.fold(|d| d.e_residual)
    }

    /// max k² − min k² over the samples.
    pub fn k2_drift(&self) -> f64 {
        let (lo, hi) = self
            .samples
            .iter()
            .map(|s| s.diagnostics.k2)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if self.samples.is_empty() {
            0.0
        } else {
            hi - lo
        }
    }
}

/// Projects a jet onto the natural gauge: u ← u/√γ, u′ ← u′ − β u,
/// u″ ← u″ − (⟨u,u″⟩ + α) u.
pub fn project_natural(g: &DMatrix<f64>, jet: &mut CovariantJet) -> Result<()> {
    let ip = |a: &DVector<f64>, b: &DVector<f64>| a.dot(&(g * b));
    let gamma = ip(&jet.u, &jet.u);
    if !(gamma > 0.0) {
        return Err(Error::NonTimelike { gamma });
    }
    jet.u /= gamma.sqrt();
    let beta = ip(&jet.u, &jet.u1);
    jet.u1 -= beta * &jet.u;
    let shift = ip(&jet.u, &jet.u2) + ip(&jet.u1, &jet.u1);
    jet.u2 -= shift * &jet.u;
    jet.natural = true;
    Ok(())
}

struct Flow<'a> {
    chart: &'a SpacetimeChart,
    l: &'a dyn InvariantLagrangian,
    method: U3Method,
    drift_limit: f64,
    dim: usize,
}

impl Flow<'_> {
    fn unpack(&self, s: f64, y: &DVector<f64>) -> CovariantJet {
        let d = self.dim;
        let part = |k: usize| DVector::from_iterator(d, y.rows(k * d, d).iter().copied());
        let mut jet = CovariantJet::new(y.rows(0, d).iter().copied().collect(), part(1), part(2), part(3));
        jet.param = s;
        jet.natural = true;
        jet
    }

    fn pack(&self, jet: &CovariantJet) -> DVector<f64> {
        let d = self.dim;
        let mut y = DVector::zeros(4 * d);
        y.rows_mut(0, d).copy_from_slice(&jet.x);
        y.rows_mut(d, d).copy_from(&jet.u);
        y.rows_mut(2 * d, d).copy_from(&jet.u1);
        y.rows_mut(3 * d, d).copy_from(&jet.u2);
        y
    }

    fn u3(&self, local: &LocalGeometry, jet: &CovariantJet) -> Result<DVector<f64>> {
        solve_u3(local, jet, self.l, self.method, self.drift_limit)
    }

    /// ẋ = u, u̇ = u′ − Γ(u,u), u̇′ = u″ − Γ(u,u′), u̇″ = u‴ − Γ(u,u″).
    fn rhs(&self, s: f64, y: &DVector<f64>) -> Result<DVector<f64>> {
        let d = self.dim;
        let jet = self.unpack(s, y);
        let local = self.chart.local(&jet.x)?;
        let u3 = self.u3(&local, &jet)?;
        let c = &local.chris;
        let mut dy = DVector::zeros(4 * d);
        dy.rows_mut(0, d).copy_from(&jet.u);
        dy.rows_mut(d, d).copy_from(&(&jet.u1 - c.contract(&jet.u, &jet.u)));
        dy.rows_mut(2 * d, d).copy_from(&(&jet.u2 - c.contract(&jet.u, &jet.u1)));
        dy.rows_mut(3 * d, d).copy_from(&(u3 - c.contract(&jet.u, &jet.u2)));
        Ok(dy)
    }

    fn sample(&self, s: f64, y: &DVector<f64>) -> Result<Sample> {
        let jet = self.unpack(s, y);
        let local = self.chart.local(&jet.x)?;
        let u3 = self.u3(&local, &jet)?;
        let jet = jet.with_u3(u3);
        let invariants = invariants_at(&local, &jet)?;
        let momenta = momenta_for(&local, &jet, self.l)?;
        let dixon = dixon_state_from(&local, &jet, &momenta);
        let e = euler_poisson_at(&local, &jet, self.l)?;
        let Invariants { gamma, beta, alpha } = invariants;
        let diagnostics = Diagnostics {
            gamma_drift: (gamma - 1.0).abs(),
            beta_drift: beta.abs(),
            k2: (alpha * gamma - beta * beta) / gamma.powi(3),
            e_residual: e.amax(),
        };
        Ok(Sample {
            s,
            jet,
            invariants,
            momenta,
            dixon,
            diagnostics,
        })
    }

    /// Applies the projection if requested and returns the pre-projection
    /// gauge defect.
    fn finish_step(&self, s: f64, y: &mut DVector<f64>, project: bool) -> Result<f64> {
        let mut jet = self.unpack(s, y);
        let g = self.chart.metric(&jet.x)?;
        let ip = |a: &DVector<f64>, b: &DVector<f64>| a.dot(&(&g * b));
        let gamma_drift = (ip(&jet.u, &jet.u) - 1.0).abs();
        let beta_drift = ip(&jet.u, &jet.u1).abs();
        if !(gamma_drift <= self.drift_limit && beta_drift <= self.drift_limit) {
            return Err(Error::GaugeViolated {
                s,
                gamma_drift,
                beta_drift,
                limit: self.drift_limit,
            });
        }
        if project {
            project_natural(&g, &mut jet)?;
            *y = self.pack(&jet);
        }
        Ok(gamma_drift.max(beta_drift))
    }
}

fn rk4_step(flow: &Flow, s: f64, y: &DVector<f64>, h: f64) -> Result<DVector<f64>> {
    let k1 = flow.rhs(s, y)?;
    let k2 = flow.rhs(s + 0.5 * h, &(y + &k1 * (0.5 * h)))?;
    let k3 = flow.rhs(s + 0.5 * h, &(y + &k2 * (0.5 * h)))?;
    let k4 = flow.rhs(s + h, &(y + &k3 * h))?;
    Ok(y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

// Dormand–Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand–Prince attempt: the fifth-order solution and the scaled error
/// norm.
fn dp_step(flow: &Flow, s: f64, y: &DVector<f64>, h: f64, atol: f64, rtol: f64) -> Result<(DVector<f64>, f64)> {
    let mut k: Vec<DVector<f64>> = Vec::with_capacity(7);
    for i in 0..7 {
        let mut yi = y.clone();
        for (j, kj) in k.iter().enumerate() {
            if DP_A[i][j] != 0.0 {
                yi += kj * (h * DP_A[i][j]);
            }
        }
        k.push(flow.rhs(s + DP_C[i] * h, &yi)?);
    }
    let mut y5 = y.clone();
    let mut err = DVector::zeros(y.len());
    for i in 0..7 {
        y5 += &k[i] * (h * DP_B5[i]);
        err += &k[i] * (h * (DP_B5[i] - DP_B4[i]));
    }
    let norm = err
        .iter()
        .zip(y.iter().zip(y5.iter()))
        .map(|(e, (a, b))| e.abs() / (atol + rtol * a.abs().max(b.abs())))
        .fold(0.0, f64::max);
    Ok((y5, norm))
}

/// Integrates the arc-length-reduced extremal flow from a natural-gauge jet.
///
/// Errors are returned for unusable input (bad configuration, dimension
/// mismatch, initial jet off the natural gauge). Failures during the flow
/// stop integration and are reported in [`Trajectory::truncated`] with the
/// samples gathered so far.
pub fn integrate(
    chart: &SpacetimeChart,
    initial: &CovariantJet,
    l: &dyn InvariantLagrangian,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    integrate_with(chart, initial, l, cfg, U3Method::for_lagrangian(l))
}

pub fn integrate_with(
    chart: &SpacetimeChart,
    initial: &CovariantJet,
    l: &dyn InvariantLagrangian,
    cfg: &IntegratorConfig,
    method: U3Method,
) -> Result<Trajectory> {
    cfg.validate()?;
    initial.check_dim(chart.dim())?;
    let local = chart.local(&initial.x)?;
    if !initial.is_natural(&local) {
        let inv = invariants_at(&local, initial)?;
        return Err(Error::GaugeViolated {
            s: initial.param,
            gamma_drift: (inv.gamma - 1.0).abs(),
            beta_drift: inv.beta.abs(),
            limit: GAUGE_EPS,
        });
    }
    let flow = Flow {
        chart,
        l,
        method,
        drift_limit: cfg.drift_abort,
        dim: chart.dim(),
    };
    let s0 = initial.param;
    let mut y = flow.pack(initial);
    let mut traj = Trajectory {
        samples: vec![flow.sample(s0, &y)?],
        truncated: None,
        max_step_defect: 0.0,
        accepted_steps: 0,
        rejected_steps: 0,
    };
    let end = s0 + cfg.horizon;
    let mut s = s0;
    let mut h = cfg.step;
    let mut since_sample = 0;

    while s < end && traj.truncated.is_none() {
        let attempt = match cfg.method {
            Method::Rk4 => {
                let n = traj.accepted_steps + 1;
                let next = (s0 + n as f64 * cfg.step).min(end);
                // absorb a sliver left by rounding into the last step
                let next = if end - next < 1e-9 * cfg.step { end } else { next };
                rk4_step(&flow, s, &y, next - s).map(|y_new| Some((next, y_new)))
            }
            Method::Rk45 => {
                let h_try = h.min(end - s);
                match dp_step(&flow, s, &y, h_try, cfg.atol, cfg.rtol) {
                    Ok((y_new, err)) => {
                        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                        h = h_try * factor;
                        if err <= 1.0 {
                            let next = if end - (s + h_try) < 1e-12 * cfg.step { end } else { s + h_try };
                            Ok(Some((next, y_new)))
                        } else {
                            traj.rejected_steps += 1;
                            if h < cfg.min_step {
                                Err(Error::StepUnderflow { s, min_step: cfg.min_step })
                            } else {
                                Ok(None)
                            }
                        }
                    }
                    Err(e) => Err(e),
                }
            }
        };
        let (next, mut y_new) = match attempt {
            Ok(Some(step)) => step,
            Ok(None) => continue,
            Err(e) => {
                traj.truncated = Some(e);
                break;
            }
        };
        match flow.finish_step(next, &mut y_new, cfg.gauge_projection) {
            Ok(defect) => traj.max_step_defect = traj.max_step_defect.max(defect),
            Err(e) => {
                traj.truncated = Some(e);
                break;
            }
        }
        s = next;
        y = y_new;
        traj.accepted_steps += 1;
        since_sample += 1;
        if since_sample == cfg.sample_every || s >= end {
            since_sample = 0;
            match flow.sample(s, &y) {
                Ok(sample) => traj.samples.push(sample),
                Err(e) => traj.truncated = Some(e),
            }
        }
    }
    Ok(traj)
}
