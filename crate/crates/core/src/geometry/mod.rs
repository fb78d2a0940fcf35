//! Pseudo-Riemannian metric kernel: charts, metric jets, the Levi-Civita
//! connection, curvature and index gymnastics.

mod chart;
mod connection;
mod metric;

pub use chart::{
    ChartSpec, DerivativeMode, DerivativeModeName, MetricFn, MetricName, MetricSource,
    SpacetimeChart, AXIS_MARGIN, DEFAULT_FD_STEP, DET_FLOOR, HORIZON_MARGIN, SYMMETRY_TOL,
};
pub use connection::{christoffel, riemann, Christoffel, Curvature, LocalGeometry};
pub use metric::MetricJet;

use nalgebra::DVector;

use crate::error::Result;

/// ⟨a, b⟩ at `x`.
pub fn inner(chart: &SpacetimeChart, x: &[f64], a: &DVector<f64>, b: &DVector<f64>) -> Result<f64> {
    Ok(a.dot(&(chart.metric(x)? * b)))
}

pub fn lower(chart: &SpacetimeChart, x: &[f64], a: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(chart.metric(x)? * a)
}

pub fn raise(chart: &SpacetimeChart, x: &[f64], w: &DVector<f64>) -> Result<DVector<f64>> {
    let g = chart.metric(x)?;
    let det = g.determinant();
    let ginv = g
        .try_inverse()
        .ok_or(crate::error::Error::DegenerateMetric { det })?;
    Ok(ginv * w)
}

/// Covariant derivative of a vector field `a` along a curve with tangent `u`,
/// given the ordinary parameter derivative `da`.
pub fn covariant_derivative(
    chart: &SpacetimeChart,
    x: &[f64],
    u: &DVector<f64>,
    a: &DVector<f64>,
    da: &DVector<f64>,
) -> Result<DVector<f64>> {
    Ok(chart.local(x)?.covariant_derivative(u, a, da))
}

/// Covector counterpart of [`covariant_derivative`].
pub fn covariant_derivative_covector(
    chart: &SpacetimeChart,
    x: &[f64],
    u: &DVector<f64>,
    a: &DVector<f64>,
    da: &DVector<f64>,
) -> Result<DVector<f64>> {
    Ok(chart.local(x)?.covariant_derivative_covector(u, a, da))
}
