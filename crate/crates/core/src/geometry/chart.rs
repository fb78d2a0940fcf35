use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::connection::LocalGeometry;
use super::metric::{Factor, MetricJet, SeparableDiagonal};
use crate::error::{Error, Result};
use crate::numdiff::central_richardson;
use crate::tensor::{Tensor3, Tensor4, Tensor5};

/// Smallest admissible |det g|.
pub const DET_FLOOR: f64 = 1e-10;
/// Relative asymmetry tolerated in a user-supplied metric.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Schwarzschild exterior guard: r > 2M (1 + HORIZON_MARGIN).
pub const HORIZON_MARGIN: f64 = 1e-6;
/// Polar-axis guard: |sin θ| > AXIS_MARGIN.
pub const AXIS_MARGIN: f64 = 1e-8;
/// Default relative finite-difference step for numeric derivative mode.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

pub type MetricFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// Where metric values come from.
#[derive(Clone)]
pub enum MetricSource {
    Minkowski,
    /// Exterior Schwarzschild in (t, r, θ, φ).
    Schwarzschild { mass: f64 },
    /// de Sitter in flat slicing, g = diag(1, -e^{2Ht}, ..., -e^{2Ht}).
    DeSitter { hubble: f64 },
    /// Pointwise metric supplied by the caller; only usable in numeric mode.
    Custom(MetricFn),
}

impl fmt::Debug for MetricSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricSource::Minkowski => write!(f, "Minkowski"),
            MetricSource::Schwarzschild { mass } => write!(f, "Schwarzschild(M={mass})"),
            MetricSource::DeSitter { hubble } => write!(f, "DeSitter(H={hubble})"),
            MetricSource::Custom(_) => write!(f, "Custom"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeMode {
    Analytic,
    /// Central differences with step `step · max(1, |x^k|)` and one
    /// Richardson level.
    Numeric { step: f64 },
}

/// A coordinate patch of a pseudo-Riemannian spacetime.
///
/// Charts are immutable once built and can be shared freely between threads.
#[derive(Debug, Clone)]
pub struct SpacetimeChart {
    dim: usize,
    signature: Vec<i8>,
    source: MetricSource,
    mode: DerivativeMode,
    diagonal: Option<SeparableDiagonal>,
}

impl SpacetimeChart {
    pub fn minkowski(dim: usize) -> Self {
        let mut signature = vec![-1; dim];
        signature[0] = 1;
        Self::build(dim, signature, MetricSource::Minkowski, DerivativeMode::Analytic)
            .expect("Minkowski chart with default signature is always valid")
    }

    pub fn schwarzschild(mass: f64) -> Result<Self> {
        Self::build(
            4,
            vec![1, -1, -1, -1],
            MetricSource::Schwarzschild { mass },
            DerivativeMode::Analytic,
        )
    }

    pub fn de_sitter(hubble: f64) -> Result<Self> {
        Self::build(
            4,
            vec![1, -1, -1, -1],
            MetricSource::DeSitter { hubble },
            DerivativeMode::Analytic,
        )
    }

    pub fn custom(signature: Vec<i8>, metric: MetricFn, step: f64) -> Result<Self> {
        let dim = signature.len();
        Self::build(
            dim,
            signature,
            MetricSource::Custom(metric),
            DerivativeMode::Numeric { step },
        )
    }

    /// General constructor. Built-in curved metrics accept the two Lorentzian
    /// signatures with time first, (+,-,-,-) and (-,+,+,+).
    pub fn build(
        dim: usize,
        signature: Vec<i8>,
        source: MetricSource,
        mode: DerivativeMode,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("dimension must be positive".into()));
        }
        if signature.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: signature.len(),
            });
        }
        if signature.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::InvalidConfig("signature entries must be ±1".into()));
        }
        if let DerivativeMode::Numeric { step } = mode {
            if !(step > 0.0 && step.is_finite()) {
                return Err(Error::InvalidConfig("finite-difference step must be positive".into()));
            }
        }
        // overall sign relative to the (+,-,-,...) reference form
        let lorentz_sign = || -> Result<f64> {
            let t = signature[0] as f64;
            if signature[1..].iter().all(|s| *s as f64 == -t) {
                Ok(t)
            } else {
                Err(Error::InvalidConfig(format!(
                    "built-in curved metrics need a Lorentzian signature with time first, got {signature:?}"
                )))
            }
        };
        let diagonal = match &source {
            MetricSource::Minkowski => Some(SeparableDiagonal {
                components: signature.iter().map(|s| (*s as f64, vec![])).collect(),
            }),
            MetricSource::Schwarzschild { mass } => {
                if dim != 4 {
                    return Err(Error::InvalidConfig("Schwarzschild chart is four-dimensional".into()));
                }
                if !(*mass > 0.0) {
                    return Err(Error::InvalidConfig("Schwarzschild mass must be positive".into()));
                }
                let s = lorentz_sign()?;
                let m = *mass;
                Some(SeparableDiagonal {
                    components: vec![
                        (s, vec![(1, Factor::Lapse { mass: m })]),
                        (-s, vec![(1, Factor::InvLapse { mass: m })]),
                        (-s, vec![(1, Factor::Square)]),
                        (-s, vec![(1, Factor::Square), (2, Factor::SinSquare)]),
                    ],
                })
            }
            MetricSource::DeSitter { hubble } => {
                if dim < 2 {
                    return Err(Error::InvalidConfig("de Sitter chart needs dim >= 2".into()));
                }
                let s = lorentz_sign()?;
                let rate = 2.0 * hubble;
                let mut components = vec![(s, vec![])];
                components.extend((1..dim).map(|_| (-s, vec![(0, Factor::Exp { rate })])));
                Some(SeparableDiagonal { components })
            }
            MetricSource::Custom(_) => {
                if mode == DerivativeMode::Analytic {
                    return Err(Error::InvalidConfig(
                        "user-supplied metrics require numeric derivative mode".into(),
                    ));
                }
                None
            }
        };
        Ok(Self {
            dim,
            signature,
            source,
            mode,
            diagonal,
        })
    }

    /// Same chart with a different derivative mode.
    pub fn with_mode(&self, mode: DerivativeMode) -> Result<Self> {
        Self::build(self.dim, self.signature.clone(), self.source.clone(), mode)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn signature(&self) -> &[i8] {
        &self.signature
    }

    pub fn source(&self) -> &MetricSource {
        &self.source
    }

    pub fn mode(&self) -> DerivativeMode {
        self.mode
    }

    /// Rejects points outside the chart's validity region.
    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        let out = |reason: String| Error::OutOfChart {
            point: x.to_vec(),
            reason,
        };
        if x.iter().any(|v| !v.is_finite()) {
            return Err(out("non-finite coordinate".into()));
        }
        if let MetricSource::Schwarzschild { mass } = self.source {
            let r_min = 2.0 * mass * (1.0 + HORIZON_MARGIN);
            if x[1] <= r_min {
                return Err(out(format!("r = {} is not outside r = {r_min}", x[1])));
            }
            if x[2].sin().abs() <= AXIS_MARGIN {
                return Err(out(format!("theta = {} is on the polar axis", x[2])));
            }
        }
        Ok(())
    }

    fn raw_metric(&self, x: &[f64]) -> DMatrix<f64> {
        match (&self.source, &self.diagonal) {
            (MetricSource::Custom(f), _) => f(x),
            (_, Some(diag)) => diag.metric(x),
            _ => unreachable!("built-in charts always carry a diagonal form"),
        }
    }

    fn validate_metric(&self, g: &DMatrix<f64>) -> Result<()> {
        if g.nrows() != self.dim || g.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: g.nrows(),
            });
        }
        let scale = g.amax().max(f64::MIN_POSITIVE);
        if (g - g.transpose()).amax() > SYMMETRY_TOL * scale {
            return Err(Error::InvalidConfig("metric is not symmetric".into()));
        }
        let det = g.determinant();
        if !(det.abs() > DET_FLOOR) {
            return Err(Error::DegenerateMetric { det });
        }
        Ok(())
    }

    /// Metric components g_mn at `x`.
    pub fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        let g = self.raw_metric(x);
        self.validate_metric(&g)?;
        Ok(g)
    }

    /// Metric, first and second derivatives at `x`.
    pub fn metric_jet(&self, x: &[f64]) -> Result<MetricJet> {
        self.jet(x, false)
    }

    /// Metric jet including third derivatives.
    pub fn metric_jet3(&self, x: &[f64]) -> Result<MetricJet> {
        self.jet(x, true)
    }

    fn jet(&self, x: &[f64], third: bool) -> Result<MetricJet> {
        let g = self.metric(x)?;
        let jet = match (self.mode, &self.diagonal) {
            (DerivativeMode::Analytic, Some(diag)) => diag.jet(x, third),
            (DerivativeMode::Numeric { step }, _) => self.numeric_jet(x, g, step, third),
            (DerivativeMode::Analytic, None) => unreachable!("rejected at construction"),
        };
        Ok(jet)
    }

    /// Numeric derivatives. Each nesting level uses a step ten times larger
    /// than the one below it so that round-off from the inner level stays
    /// below the truncation error of the outer one.
    fn numeric_jet(&self, x: &[f64], g: DMatrix<f64>, step: f64, third: bool) -> MetricJet {
        let d = self.dim;
        let dg_at = |y: &[f64]| -> Vec<f64> {
            let mut out = vec![0.0; d * d * d];
            let mut work = y.to_vec();
            for k in 0..d {
                let h = step * y[k].abs().max(1.0);
                let mut f = |t: f64| {
                    work[k] = t;
                    let v = self.raw_metric(&work).as_slice().to_vec();
                    work[k] = y[k];
                    v
                };
                let col = central_richardson(&mut f, y[k], h);
                // nalgebra storage is column-major: col[m + n*d] = g[(m, n)]
                for m in 0..d {
                    for n in 0..d {
                        out[(m * d + n) * d + k] = col[m + n * d];
                    }
                }
            }
            out
        };
        let nest = |inner: &dyn Fn(&[f64]) -> Vec<f64>, y: &[f64], h_rel: f64| -> Vec<f64> {
            let len = inner(y).len();
            let mut out = vec![0.0; len * d];
            let mut work = y.to_vec();
            for j in 0..d {
                let h = h_rel * y[j].abs().max(1.0);
                let mut f = |t: f64| {
                    work[j] = t;
                    let v = inner(&work);
                    work[j] = y[j];
                    v
                };
                let col = central_richardson(&mut f, y[j], h);
                for (i, v) in col.into_iter().enumerate() {
                    out[i * d + j] = v;
                }
            }
            out
        };
        let ddg_at = |y: &[f64]| nest(&dg_at, y, 10.0 * step);
        let dg = dg_at(x);
        let ddg = ddg_at(x);
        let dddg = third.then(|| nest(&ddg_at, x, 100.0 * step));
        let t3 = Tensor3::from_fn(d, |[m, n, k]| dg[(m * d + n) * d + k]);
        let t4 = Tensor4::from_fn(d, |[m, n, k, j]| ddg[((m * d + n) * d + k) * d + j]);
        let t5 = dddg.map(|v| {
            Tensor5::from_fn(d, |[m, n, k, j, i]| v[(((m * d + n) * d + k) * d + j) * d + i])
        });
        MetricJet {
            g,
            dg: t3,
            ddg: t4,
            dddg: t5,
        }
    }

    /// Christoffel symbols, their first derivatives and the curvature tensor
    /// at `x`.
    pub fn local(&self, x: &[f64]) -> Result<LocalGeometry> {
        LocalGeometry::from_jet(x, &self.metric_jet(x)?)
    }

    /// As [`Self::local`], additionally carrying second derivatives of the
    /// Christoffel symbols.
    pub fn local3(&self, x: &[f64]) -> Result<LocalGeometry> {
        LocalGeometry::from_jet(x, &self.metric_jet3(x)?)
    }

    /// Whether the eigenvalue signs of g at `x` match the declared signature.
    pub fn signature_matches(&self, x: &[f64]) -> Result<bool> {
        let g = self.metric(x)?;
        let eig = SymmetricEigen::new(g);
        let positive = eig.eigenvalues.iter().filter(|v| **v > 0.0).count();
        let declared = self.signature.iter().filter(|s| **s > 0).count();
        Ok(positive == declared)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricName {
    Minkowski,
    Schwarzschild,
    #[serde(alias = "de_sitter")]
    Desitter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DerivativeModeName {
    Analytic,
    Numeric,
}

/// JSON description of a chart, e.g.
/// `{"metric": "schwarzschild", "params": {"M": 1.0}, "signature": [1,-1,-1,-1], "derivative_mode": "analytic"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    pub metric: MetricName,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<Vec<i8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default = "default_mode")]
    pub derivative_mode: DerivativeModeName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
}

fn default_mode() -> DerivativeModeName {
    DerivativeModeName::Analytic
}

impl ChartSpec {
    pub fn build(&self) -> Result<SpacetimeChart> {
        let (source, allowed): (MetricSource, &[&str]) = match self.metric {
            MetricName::Minkowski => (MetricSource::Minkowski, &[]),
            MetricName::Schwarzschild => (
                MetricSource::Schwarzschild {
                    mass: self.param("M")?,
                },
                &["M"],
            ),
            MetricName::Desitter => (
                MetricSource::DeSitter {
                    hubble: self.param("H")?,
                },
                &["H"],
            ),
        };
        if let Some(extra) = self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::InvalidConfig(format!(
                "unknown parameter {extra:?} for {:?} metric",
                self.metric
            )));
        }
        let dim = self
            .dim
            .or(self.signature.as_ref().map(Vec::len))
            .unwrap_or(4);
        let signature = self.signature.clone().unwrap_or_else(|| {
            let mut s = vec![-1; dim];
            s[0] = 1;
            s
        });
        let mode = match self.derivative_mode {
            DerivativeModeName::Analytic => DerivativeMode::Analytic,
            DerivativeModeName::Numeric => DerivativeMode::Numeric {
                step: self.fd_step.unwrap_or(DEFAULT_FD_STEP),
            },
        };
        SpacetimeChart::build(dim, signature, source, mode)
    }

    fn param(&self, key: &str) -> Result<f64> {
        self.params
            .get(key)
            .copied()
            .ok_or_else(|| Error::InvalidConfig(format!("missing parameter {key:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minkowski_jet_is_constant() {
        let chart = SpacetimeChart::minkowski(4);
        let jet = chart.metric_jet3(&[0.3, -1.0, 2.0, 5.0]).unwrap();
        assert_eq!(
            jet.g,
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -1.0, -1.0, -1.0]))
        );
        assert_eq!(jet.dg.max_abs(), 0.0);
        assert_eq!(jet.ddg.max_abs(), 0.0);
        assert_eq!(jet.dddg.unwrap().max_abs(), 0.0);
    }

    #[test]
    fn schwarzschild_values_and_guards() {
        let chart = SpacetimeChart::schwarzschild(1.0).unwrap();
        let g = chart.metric(&[0.0, 10.0, 1.2, 0.4]).unwrap();
        assert!((g[(0, 0)] - 0.8).abs() < 1e-15);
        assert!((g[(1, 1)] + 1.25).abs() < 1e-15);
        assert!(matches!(
            chart.metric(&[0.0, 1.5, 1.2, 0.0]),
            Err(Error::OutOfChart { .. })
        ));
        assert!(matches!(
            chart.metric(&[0.0, 5.0, 0.0, 0.0]),
            Err(Error::OutOfChart { .. })
        ));
        assert!(chart.signature_matches(&[0.0, 5.0, 1.0, 0.0]).unwrap());
    }

    #[test]
    fn flipped_signature_negates_metric() {
        let plus = SpacetimeChart::schwarzschild(1.0).unwrap();
        let minus = SpacetimeChart::build(
            4,
            vec![-1, 1, 1, 1],
            MetricSource::Schwarzschild { mass: 1.0 },
            DerivativeMode::Analytic,
        )
        .unwrap();
        let x = [0.0, 7.0, 0.9, 0.1];
        assert_eq!(plus.metric(&x).unwrap(), -minus.metric(&x).unwrap());
        assert!(minus.signature_matches(&x).unwrap());
        assert!(SpacetimeChart::build(
            4,
            vec![1, 1, -1, -1],
            MetricSource::Schwarzschild { mass: 1.0 },
            DerivativeMode::Analytic
        )
        .is_err());
    }

    #[test]
    fn degenerate_custom_metric_is_rejected() {
        let chart = SpacetimeChart::custom(
            vec![1, -1],
            Arc::new(|x: &[f64]| DMatrix::from_row_slice(2, 2, &[1.0, x[0], x[0], x[0] * x[0]])),
            1e-4,
        )
        .unwrap();
        assert!(matches!(
            chart.metric(&[0.5, 0.0]),
            Err(Error::DegenerateMetric { .. })
        ));
    }

    #[test]
    fn numeric_mode_matches_analytic() {
        let analytic = SpacetimeChart::schwarzschild(1.0).unwrap();
        let numeric = analytic
            .with_mode(DerivativeMode::Numeric { step: 1e-4 })
            .unwrap();
        let x = [0.2, 6.5, 1.1, 0.7];
        let a = analytic.metric_jet3(&x).unwrap();
        let n = numeric.metric_jet3(&x).unwrap();
        let rel = |p: &[f64], q: &[f64]| {
            let scale = p.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            p.iter()
                .zip(q)
                .fold(0.0_f64, |m, (u, v)| m.max((u - v).abs()))
                / scale
        };
        assert!(rel(a.dg.as_slice(), n.dg.as_slice()) < 1e-7);
        assert!(rel(a.ddg.as_slice(), n.ddg.as_slice()) < 1e-6);
        assert!(rel(a.dddg.unwrap().as_slice(), n.dddg.unwrap().as_slice()) < 1e-4);
    }

    #[test]
    fn chart_spec_parsing() {
        let spec: ChartSpec = serde_json::from_str(
            r#"{"metric": "schwarzschild", "params": {"M": 1.0}, "signature": [1,-1,-1,-1], "derivative_mode": "analytic"}"#,
        )
        .unwrap();
        let chart = spec.build().unwrap();
        assert_eq!(chart.dim(), 4);
        assert!(serde_json::from_str::<ChartSpec>(r#"{"metric": "minkowski", "colour": 1}"#).is_err());
        let bad: ChartSpec =
            serde_json::from_str(r#"{"metric": "desitter", "params": {"M": 1.0}}"#).unwrap();
        assert!(bad.build().is_err());
    }
}
