//! Scenario files: JSON checked against the published schema, then parsed
//! into typed configuration and turned into core objects.

use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use wk_core::dynamics::{project_natural, IntegratorConfig, RieweHelix};
use wk_core::geometry::{ChartSpec, MetricName, SpacetimeChart};
use wk_core::variational::{CovariantJet, InvariantLagrangian, LagrangianSpec};
use wk_core::verify::schwarzschild_orbit_jet;
use nalgebra::DVector;

use crate::CliError;

/// The published scenario schema.
pub const SCHEMA: &str = include_str!("../../../schemas/scenario.schema.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub chart: ChartSpec,
    pub lagrangian: LagrangianSpec,
    pub initial: InitialSpec,
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gauge {
    /// The data must already satisfy γ = 1, β = 0.
    #[default]
    Natural,
    /// Project the data onto the natural gauge first.
    Project,
}

/// Exactly one of: explicit jet (`x`, `u`, `u1`, `u2`), `riewe_helix` or
/// `circular_orbit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u1: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u2: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge: Option<Gauge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub riewe_helix: Option<RieweHelix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circular_orbit: Option<CircularOrbit>,
}

/// Equatorial circular geodesic of Schwarzschild at radius `r`, perturbed by
/// a transverse acceleration `spin` and a u″ of relative size `twist`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircularOrbit {
    pub r: f64,
    #[serde(default)]
    pub spin: f64,
    #[serde(default)]
    pub twist: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    /// JSON lines, one object per sample.
    Json,
}

fn default_trajectory() -> String {
    "trajectory".into()
}

fn default_diagnostics() -> String {
    "diagnostics.json".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// File stem of the trajectory; the extension follows the format.
    #[serde(default = "default_trajectory")]
    pub trajectory: String,
    #[serde(default = "default_diagnostics")]
    pub diagnostics: String,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub plot_data: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            trajectory: default_trajectory(),
            diagnostics: default_diagnostics(),
            format: Format::Csv,
            plot_data: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParameter {
    /// Kawaguchi constant.
    A,
    /// Coefficient of the second sample Lagrangian.
    #[serde(rename = "c")]
    C,
    /// Helix frequency.
    #[serde(rename = "omega")]
    Omega,
    /// Helix radius.
    #[serde(rename = "r")]
    R,
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParameter::A => "A",
            SweepParameter::C => "c",
            SweepParameter::Omega => "omega",
            SweepParameter::R => "r",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub range: [f64; 2],
    pub count: usize,
}

impl SweepSpec {
    /// Evenly spaced values, both ends included; one point sits at the start.
    pub fn values(&self) -> Vec<f64> {
        let [lo, hi] = self.range;
        match self.count {
            0 => Vec::new(),
            1 => vec![lo],
            n => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

/// Everything a single run needs, built from a validated config.
pub struct Run {
    pub chart: SpacetimeChart,
    pub lagrangian: Box<dyn InvariantLagrangian>,
    pub initial: CovariantJet,
    pub integrator: IntegratorConfig,
}

fn schema_validator() -> &'static jsonschema::Validator {
    static VALIDATOR: OnceLock<jsonschema::Validator> = OnceLock::new();
    VALIDATOR.get_or_init(|| {
        let schema: Value = serde_json::from_str(SCHEMA).expect("bundled schema is valid JSON");
        jsonschema::validator_for(&schema).expect("bundled schema compiles")
    })
}

/// Schema violations as `path: message` lines; empty when valid.
pub fn schema_errors(doc: &Value) -> Vec<String> {
    schema_validator()
        .iter_errors(doc)
        .map(|e| {
            let path = e.instance_path().to_string();
            format!("{}: {e}", if path.is_empty() { "/" } else { &path })
        })
        .collect()
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let doc: Value = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        let errors = schema_errors(&doc);
        if !errors.is_empty() {
            return Err(CliError::Config(format!("schema violation\n  {}", errors.join("\n  "))));
        }
        let cfg: Self = serde_json::from_value(doc).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Checks that serde and the schema cannot express.
    pub fn validate(&self) -> Result<(), CliError> {
        self.integrator.validate().map_err(config_err("integrator"))?;
        let init = &self.initial;
        let explicit = [&init.x, &init.u, &init.u1, &init.u2].iter().filter(|v| v.is_some()).count();
        let forms = usize::from(explicit > 0) + usize::from(init.riewe_helix.is_some()) + usize::from(init.circular_orbit.is_some());
        if forms != 1 {
            return Err(CliError::Config(
                "initial: give exactly one of an explicit jet (x, u, u1, u2), riewe_helix or circular_orbit".into(),
            ));
        }
        if explicit > 0 && explicit < 4 {
            return Err(CliError::Config("initial: an explicit jet needs all of x, u, u1 and u2".into()));
        }
        if init.gauge.is_some() && explicit == 0 {
            return Err(CliError::Config("initial.gauge applies only to an explicit jet".into()));
        }
        if let Some(h) = &init.riewe_helix {
            h.validate().map_err(config_err("initial.riewe_helix"))?;
            if self.chart.metric != MetricName::Minkowski {
                return Err(CliError::Config("initial.riewe_helix needs a minkowski chart".into()));
            }
        }
        if init.circular_orbit.is_some() && self.chart.metric != MetricName::Schwarzschild {
            return Err(CliError::Config("initial.circular_orbit needs a schwarzschild chart".into()));
        }
        if let Some(sweep) = &self.sweep {
            if !sweep.range.iter().all(|v| v.is_finite()) {
                return Err(CliError::Config("sweep.range must be finite".into()));
            }
            if sweep.count == 0 {
                return Err(CliError::Config("sweep.count must be at least 1".into()));
            }
            let fits = match sweep.parameter {
                SweepParameter::A => matches!(self.lagrangian, LagrangianSpec::Kawaguchi { .. }),
                SweepParameter::C => matches!(self.lagrangian, LagrangianSpec::SecondSample { .. }),
                SweepParameter::Omega | SweepParameter::R => init.riewe_helix.is_some(),
            };
            if !fits {
                return Err(CliError::Config(format!(
                    "sweep.parameter {} does not apply to this lagrangian or initial data",
                    sweep.parameter
                )));
            }
        }
        Ok(())
    }

    /// Copy with the swept parameter set to `value`.
    pub fn with_parameter(&self, parameter: SweepParameter, value: f64) -> Self {
        let mut cfg = self.clone();
        match (parameter, &mut cfg.lagrangian) {
            (SweepParameter::A, LagrangianSpec::Kawaguchi { a }) => *a = value,
            (SweepParameter::C, LagrangianSpec::SecondSample { c }) => *c = value,
            _ => {}
        }
        if let Some(h) = &mut cfg.initial.riewe_helix {
            match parameter {
                SweepParameter::Omega => h.omega = value,
                SweepParameter::R => h.r = value,
                _ => {}
            }
        }
        cfg.sweep = None;
        cfg
    }

    pub fn build(&self) -> Result<Run, CliError> {
        let chart = self.chart.build().map_err(config_err("chart"))?;
        let initial = self.initial_jet(&chart)?;
        Ok(Run {
            chart,
            lagrangian: self.lagrangian.build(),
            initial,
            integrator: self.integrator.clone(),
        })
    }

    fn initial_jet(&self, chart: &SpacetimeChart) -> Result<CovariantJet, CliError> {
        let init = &self.initial;
        if let Some(h) = &init.riewe_helix {
            if h.dim != chart.dim() {
                return Err(CliError::Config(format!(
                    "initial.riewe_helix.dim {} differs from the chart dimension {}",
                    h.dim,
                    chart.dim()
                )));
            }
            return Ok(h.jet(0.0));
        }
        if let Some(o) = &init.circular_orbit {
            return schwarzschild_orbit_jet(chart, o.r, o.spin, o.twist).map_err(config_err("initial.circular_orbit"));
        }
        let field = |name: &str, v: &Option<Vec<f64>>| -> Result<Vec<f64>, CliError> {
            let v = v.clone().unwrap_or_default();
            if v.len() != chart.dim() {
                return Err(CliError::Config(format!(
                    "initial.{name} has {} components, the chart has {}",
                    v.len(),
                    chart.dim()
                )));
            }
            Ok(v)
        };
        let x = field("x", &init.x)?;
        let vec = |name, v| field(name, v).map(DVector::from_vec);
        let mut jet = CovariantJet::new(x.clone(), vec("u", &init.u)?, vec("u1", &init.u1)?, vec("u2", &init.u2)?);
        let g = chart.metric(&x).map_err(config_err("initial.x"))?;
        match init.gauge.unwrap_or_default() {
            Gauge::Project => project_natural(&g, &mut jet).map_err(config_err("initial"))?,
            Gauge::Natural => {
                let local = chart.local(&x).map_err(config_err("initial.x"))?;
                if !jet.is_natural(&local) {
                    return Err(CliError::Config(
                        "initial: data are not in the natural gauge (γ = 1, β = 0); set \"gauge\": \"project\" to project them"
                            .into(),
                    ));
                }
                jet.natural = true;
            }
        }
        Ok(jet)
    }
}

fn config_err(field: &'static str) -> impl Fn(wk_core::Error) -> CliError {
    move |e| CliError::Config(format!("{field}: {e}"))
}
