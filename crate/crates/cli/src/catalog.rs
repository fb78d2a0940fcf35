//! Built-in charts, Lagrangians, scenarios and suites.

use serde::Serialize;
use wk_core::verify::Suite;

use crate::config::ScenarioConfig;
use crate::CliError;

/// Shipped scenario files, embedded at build time.
pub const SCENARIOS: [(&str, &str); 4] = [
    ("minkowski_geodesic", include_str!("../../../scenarios/minkowski_geodesic.json")),
    ("riewe_helix", include_str!("../../../scenarios/riewe_helix.json")),
    ("schwarzschild_spin", include_str!("../../../scenarios/schwarzschild_spin.json")),
    ("riewe_helix_sweep", include_str!("../../../scenarios/riewe_helix_sweep.json")),
];

pub fn scenario(name: &str) -> Result<ScenarioConfig, CliError> {
    let (_, text) = SCENARIOS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        let names: Vec<_> = SCENARIOS.iter().map(|(n, _)| *n).collect();
        CliError::Config(format!("unknown scenario {name:?}; built-in scenarios: {}", names.join(", ")))
    })?;
    ScenarioConfig::from_json(text)
}

#[derive(Debug, Serialize)]
pub struct Entry {
    pub name: &'static str,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct Catalog {
    pub charts: Vec<Entry>,
    pub lagrangians: Vec<Entry>,
    pub scenarios: Vec<Entry>,
    pub suites: Vec<&'static str>,
}

pub fn catalog() -> Catalog {
    let charts = vec![
        Entry {
            name: "minkowski",
            detail: "flat spacetime, any dimension; no params".into(),
        },
        Entry {
            name: "schwarzschild",
            detail: "exterior Schwarzschild in (t, r, θ, φ); params {\"M\"}".into(),
        },
        Entry {
            name: "desitter",
            detail: "static de Sitter patch in (t, r, θ, φ); params {\"H\"}".into(),
        },
    ];
    let lagrangians = vec![
        Entry {
            name: "kawaguchi",
            detail: "(k² + A)|u|; {\"lagrangian\": \"kawaguchi\", \"A\": …}".into(),
        },
        Entry {
            name: "test2",
            detail: "γ^½ + c(αγ − β²)²/γ^{11/2}; {\"lagrangian\": \"test2\", \"c\": 0.1}".into(),
        },
    ];
    let scenarios = SCENARIOS
        .iter()
        .map(|(name, text)| Entry {
            name,
            detail: ScenarioConfig::from_json(text)
                .ok()
                .and_then(|c| c.description)
                .unwrap_or_default(),
        })
        .collect();
    Catalog {
        charts,
        lagrangians,
        scenarios,
        suites: Suite::NAMES.to_vec(),
    }
}

impl std::fmt::Display for Catalog {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (title, entries) in [
            ("charts", &self.charts),
            ("lagrangians", &self.lagrangians),
            ("scenarios", &self.scenarios),
        ] {
            writeln!(f, "{title}:")?;
            for e in entries {
                writeln!(f, "  {:<20} {}", e.name, e.detail)?;
            }
        }
        writeln!(f, "suites:")?;
        writeln!(f, "  {}", self.suites.join(", "))
    }
}
