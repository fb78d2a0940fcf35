//! Trajectory, diagnostics and summary writers. Floats are written in
//! shortest round-trip exponent form so that output is byte-reproducible.

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};
use wk_core::dynamics::{Sample, Trajectory};

use crate::CliError;

fn num(v: f64) -> String {
    format!("{v:e}")
}

/// Column names of the trajectory table for an n-dimensional chart.
pub fn trajectory_header(n: usize) -> Vec<String> {
    let mut h = vec!["s".to_string()];
    for prefix in ["x", "u", "u1_", "u2_"] {
        h.extend((0..n).map(|i| format!("{prefix}{i}")));
    }
    h.extend(["gamma", "beta", "alpha", "k2", "E_residual"].map(String::from));
    h.extend((0..n).map(|i| format!("P{i}")));
    h.extend(spin_pairs(n).map(|(i, j)| format!("S{i}_{j}")));
    h
}

/// Index pairs i < j in lexicographic order.
fn spin_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

fn row(sample: &Sample) -> Vec<f64> {
    let n = sample.jet.dim();
    let mut r = vec![sample.s];
    r.extend(&sample.jet.x);
    for v in [&sample.jet.u, &sample.jet.u1, &sample.jet.u2] {
        r.extend(v.iter());
    }
    let inv = &sample.invariants;
    r.extend([inv.gamma, inv.beta, inv.alpha, sample.diagnostics.k2, sample.diagnostics.e_residual]);
    r.extend(sample.dixon.p.iter());
    r.extend(spin_pairs(n).map(|(i, j)| sample.dixon.s[(i, j)]));
    r
}

pub fn write_trajectory_csv(w: impl Write, traj: &Trajectory, dim: usize) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(trajectory_header(dim))?;
    for sample in &traj.samples {
        out.write_record(row(sample).into_iter().map(num))?;
    }
    out.flush()?;
    Ok(())
}

/// One JSON object per line with array-valued vectors and the full spin matrix.
pub fn write_trajectory_jsonl(mut w: impl Write, traj: &Trajectory) -> Result<(), CliError> {
    for sample in &traj.samples {
        let v = |d: &nalgebra::DVector<f64>| d.iter().copied().collect::<Vec<_>>();
        let s = &sample.dixon.s;
        let spin: Vec<Vec<f64>> = (0..s.nrows()).map(|i| s.row(i).iter().copied().collect()).collect();
        let line = json!({
            "s": sample.s,
            "x": sample.jet.x,
            "u": v(&sample.jet.u),
            "u1": v(&sample.jet.u1),
            "u2": v(&sample.jet.u2),
            "gamma": sample.invariants.gamma,
            "beta": sample.invariants.beta,
            "alpha": sample.invariants.alpha,
            "k2": sample.diagnostics.k2,
            "E_residual": sample.diagnostics.e_residual,
            "P": v(&sample.dixon.p),
            "S": spin,
        });
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Whitespace-separated `s`, spatial coordinates and k², for gnuplot.
pub fn write_plot_data(mut w: impl Write, traj: &Trajectory, dim: usize) -> Result<(), CliError> {
    let cols: Vec<String> = (1..dim).map(|i| format!("x{i}")).collect();
    writeln!(w, "# s {} k2", cols.join(" "))?;
    for sample in &traj.samples {
        let mut fields = vec![num(sample.s)];
        fields.extend(sample.jet.x[1..].iter().map(|&v| num(v)));
        fields.push(num(sample.diagnostics.k2));
        writeln!(w, "{}", fields.join(" "))?;
    }
    Ok(())
}

/// Outcome of one run, shared by `integrate` and every sweep row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub status: &'static str,
    pub samples: usize,
    pub s_final: f64,
    pub k2_initial: f64,
    pub k2_final: f64,
    pub k2_drift: f64,
    pub max_e_residual: f64,
    pub max_gamma_drift: f64,
    pub max_beta_drift: f64,
    pub message: String,
}

impl RunSummary {
    pub fn from_trajectory(traj: &Trajectory) -> Self {
        let k2 = |s: Option<&Sample>| s.map_or(f64::NAN, |s| s.diagnostics.k2);
        Self {
            status: if traj.is_complete() { "ok" } else { "truncated" },
            samples: traj.samples.len(),
            s_final: traj.samples.last().map_or(f64::NAN, |s| s.s),
            k2_initial: k2(traj.samples.first()),
            k2_final: k2(traj.samples.last()),
            k2_drift: traj.k2_drift(),
            max_e_residual: traj.max_e_residual(),
            max_gamma_drift: traj.max_gamma_drift(),
            max_beta_drift: traj.max_beta_drift(),
            message: traj.truncated.as_ref().map(ToString::to_string).unwrap_or_default(),
        }
    }

    /// A run that could not start.
    pub fn failed(message: String) -> Self {
        Self {
            status: "error",
            samples: 0,
            s_final: f64::NAN,
            k2_initial: f64::NAN,
            k2_final: f64::NAN,
            k2_drift: f64::NAN,
            max_e_residual: f64::NAN,
            max_gamma_drift: f64::NAN,
            max_beta_drift: f64::NAN,
            message,
        }
    }

    pub const HEADER: [&'static str; 10] = [
        "status",
        "samples",
        "s_final",
        "k2_initial",
        "k2_final",
        "k2_drift",
        "max_E_residual",
        "max_gamma_drift",
        "max_beta_drift",
        "message",
    ];

    pub fn record(&self) -> Vec<String> {
        let mut r = vec![self.status.to_string(), self.samples.to_string()];
        r.extend(
            [
                self.s_final,
                self.k2_initial,
                self.k2_final,
                self.k2_drift,
                self.max_e_residual,
                self.max_gamma_drift,
                self.max_beta_drift,
            ]
            .map(num),
        );
        r.push(self.message.clone());
        r
    }
}

/// Writes a summary table with optional leading (name, value) columns.
pub fn write_summary_csv<'a>(
    w: impl Write,
    lead: &[&str],
    rows: impl IntoIterator<Item = (Vec<String>, &'a RunSummary)>,
) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(lead.iter().copied().chain(RunSummary::HEADER))?;
    for (prefix, summary) in rows {
        out.write_record(prefix.into_iter().chain(summary.record()))?;
    }
    out.flush()?;
    Ok(())
}

/// diagnostics.json: run summary plus step statistics and the `truncated` flag.
pub fn diagnostics_json(name: Option<&str>, traj: &Trajectory, summary: &RunSummary) -> Value {
    // JSON has no NaN; an empty trajectory reports nulls.
    let finite = |v: f64| if v.is_finite() { json!(v) } else { Value::Null };
    json!({
        "scenario": name,
        "truncated": !traj.is_complete(),
        "truncation_reason": traj.truncated.as_ref().map(ToString::to_string),
        "samples": summary.samples,
        "s_final": finite(summary.s_final),
        "accepted_steps": traj.accepted_steps,
        "rejected_steps": traj.rejected_steps,
        "max_gamma_drift": finite(summary.max_gamma_drift),
        "max_beta_drift": finite(summary.max_beta_drift),
        "max_step_defect": finite(traj.max_step_defect),
        "max_E_residual": finite(summary.max_e_residual),
        "k2_initial": finite(summary.k2_initial),
        "k2_final": finite(summary.k2_final),
        "k2_drift": finite(summary.k2_drift),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_lists_spin_pairs_lexicographically() {
        let h = trajectory_header(4);
        assert_eq!(h.len(), 1 + 16 + 5 + 4 + 6);
        let spin: Vec<_> = h.iter().filter(|c| c.starts_with('S')).cloned().collect();
        assert_eq!(spin, ["S0_1", "S0_2", "S0_3", "S1_2", "S1_3", "S2_3"]);
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.0, -1.5, 1e-300, std::f64::consts::PI] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
    }
}
