//! Acceptance criteria at pinned tolerances. Prints one PASS/FAIL line per
//! criterion and exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use wk_core::verify::{
    check_action_variation, check_compatibility, check_dixon_one, check_dixon_two_random, check_equivalence,
    check_flat_curvature, check_reparametrization, check_riemann_antisymmetry, check_riewe_recovery, check_zermelo,
    kawaguchi_dixon_case, second_sample_dixon_case, CheckReport, VerifyOptions,
};

/// A report re-judged against the criterion's own tolerance.
fn pinned(report: CheckReport, tolerance: f64) -> CheckReport {
    let pass = report.error.is_none() && report.n_cases > 0 && report.max_residual <= tolerance;
    CheckReport {
        tolerance,
        pass,
        ..report
    }
}

struct Criterion {
    id: u8,
    title: &'static str,
    reports: Vec<CheckReport>,
    elapsed: Duration,
    limit: Option<Duration>,
}

impl Criterion {
    fn pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass) && self.limit.is_none_or(|l| self.elapsed <= l)
    }

    fn line(&self) -> String {
        let parts: Vec<String> = self
            .reports
            .iter()
            .map(|r| {
                let mut s = format!(
                    "{}={:.2e}/{:.0e} (n={})",
                    r.check_name, r.max_residual, r.tolerance, r.n_cases
                );
                if let Some(e) = &r.error {
                    s.push_str(&format!(" error: {e}"));
                }
                s
            })
            .collect();
        let time = match self.limit {
            Some(l) => format!("{:.1}s/{}s", self.elapsed.as_secs_f64(), l.as_secs()),
            None => format!("{:.1}s", self.elapsed.as_secs_f64()),
        };
        format!(
            "{} [{}] {}: {} | {time}",
            if self.pass() { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            parts.join("; ")
        )
    }
}

fn run(id: u8, title: &'static str, limit: Option<u64>, f: impl FnOnce() -> Vec<CheckReport>) -> Criterion {
    let start = Instant::now();
    let reports = f();
    let c = Criterion {
        id,
        title,
        reports,
        elapsed: start.elapsed(),
        limit: limit.map(Duration::from_secs),
    };
    println!("{}", c.line());
    c
}

fn main() -> ExitCode {
    let opts = VerifyOptions::default();
    let criteria = [
        run(1, "covariant vs coordinate Euler-Poisson, 50 curves per chart", Some(60), || {
            let [equivalence, ..] = check_equivalence(&opts, 50);
            vec![pinned(equivalence, 1e-6)]
        }),
        run(2, "Riewe helix recovery, r=0.5 omega=2, ds=1e-3, s in [0,10]", Some(10), || {
            let [trajectory, k2, _] = check_riewe_recovery();
            vec![pinned(trajectory, 1e-6), pinned(k2, 1e-7)]
        }),
        run(3, "Dixon I along a Schwarzschild trajectory, s in [0,50]", Some(30), || {
            let [one, _] = check_dixon_one(&kawaguchi_dixon_case(), &opts);
            vec![pinned(one, 1e-5)]
        }),
        run(4, "Dixon II identity on arbitrary jets", None, || {
            let [random, _] = check_dixon_two_random(&kawaguchi_dixon_case(), &opts);
            vec![pinned(random, 1e-9)]
        }),
        run(5, "criteria 3-4 with the second sample Lagrangian", None, || {
            let case = second_sample_dixon_case();
            let [one, _] = check_dixon_one(&case, &opts);
            let [random, _] = check_dixon_two_random(&case, &opts);
            vec![pinned(one, 1e-5), pinned(random, 1e-9)]
        }),
        run(6, "Zermelo conditions and reparametrization invariance", None, || {
            let [homogeneity, transversality, _] = check_zermelo(&opts, 100);
            vec![
                pinned(homogeneity, 1e-6),
                pinned(transversality, 1e-6),
                pinned(check_reparametrization(), 1e-7),
            ]
        }),
        run(7, "metric compatibility, Riemann antisymmetry, flat curvature", None, || {
            vec![
                pinned(check_compatibility(&opts, false), 1e-9),
                pinned(check_riemann_antisymmetry(&opts), 1e-10),
                pinned(check_flat_curvature(&opts), 0.0),
            ]
        }),
        run(8, "action variation vs <E, bump> pairing, 10 pairs", None, || {
            vec![pinned(check_action_variation(&opts, 10), 1e-4)]
        }),
    ];
    let failed = criteria.iter().filter(|c| !c.pass()).count();
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
