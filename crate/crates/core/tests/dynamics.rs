use approx::assert_relative_eq;
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wk_core::dynamics::{
    dixon_state, integrate, integrate_with, project_natural, solve_u3, wedge, IntegratorConfig, Method, RieweHelix,
    U3Method,
};
use wk_core::geometry::SpacetimeChart;
use wk_core::oracles::random_coordinate_jet;
use wk_core::variational::{euler_poisson_covariant, jet_coordinate_to_covariant, CovariantJet, Kawaguchi, SecondSample};
use wk_core::Error;

fn helix_sup_error(helix: &RieweHelix, samples: impl Iterator<Item = (f64, Vec<f64>)>) -> f64 {
    samples.fold(0.0, |m, (s, x)| {
        let exact = &helix.derivatives_at(s)[0];
        x.iter().zip(exact.iter()).fold(m, |m, (a, b)| m.max((a - b).abs()))
    })
}

#[test]
fn adaptive_stepper_follows_the_helix() {
    let helix = RieweHelix::new(0.5, 2.0);
    let l = Kawaguchi {
        a: helix.on_constraint_a(),
    };
    let mut cfg = IntegratorConfig::rk4(1e-2, 5.0);
    cfg.method = Method::Rk45;
    let traj = integrate(&SpacetimeChart::minkowski(4), &helix.jet(0.0), &l, &cfg).unwrap();
    assert!(traj.is_complete());
    assert_eq!(traj.samples.last().unwrap().s, 5.0);
    let err = helix_sup_error(&helix, traj.samples.iter().map(|s| (s.s, s.jet.x.clone())));
    assert!(err < 1e-6, "{err:e}");
    assert!(traj.samples.windows(2).all(|w| w[1].s > w[0].s));
}

/// Off the gauge surface the two u‴ routes extend the field differently, so
/// RK4 stages (which leave the surface at O(Δs²)) give different error
/// constants. Both must still converge to the helix at fourth order.
#[test]
fn closed_form_and_linear_solves_converge_to_the_same_flow() {
    let helix = RieweHelix::new(0.5, 2.0);
    let l = Kawaguchi {
        a: helix.on_constraint_a(),
    };
    let chart = SpacetimeChart::minkowski(4);
    let error = |step: f64, method: U3Method| {
        let traj = integrate_with(&chart, &helix.jet(0.0), &l, &IntegratorConfig::rk4(step, 2.0), method).unwrap();
        helix_sup_error(&helix, traj.samples.iter().map(|s| (s.s, s.jet.x.clone())))
    };
    for method in [U3Method::Kawaguchi, U3Method::Linear] {
        let (coarse, fine) = (error(1e-2, method), error(5e-3, method));
        assert!(coarse / fine > 12.0, "{method:?}: {coarse:e} -> {fine:e}");
        assert!(error(1e-3, method) < 1e-9, "{method:?}");
    }
}

#[test]
fn non_natural_initial_data_are_rejected() {
    let jet = CovariantJet::new(
        vec![0.0; 4],
        DVector::from_vec(vec![2.0, 0.0, 0.0, 0.0]),
        DVector::zeros(4),
        DVector::zeros(4),
    );
    let err = integrate(&SpacetimeChart::minkowski(4), &jet, &Kawaguchi { a: 1.0 }, &IntegratorConfig::rk4(0.1, 1.0));
    assert!(matches!(err, Err(Error::GaugeViolated { .. })));
}

#[test]
fn bad_integrator_config_is_rejected() {
    let helix = RieweHelix::new(0.5, 2.0);
    let cfg = IntegratorConfig::rk4(-1.0, 1.0);
    let err = integrate(&SpacetimeChart::minkowski(4), &helix.jet(0.0), &Kawaguchi { a: 1.0 }, &cfg);
    assert!(matches!(err, Err(Error::InvalidConfig(_))));
}

#[test]
fn runaway_flow_is_truncated_with_partial_samples() {
    // A − 3α > 0 makes deviations from the helix grow exponentially.
    let helix = RieweHelix::new(0.5, 1.0);
    let traj = integrate(
        &SpacetimeChart::minkowski(4),
        &helix.jet(0.0),
        &Kawaguchi { a: 1.0 },
        &IntegratorConfig::rk4(1e-2, 30.0),
    )
    .unwrap();
    assert!(matches!(traj.truncated, Some(Error::GaugeViolated { .. })));
    assert!(traj.samples.len() > 10 && traj.samples.last().unwrap().s < 30.0);
}

#[test]
fn solver_makes_the_euler_poisson_expression_vanish_in_schwarzschild() {
    let chart = SpacetimeChart::schwarzschild(1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let cj = random_coordinate_jet(&chart, &mut rng);
        let mut jet = jet_coordinate_to_covariant(&chart, &cj).unwrap();
        project_natural(&chart.metric(&jet.x).unwrap(), &mut jet).unwrap();
        let local = chart.local(&jet.x).unwrap();
        for (l, method) in [
            (&Kawaguchi { a: 0.7 } as &dyn wk_core::variational::InvariantLagrangian, U3Method::Kawaguchi),
            (&Kawaguchi { a: 0.7 }, U3Method::Linear),
            (&SecondSample { c: 0.1 }, U3Method::Linear),
        ] {
            let u3 = match solve_u3(&local, &jet, l, method, 1e-3) {
                Ok(u3) => u3,
                Err(Error::SingularPrincipal(_)) => continue,
                Err(e) => panic!("{e}"),
            };
            let e = euler_poisson_covariant(&chart, &jet.clone().with_u3(u3), l).unwrap();
            assert!(e.amax() <= 1e-8, "{} {method:?}: {:e}", l.name(), e.amax());
        }
    }
}

#[test]
fn geodesic_spin_vanishes_and_momentum_is_a_u() {
    let chart = SpacetimeChart::schwarzschild(1.0).unwrap();
    let r: f64 = 12.0;
    let ut = 1.0 / (1.0 - 2.0 / r).sqrt();
    let jet = CovariantJet::new(
        vec![0.0, r, 1.0, 0.0],
        DVector::from_vec(vec![ut, 0.0, 0.0, 0.0]),
        DVector::zeros(4),
        DVector::zeros(4),
    );
    let state = dixon_state(&chart, &jet, &Kawaguchi { a: 2.5 }).unwrap();
    assert_eq!(state.s.amax(), 0.0);
    let ul = chart.local(&jet.x).unwrap().lower(&jet.u);
    for (p, u) in state.p.iter().zip(ul.iter()) {
        assert_relative_eq!(*p, 2.5 * u, max_relative = 1e-12, epsilon = 1e-15);
    }
}

#[test]
fn wedge_is_antisymmetric() {
    let a = DVector::from_vec(vec![1.0, 2.0, -0.5]);
    let b = DVector::from_vec(vec![0.3, -1.0, 4.0]);
    let w = wedge(&a, &b);
    assert_eq!((&w + w.transpose()).amax(), 0.0);
    assert_eq!(w, -wedge(&b, &a));
}

#[test]
fn helix_config_round_trips_through_json() {
    let helix: RieweHelix = serde_json::from_str(r#"{"r": 0.5, "omega": 2.0}"#).unwrap();
    assert_eq!(helix, RieweHelix::new(0.5, 2.0));
    assert_relative_eq!(helix.on_constraint_a(), -20.0, max_relative = 1e-14);
    let back: RieweHelix = serde_json::from_str(&serde_json::to_string(&helix).unwrap()).unwrap();
    assert_eq!(back, helix);
    assert!(serde_json::from_str::<RieweHelix>(r#"{"r": 0.5, "omega": 2.0, "b": 1.0}"#).is_err());
}
