use approx::assert_relative_eq;
use nalgebra::DVector;
use proptest::prelude::*;
use wk_core::geometry::SpacetimeChart;
use wk_core::variational::{
    euler_poisson_covariant, invariants, momenta_general, momenta_kawaguchi, reconstruction_residual, CovariantJet,
    InvariantLagrangian, Kawaguchi, LagrangianSpec, SecondSample,
};

/// Timelike jet at an exterior Schwarzschild point with arbitrary higher
/// derivatives.
fn schwarzschild_jet() -> impl Strategy<Value = CovariantJet> {
    let v = || prop::collection::vec(-0.5..0.5_f64, 4);
    (6.0..25.0_f64, 0.5..2.6_f64, v(), v(), v(), v()).prop_map(|(r, th, du, u1, u2, u3)| {
        let ut = 1.0 / (1.0 - 2.0 / r).sqrt();
        // orthonormal-frame spatial parts of size ≤ 0.1 against u^t̂ = 1.5
        let scale = [1.5 * ut, (1.0 - 2.0 / r).sqrt(), 1.0 / r, 1.0 / (r * th.sin())];
        let u = DVector::from_fn(4, |i, _| if i == 0 { scale[0] } else { 0.2 * du[i] * scale[i] });
        CovariantJet::new(vec![0.0, r, th, 0.3], u, DVector::from_vec(u1), DVector::from_vec(u2))
            .with_u3(DVector::from_vec(u3))
    })
}

fn lagrangians() -> [Box<dyn InvariantLagrangian>; 2] {
    [Box::new(Kawaguchi { a: 1.3 }), Box::new(SecondSample { c: 0.1 })]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Under ξ ↦ ξ/λ the invariants scale as (λ², λ³, λ⁴) and L as λ.
    #[test]
    fn lagrangians_are_homogeneous_of_degree_one(
        gamma in 0.2..3.0_f64, beta in -1.0..1.0_f64, alpha in -2.0..2.0_f64, lambda in 0.3..3.0_f64,
    ) {
        for l in lagrangians() {
            let base = l.value(gamma, beta, alpha);
            let scaled = l.value(lambda.powi(2) * gamma, lambda.powi(3) * beta, lambda.powi(4) * alpha);
            prop_assert!((scaled - lambda * base).abs() <= 1e-10 * base.abs().max(1.0) * lambda);
        }
    }

    #[test]
    fn closed_form_momenta_match_the_general_construction(jet in schwarzschild_jet()) {
        let chart = SpacetimeChart::schwarzschild(1.0).unwrap();
        let closed = momenta_kawaguchi(&chart, &jet, 1.3).unwrap();
        let general = momenta_general(&chart, &jet, &Kawaguchi { a: 1.3 }).unwrap();
        for (a, b) in [(&closed.pi, &general.pi), (&closed.pi1, &general.pi1), (&closed.pi1_prime, &general.pi1_prime)] {
            prop_assert!((a - b).amax() <= 1e-10 * b.amax().max(1.0));
        }
    }

    #[test]
    fn momenta_reconstruct_the_lagrangian_partials(jet in schwarzschild_jet()) {
        let chart = SpacetimeChart::schwarzschild(1.0).unwrap();
        let local = chart.local(&jet.x).unwrap();
        for l in lagrangians() {
            let m = momenta_general(&chart, &jet, l.as_ref()).unwrap();
            let r = reconstruction_residual(&local, &jet, l.as_ref(), &m).unwrap();
            prop_assert!(r.amax() <= 1e-10 * m.pi.amax().max(1.0));
        }
    }

    /// ⟨E, u⟩ vanishes for any u‴: reparametrization carries no dynamics.
    #[test]
    fn euler_poisson_is_orthogonal_to_the_velocity(jet in schwarzschild_jet()) {
        let chart = SpacetimeChart::schwarzschild(1.0).unwrap();
        for l in lagrangians() {
            let e = euler_poisson_covariant(&chart, &jet, l.as_ref()).unwrap();
            let u_norm = jet.u.amax();
            prop_assert!(e.dot(&jet.u).abs() <= 1e-8 * e.norm().max(1e-12) * u_norm * 4.0);
        }
    }
}

#[test]
fn natural_gauge_k2_is_alpha() {
    let chart = SpacetimeChart::minkowski(4);
    let jet = CovariantJet::new(
        vec![0.0; 4],
        DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]),
        DVector::from_vec(vec![0.0, 0.6, 0.8, 0.0]),
        DVector::zeros(4),
    );
    let inv = invariants(&chart, &jet).unwrap();
    assert_relative_eq!(inv.alpha, -1.0, max_relative = 1e-15);
    let l = Kawaguchi { a: 2.0 };
    assert_relative_eq!(l.value(inv.gamma, inv.beta, inv.alpha), inv.alpha + 2.0, max_relative = 1e-15);
}

#[test]
fn lagrangian_spec_json() {
    let k: LagrangianSpec = serde_json::from_str(r#"{"lagrangian": "kawaguchi", "A": 1.0}"#).unwrap();
    assert_eq!(k, LagrangianSpec::Kawaguchi { a: 1.0 });
    let t: LagrangianSpec = serde_json::from_str(r#"{"lagrangian": "test2"}"#).unwrap();
    assert_eq!(t, LagrangianSpec::SecondSample { c: 0.1 });
    assert!(serde_json::from_str::<LagrangianSpec>(r#"{"lagrangian": "kawaguchi", "A": 1.0, "B": 2}"#).is_err());
    assert_eq!(k.build().kawaguchi_a(), Some(1.0));
    assert_eq!(t.build().kawaguchi_a(), None);
}
