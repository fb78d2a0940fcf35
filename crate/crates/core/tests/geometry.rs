use approx::assert_relative_eq;
use nalgebra::DVector;
use proptest::prelude::*;
use wk_core::geometry::{ChartSpec, SpacetimeChart};
use wk_core::Error;

fn schwarzschild_point() -> impl Strategy<Value = Vec<f64>> {
    (0.0..10.0_f64, 3.0..30.0_f64, 0.3..2.8_f64, 0.0..6.2_f64).prop_map(|(t, r, th, ph)| vec![t, r, th, ph])
}

fn vector() -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-2.0..2.0_f64, 4).prop_map(DVector::from_vec)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn raise_inverts_lower(x in schwarzschild_point(), v in vector()) {
        let local = SpacetimeChart::schwarzschild(1.0).unwrap().local(&x).unwrap();
        let back = local.raise(&local.lower(&v));
        prop_assert!((back - &v).amax() <= 1e-12 * v.amax().max(1.0));
    }

    #[test]
    fn christoffel_symbols_are_symmetric(x in schwarzschild_point()) {
        let local = SpacetimeChart::schwarzschild(1.0).unwrap().local(&x).unwrap();
        let (a, b) = (DVector::from_vec(vec![1.0, 0.3, -0.2, 0.1]), DVector::from_vec(vec![0.4, -1.0, 0.5, 0.2]));
        let ab = local.chris.contract(&a, &b);
        let ba = local.chris.contract(&b, &a);
        prop_assert!((ab - ba).amax() <= 1e-14);
    }

    #[test]
    fn inner_product_is_symmetric_and_signed(x in schwarzschild_point(), a in vector(), b in vector()) {
        let local = SpacetimeChart::schwarzschild(1.0).unwrap().local(&x).unwrap();
        prop_assert!((local.inner(&a, &b) - local.inner(&b, &a)).abs() <= 1e-12);
        let time = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        prop_assert!(local.inner(&time, &time) > 0.0);
    }
}

#[test]
fn schwarzschild_radial_acceleration_of_a_static_observer() {
    // Γ^r_tt = M (r − 2M) / r³
    let (m, r) = (1.0, 7.0);
    let local = SpacetimeChart::schwarzschild(m).unwrap().local(&[0.0, r, 1.0, 0.0]).unwrap();
    let t = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
    let acc = local.chris.contract(&t, &t);
    assert_relative_eq!(acc[1], m * (r - 2.0 * m) / r.powi(3), max_relative = 1e-12);
}

#[test]
fn de_sitter_has_constant_curvature() {
    // R_kmn^l = −H² (g_kn δ^l_m − g_mn δ^l_k)
    let h = 0.1;
    let chart = SpacetimeChart::de_sitter(h).unwrap();
    for x in [[0.0, 1.0, 1.2, 0.3], [2.0, 5.0, 0.7, 4.0]] {
        let local = chart.local(&x).unwrap();
        let g = &local.g;
        let delta = |a: usize, b: usize| f64::from(u8::from(a == b));
        for ([k, m, n, l], v) in local.curvature.riemann.indexed() {
            let exact = -h * h * (g[(k, n)] * delta(l, m) - g[(m, n)] * delta(l, k));
            assert!((v - exact).abs() <= 1e-10, "R[{k}{m}{n}{l}] = {v} vs {exact}");
        }
    }
}

#[test]
fn points_inside_the_horizon_are_out_of_chart() {
    let chart = SpacetimeChart::schwarzschild(1.0).unwrap();
    assert!(matches!(chart.local(&[0.0, 1.5, 1.0, 0.0]), Err(Error::OutOfChart { .. })));
}

#[test]
fn chart_spec_parses_and_rejects_unknown_parameters() {
    let spec: ChartSpec = serde_json::from_str(r#"{"metric": "schwarzschild", "params": {"M": 2.0}}"#).unwrap();
    assert_eq!(spec.build().unwrap().dim(), 4);
    let spec: ChartSpec = serde_json::from_str(r#"{"metric": "desitter", "params": {"M": 2.0}}"#).unwrap();
    assert!(matches!(spec.build(), Err(Error::InvalidConfig(_))));
    assert!(serde_json::from_str::<ChartSpec>(r#"{"metric": "minkowski", "colour": 1}"#).is_err());
}

#[test]
fn numeric_mode_agrees_with_analytic() {
    let spec: ChartSpec =
        serde_json::from_str(r#"{"metric": "schwarzschild", "params": {"M": 1.0}, "derivative_mode": "numeric"}"#).unwrap();
    let numeric = spec.build().unwrap();
    let analytic = SpacetimeChart::schwarzschild(1.0).unwrap();
    let x = [0.0, 8.0, 1.1, 0.4];
    let (a, b) = (DVector::from_vec(vec![1.0, 0.2, 0.1, 0.05]), DVector::from_vec(vec![0.3, 1.0, -0.2, 0.1]));
    let gn = numeric.local(&x).unwrap().chris.contract(&a, &b);
    let ga = analytic.local(&x).unwrap().chris.contract(&a, &b);
    assert!((gn - ga).amax() < 1e-6);
}
