//! Finite-difference stencils shared by the numeric metric mode and the
//! brute-force oracles. All helpers work on vector-valued functions of one
//! real variable; callers build partial derivatives by shifting one input.

fn combine(terms: &[(f64, &[f64])], scale: f64) -> Vec<f64> {
    let n = terms[0].1.len();
    (0..n)
        .map(|i| terms.iter().map(|(c, v)| c * v[i]).sum::<f64>() * scale)
        .collect()
}

/// Two-point central difference `[f(x+h) - f(x-h)] / 2h`.
pub fn central(f: &mut impl FnMut(f64) -> Vec<f64>, x: f64, h: f64) -> Vec<f64> {
    let fp = f(x + h);
    let fm = f(x - h);
    combine(&[(1.0, &fp), (-1.0, &fm)], 0.5 / h)
}

/// Central difference with one Richardson level, `(4 D(h/2) - D(h)) / 3`,
/// accurate to O(h^4).
pub fn central_richardson(f: &mut impl FnMut(f64) -> Vec<f64>, x: f64, h: f64) -> Vec<f64> {
    let coarse = central(f, x, h);
    let fine = central(f, x, 0.5 * h);
    combine(&[(4.0, &fine), (-1.0, &coarse)], 1.0 / 3.0)
}

/// Five-point first-derivative stencil, O(h^4).
pub fn five_point_first(f: &mut impl FnMut(f64) -> Vec<f64>, x: f64, h: f64) -> Vec<f64> {
    let m2 = f(x - 2.0 * h);
    let m1 = f(x - h);
    let p1 = f(x + h);
    let p2 = f(x + 2.0 * h);
    combine(
        &[(1.0, &m2), (-8.0, &m1), (8.0, &p1), (-1.0, &p2)],
        1.0 / (12.0 * h),
    )
}

/// Five-point second-derivative stencil, O(h^4).
pub fn five_point_second(f: &mut impl FnMut(f64) -> Vec<f64>, x: f64, h: f64) -> Vec<f64> {
    let m2 = f(x - 2.0 * h);
    let m1 = f(x - h);
    let c = f(x);
    let p1 = f(x + h);
    let p2 = f(x + 2.0 * h);
    combine(
        &[(-1.0, &m2), (16.0, &m1), (-30.0, &c), (16.0, &p1), (-1.0, &p2)],
        1.0 / (12.0 * h * h),
    )
}

/// Richardson-extrapolated five-point estimate together with the max-abs
/// disagreement between the step-`h` and step-`h/2` results, relative to the
/// magnitude of the estimate (floored at 1).
pub fn five_point_checked(
    f: &mut impl FnMut(f64) -> Vec<f64>,
    x: f64,
    h: f64,
    order: usize,
) -> (Vec<f64>, f64) {
    let stencil = |f: &mut dyn FnMut(f64) -> Vec<f64>, h: f64| {
        let mut g = |t: f64| f(t);
        match order {
            1 => five_point_first(&mut g, x, h),
            2 => five_point_second(&mut g, x, h),
            _ => panic!("five-point stencils cover first and second derivatives only"),
        }
    };
    let coarse = stencil(f, h);
    let fine = stencil(f, 0.5 * h);
    let est = combine(&[(16.0, &fine), (-1.0, &coarse)], 1.0 / 15.0);
    let scale = est.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let gap = fine
        .iter()
        .zip(&coarse)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    (est, gap / scale)
}

/// Gradient of a scalar function of several variables by
/// [`central_richardson`], with per-coordinate step `h * max(1, |x_i|)`.
pub fn gradient(f: &mut impl FnMut(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut work = x.to_vec();
    (0..x.len())
        .map(|i| {
            let step = h * x[i].abs().max(1.0);
            let mut g = |t: f64| {
                work[i] = t;
                let v = f(&work);
                work[i] = x[i];
                vec![v]
            };
            central_richardson(&mut g, x[i], step)[0]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_on_polynomials() {
        let mut f = |t: f64| vec![t.powi(4), t.sin()];
        let d = five_point_first(&mut f, 0.7, 1e-2);
        assert!((d[0] - 4.0 * 0.7_f64.powi(3)).abs() < 1e-9);
        assert!((d[1] - 0.7_f64.cos()).abs() < 1e-9);
        let d2 = five_point_second(&mut f, 0.7, 1e-2);
        assert!((d2[0] - 12.0 * 0.49).abs() < 1e-7);
        let (d1, gap) = five_point_checked(&mut f, 0.7, 1e-2, 1);
        assert!((d1[1] - 0.7_f64.cos()).abs() < 1e-12);
        assert!(gap < 1e-8);
    }

    #[test]
    fn richardson_gradient() {
        let mut f = |x: &[f64]| x[0] * x[0] * x[1] + x[1].exp();
        let g = gradient(&mut f, &[1.5, -0.5], 1e-4);
        assert!((g[0] - 2.0 * 1.5 * -0.5).abs() < 1e-10);
        assert!((g[1] - (2.25 + (-0.5_f64).exp())).abs() < 1e-10);
    }
}
