use std::ops::{Add, Div, Mul, Neg, Sub};

/// Truncated Taylor series `c0 + c1 t + c2 t²` in the curve parameter.
///
/// Used to push scalar functions of the invariants along a jet: evaluating a
/// Lagrangian partial on the series of (γ, β, α) yields its first and second
/// parameter derivatives without hand-written chain rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Series(pub [f64; 3]);

impl Series {
    pub fn constant(v: f64) -> Self {
        Series([v, 0.0, 0.0])
    }

    pub fn value(&self) -> f64 {
        self.0[0]
    }

    /// k-th parameter derivative at t = 0.
    pub fn derivative(&self, k: usize) -> f64 {
        match k {
            0 => self.0[0],
            1 => self.0[1],
            2 => 2.0 * self.0[2],
            _ => panic!("series is truncated at second order"),
        }
    }

    pub fn powf(self, p: f64) -> Self {
        let [g0, g1, g2] = self.0;
        let f0 = g0.powf(p);
        // k g0 f_k = Σ_{j=1..k} (p j − (k − j)) g_j f_{k−j}
        let f1 = p * g1 * f0 / g0;
        let f2 = ((p - 1.0) * g1 * f1 + 2.0 * p * g2 * f0) / (2.0 * g0);
        Series([f0, f1, f2])
    }

    pub fn recip(self) -> Self {
        self.powf(-1.0)
    }
}

impl From<f64> for Series {
    fn from(v: f64) -> Self {
        Series::constant(v)
    }
}

impl Add for Series {
    type Output = Series;
    fn add(self, o: Series) -> Series {
        Series([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Series {
    type Output = Series;
    fn sub(self, o: Series) -> Series {
        Series([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Series {
    type Output = Series;
    fn neg(self) -> Series {
        Series([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Mul for Series {
    type Output = Series;
    fn mul(self, o: Series) -> Series {
        let [a0, a1, a2] = self.0;
        let [b0, b1, b2] = o.0;
        Series([a0 * b0, a0 * b1 + a1 * b0, a0 * b2 + a1 * b1 + a2 * b0])
    }
}

impl Mul<Series> for f64 {
    type Output = Series;
    fn mul(self, o: Series) -> Series {
        Series([self * o.0[0], self * o.0[1], self * o.0[2]])
    }
}

impl Add<f64> for Series {
    type Output = Series;
    fn add(self, o: f64) -> Series {
        Series([self.0[0] + o, self.0[1], self.0[2]])
    }
}

// Division is multiplication by the reciprocal series.
#[allow(clippy::suspicious_arithmetic_impl)]
impl Div for Series {
    type Output = Series;
    fn div(self, o: Series) -> Series {
        self * o.recip()
    }
}
