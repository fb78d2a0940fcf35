use std::ops::{Index, IndexMut};

/// Dense rank-`R` array over a fixed dimension, stored row-major.
///
/// Index placement is fixed by the producing operation; see the field docs of
/// [`crate::geometry::MetricJet`], [`crate::geometry::Christoffel`] and
/// [`crate::geometry::Curvature`].
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<const R: usize> {
    dim: usize,
    data: Vec<f64>,
}

impl<const R: usize> Tensor<R> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim.pow(R as u32)],
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut([usize; R]) -> f64) -> Self {
        let mut t = Self::zeros(dim);
        for flat in 0..t.data.len() {
            let idx = t.unflatten(flat);
            t.data[flat] = f(idx);
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Iterates over `(index, value)` pairs in row-major order.
    pub fn indexed(&self) -> impl Iterator<Item = ([usize; R], f64)> + '_ {
        (0..self.data.len()).map(move |flat| (self.unflatten(flat), self.data[flat]))
    }

    fn offset(&self, idx: [usize; R]) -> usize {
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.dim);
            acc * self.dim + i
        })
    }

    fn unflatten(&self, mut flat: usize) -> [usize; R] {
        let mut idx = [0; R];
        for slot in idx.iter_mut().rev() {
            *slot = flat % self.dim;
            flat /= self.dim;
        }
        idx
    }
}

impl<const R: usize> Index<[usize; R]> for Tensor<R> {
    type Output = f64;
    fn index(&self, idx: [usize; R]) -> &f64 {
        &self.data[self.offset(idx)]
    }
}

impl<const R: usize> IndexMut<[usize; R]> for Tensor<R> {
    fn index_mut(&mut self, idx: [usize; R]) -> &mut f64 {
        let o = self.offset(idx);
        &mut self.data[o]
    }
}

pub type Tensor3 = Tensor<3>;
pub type Tensor4 = Tensor<4>;
pub type Tensor5 = Tensor<5>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_major_layout() {
        let t = Tensor3::from_fn(3, |[a, b, c]| (100 * a + 10 * b + c) as f64);
        assert_eq!(t[[1, 2, 0]], 120.0);
        assert_eq!(t.as_slice()[1 * 9 + 2 * 3], 120.0);
        let collected: Vec<_> = t.indexed().take(4).map(|(i, _)| i).collect();
        assert_eq!(collected, vec![[0, 0, 0], [0, 0, 1], [0, 0, 2], [0, 1, 0]]);
    }
}
