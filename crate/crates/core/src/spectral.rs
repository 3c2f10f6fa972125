//! FFT-based spectral operators on uniform periodic grids.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::{Fft, FftPlanner};

use crate::parallel::for_each_chunk_mut;
use crate::{CMatrix, C64};

/// Angular wavenumbers in FFT order for `n` points with spacing `step`.
///
/// For even `n` the Nyquist entry is `−π/step`.
pub fn wavenumbers(n: usize, step: f64) -> Vec<f64> {
    let base = 2.0 * PI / (n as f64 * step);
    (0..n)
        .map(|m| {
            let signed = if m < n.div_ceil(2) {
                m as isize
            } else {
                m as isize - n as isize
            };
            base * signed as f64
        })
        .collect()
}

/// Matrix of `−∂²` on a periodic grid (real symmetric, positive semidefinite).
pub fn neg_second_derivative_matrix(n: usize, step: f64) -> DMatrix<f64> {
    let k = wavenumbers(n, step);
    let offsets: Vec<f64> = (0..n)
        .map(|d| {
            k.iter()
                .map(|&km| km * km * (km * d as f64 * step).cos())
                .sum::<f64>()
                / n as f64
        })
        .collect();
    DMatrix::from_fn(n, n, |a, b| offsets[a.abs_diff(b)])
}

/// Forward/inverse FFT plans for one grid size, applied along matrix axes.
#[derive(Clone)]
pub struct SpectralPlan {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralPlan").field("n", &self.n).finish()
    }
}

impl SpectralPlan {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place unnormalized forward FFT of a contiguous buffer.
    pub fn forward_slice(&self, data: &mut [C64]) {
        self.forward.process(data);
    }

    /// In-place unnormalized inverse FFT of a contiguous buffer.
    pub fn inverse_slice(&self, data: &mut [C64]) {
        self.inverse.process(data);
    }

    /// Applies `multiplier[k]` in Fourier space along axis 0 (down each column).
    pub fn filter_columns(&self, m: &mut CMatrix, multiplier: &[C64]) {
        assert_eq!(m.nrows(), self.n);
        let norm = 1.0 / self.n as f64;
        let fwd = &self.forward;
        let inv = &self.inverse;
        for_each_chunk_mut(m.as_mut_slice(), self.n, |_, col| {
            fwd.process(col);
            for (z, w) in col.iter_mut().zip(multiplier) {
                *z *= w * norm;
            }
            inv.process(col);
        });
    }

    /// Applies `multiplier[k]` in Fourier space along axis 1 (across each row).
    pub fn filter_rows(&self, m: &mut CMatrix, multiplier: &[C64]) {
        let mut t = m.transpose();
        self.filter_columns(&mut t, multiplier);
        *m = t.transpose();
    }

    /// Separable 2-D Fourier multiplier `w(k_row, k_col)` applied to a square matrix.
    pub fn filter_2d<F>(&self, m: &mut CMatrix, weight: F)
    where
        F: Fn(usize, usize) -> C64 + Sync + Send,
    {
        let n = self.n;
        assert_eq!(m.shape(), (n, n));
        let fwd = &self.forward;
        let inv = &self.inverse;
        for_each_chunk_mut(m.as_mut_slice(), n, |_, col| fwd.process(col));
        let mut t = m.transpose();
        for_each_chunk_mut(t.as_mut_slice(), n, |_, row| fwd.process(row));
        // t[(j, i)] now holds the transform at (k_i along axis 0, k_j along axis 1)
        let norm = 1.0 / (n * n) as f64;
        for_each_chunk_mut(t.as_mut_slice(), n, |i, row| {
            for (j, z) in row.iter_mut().enumerate() {
                *z *= weight(i, j) * norm;
            }
            inv.process(row);
        });
        *m = t.transpose();
        for_each_chunk_mut(m.as_mut_slice(), n, |_, col| inv.process(col));
    }
}

/// Spectral first-derivative multiplier `i·k` with the Nyquist mode removed.
pub fn derivative_multiplier(n: usize, step: f64) -> Vec<C64> {
    let mut k = wavenumbers(n, step);
    if n.is_multiple_of(2) {
        k[n / 2] = 0.0;
    }
    k.into_iter().map(|kk| C64::new(0.0, kk)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_derivative_of_band_limited_cosine() {
        let n = 32;
        let step = 2.0 * PI / n as f64;
        let d2 = neg_second_derivative_matrix(n, step);
        let f: Vec<f64> = (0..n).map(|i| (3.0 * i as f64 * step).cos()).collect();
        for a in 0..n {
            let got: f64 = (0..n).map(|b| d2[(a, b)] * f[b]).sum();
            assert!((got - 9.0 * f[a]).abs() < 1e-10);
        }
    }

    #[test]
    fn derivative_along_both_axes() {
        let n = 16;
        let step = 2.0 * PI / n as f64;
        let plan = SpectralPlan::new(n);
        let mut m = CMatrix::from_fn(n, n, |i, j| {
            C64::new((i as f64 * step).sin() * (2.0 * j as f64 * step).cos(), 0.0)
        });
        let orig = m.clone();
        let mult = derivative_multiplier(n, step);
        plan.filter_columns(&mut m, &mult);
        for i in 0..n {
            for j in 0..n {
                let expect = (i as f64 * step).cos() * (2.0 * j as f64 * step).cos();
                assert!((m[(i, j)].re - expect).abs() < 1e-10);
            }
        }
        let mut r = orig.clone();
        plan.filter_rows(&mut r, &mult);
        for i in 0..n {
            for j in 0..n {
                let expect = -2.0 * (i as f64 * step).sin() * (2.0 * j as f64 * step).sin();
                assert!((r[(i, j)].re - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn filter_2d_identity_round_trip() {
        let n = 8;
        let plan = SpectralPlan::new(n);
        let orig = CMatrix::from_fn(n, n, |i, j| {
            C64::new(i as f64 - 0.3 * j as f64, (i * j) as f64 * 0.1)
        });
        let mut m = orig.clone();
        plan.filter_2d(&mut m, |_, _| C64::new(1.0, 0.0));
        assert!(crate::linalg::max_abs_diff(&m, &orig) < 1e-12);
    }
}
