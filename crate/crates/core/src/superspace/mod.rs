//! Phase space ↔ superspace transforms and the trace/moment functionals.
//!
//! A phase-space density `ρ(x,p)` is normalized as `∫∫ρ dx dp / 2πħ = 1`.
//! Its superspace image is
//!
//! ```text
//! ρ(x,y) = (1/2πħ) ∫ dp e^{ipy/ħ} ρ(x,p),    ρ(Q,q) = ρ((Q+q)/2, Q−q)
//! ```
//!
//! On a [`SuperGrid`] with spacing `h`, the points `(Qᵢ, qⱼ)` map to
//! `x_{i+j} = Q₀ + (i+j)h/2` and `y_{i−j} = (i−j)h`, so the matching
//! [`PhaseGrid`] has `Δx = h/2` and the Fourier-reciprocal
//! `Δp = 2πħ/(n_p h)`. No interpolation is involved.

mod io;
mod transform;

pub use transform::{phase_to_super, super_to_phase};

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::linalg::{hermiticity_deviation, HermitianEigen};
use crate::spectral::{derivative_multiplier, SpectralPlan};
use crate::{CMatrix, Error, Result, C64};

/// Hermiticity tolerance (relative to the largest entry) for moment and
/// transform inputs.
pub const HERMITICITY_TOL: f64 = 1e-6;

/// Uniform periodic grid shared by the `Q` and `q` axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperGrid {
    pub q_min: f64,
    pub step: f64,
    pub n: usize,
}

impl SuperGrid {
    /// `n` points on `[q_min, q_max)`.
    pub fn new(q_min: f64, q_max: f64, n: usize) -> Result<Self> {
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::GridMismatch(format!(
                "grid size must be even and ≥ 2, got {n}"
            )));
        }
        if !(q_max > q_min) || !q_min.is_finite() || !q_max.is_finite() {
            return Err(Error::GridMismatch(format!(
                "invalid extent [{q_min}, {q_max})"
            )));
        }
        Ok(Self {
            q_min,
            step: (q_max - q_min) / n as f64,
            n,
        })
    }

    /// `n` points on `[−half_width, half_width)`.
    pub fn centered(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n)
    }

    pub fn q_max(&self) -> f64 {
        self.q_min + self.n as f64 * self.step
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn point(&self, i: usize) -> f64 {
        self.q_min + i as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    pub(crate) fn same_as(&self, other: &SuperGrid) -> bool {
        self.n == other.n
            && (self.step - other.step).abs() <= 1e-12 * self.step
            && (self.q_min - other.q_min).abs() <= 1e-12 * (1.0 + self.q_min.abs())
    }
}

/// Phase-space grid reciprocal to a [`SuperGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub x_min: f64,
    pub dx: f64,
    pub n_x: usize,
    pub p_min: f64,
    pub dp: f64,
    pub n_p: usize,
    pub hbar: f64,
}

impl PhaseGrid {
    /// The phase grid matching `grid`: `n_x = n_p = 2n`, `Δx = h/2`,
    /// `Δp = 2πħ/(n_p h)`, momenta centred on `p_center`.
    ///
    /// The last `x` row (`s = 2n − 1`) has no superspace partner and is
    /// left at zero by [`super_to_phase`].
    pub fn for_super(grid: &SuperGrid, hbar: f64, p_center: f64) -> Self {
        let n_p = 2 * grid.n;
        let dp = 2.0 * PI * hbar / (n_p as f64 * grid.step);
        Self {
            x_min: grid.q_min,
            dx: 0.5 * grid.step,
            n_x: 2 * grid.n,
            p_min: p_center - (n_p / 2) as f64 * dp,
            dp,
            n_p,
            hbar,
        }
    }

    pub fn x(&self, s: usize) -> f64 {
        self.x_min + s as f64 * self.dx
    }

    pub fn p(&self, m: usize) -> f64 {
        self.p_min + m as f64 * self.dp
    }

    /// The superspace grid whose diagonal/antidiagonal lattice this grid
    /// resolves, after checking `Δp·Δy = 2πħ/n_p` with `Δy = 2Δx`.
    pub fn super_grid(&self) -> Result<SuperGrid> {
        if !self.n_x.is_multiple_of(2) || self.n_x < 4 {
            return Err(Error::GridMismatch(format!(
                "n_x must be even and ≥ 4, got {}",
                self.n_x
            )));
        }
        if self.n_p != self.n_x {
            return Err(Error::GridMismatch(format!(
                "n_p = {} must equal n_x = {} to cover every y = Q − q",
                self.n_p, self.n_x
            )));
        }
        let reciprocity = self.dp * 2.0 * self.dx * self.n_p as f64 / (2.0 * PI * self.hbar);
        if (reciprocity - 1.0).abs() > 1e-10 {
            return Err(Error::GridMismatch(format!(
                "Δp·Δy·n_p/2πħ = {reciprocity} instead of 1"
            )));
        }
        Ok(SuperGrid {
            q_min: self.x_min,
            step: 2.0 * self.dx,
            n: self.n_x / 2,
        })
    }
}

/// Real phase-space density sampled at `(x_s, p_m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDensity {
    pub grid: PhaseGrid,
    pub values: DMatrix<f64>,
}

/// Phase-space moments, all weighted by `Δx Δp / 2πħ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseMoments {
    pub norm: f64,
    pub x: f64,
    pub p: f64,
    pub xp: f64,
    pub x2: f64,
    pub p2: f64,
}

impl PhaseDensity {
    /// `2πħ · N(x; x0, σx) · N(p; p0, σp)`, normalized to 1.
    pub fn gaussian(grid: PhaseGrid, x0: f64, p0: f64, sigma_x: f64, sigma_p: f64) -> Self {
        let gx = |x: f64| {
            (-(x - x0).powi(2) / (2.0 * sigma_x * sigma_x)).exp() / (sigma_x * (2.0 * PI).sqrt())
        };
        let gp = |p: f64| {
            (-(p - p0).powi(2) / (2.0 * sigma_p * sigma_p)).exp() / (sigma_p * (2.0 * PI).sqrt())
        };
        let values = DMatrix::from_fn(grid.n_x, grid.n_p, |s, m| {
            2.0 * PI * grid.hbar * gx(grid.x(s)) * gp(grid.p(m))
        });
        Self { grid, values }
    }

    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: PhaseGrid, f: F) -> Self {
        let values = DMatrix::from_fn(grid.n_x, grid.n_p, |s, m| f(grid.x(s), grid.p(m)));
        Self { grid, values }
    }

    pub fn moments(&self) -> PhaseMoments {
        let g = &self.grid;
        let w = g.dx * g.dp / (2.0 * PI * g.hbar);
        let mut m = PhaseMoments {
            norm: 0.0,
            x: 0.0,
            p: 0.0,
            xp: 0.0,
            x2: 0.0,
            p2: 0.0,
        };
        for s in 0..g.n_x {
            let x = g.x(s);
            for k in 0..g.n_p {
                let p = g.p(k);
                let r = self.values[(s, k)] * w;
                m.norm += r;
                m.x += x * r;
                m.p += p * r;
                m.xp += x * p * r;
                m.x2 += x * x * r;
                m.p2 += p * p * r;
            }
        }
        m
    }
}

/// Complex density matrix `ρ(Qᵢ, qⱼ)` on a [`SuperGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SuperDensity {
    pub grid: SuperGrid,
    pub hbar: f64,
    pub mass: f64,
    pub values: CMatrix,
}

impl SuperDensity {
    pub fn new(grid: SuperGrid, hbar: f64, mass: f64, values: CMatrix) -> Result<Self> {
        if values.shape() != (grid.n, grid.n) {
            return Err(Error::GridMismatch(format!(
                "values are {:?}, grid is {}×{}",
                values.shape(),
                grid.n,
                grid.n
            )));
        }
        Ok(Self {
            grid,
            hbar,
            mass,
            values,
        })
    }

    pub fn zeros(grid: SuperGrid, hbar: f64, mass: f64) -> Self {
        Self {
            grid,
            hbar,
            mass,
            values: CMatrix::zeros(grid.n, grid.n),
        }
    }

    /// `ψ(Q) conj ψ(q)` with `ψ` normalized on the grid.
    pub fn pure<F: Fn(f64) -> C64>(grid: SuperGrid, hbar: f64, mass: f64, psi: F) -> Self {
        let v: Vec<C64> = grid.points().into_iter().map(psi).collect();
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.step;
        let values = CMatrix::from_fn(grid.n, grid.n, |i, j| v[i] * v[j].conj() / norm);
        Self {
            grid,
            hbar,
            mass,
            values,
        }
    }

    /// Analytic image of the phase-space Gaussian
    /// `2πħ N(x; x0, σx) N(p; p0, σp)`:
    /// `N(x; x0, σx) · exp(i p0 y/ħ − σp² y²/2ħ²)` at `x = (Q+q)/2`, `y = Q−q`.
    pub fn classical_gaussian(
        grid: SuperGrid,
        hbar: f64,
        mass: f64,
        x0: f64,
        p0: f64,
        sigma_x: f64,
        sigma_p: f64,
    ) -> Self {
        let values = CMatrix::from_fn(grid.n, grid.n, |i, j| {
            let (qq, q) = (grid.point(i), grid.point(j));
            let x = 0.5 * (qq + q);
            let y = qq - q;
            let nx = (-(x - x0).powi(2) / (2.0 * sigma_x * sigma_x)).exp()
                / (sigma_x * (2.0 * PI).sqrt());
            let env = (-(sigma_p * y / hbar).powi(2) / 2.0).exp();
            C64::from_polar(nx * env, p0 * y / hbar)
        });
        Self {
            grid,
            hbar,
            mass,
            values,
        }
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        hermiticity_deviation(&self.values)
    }

    /// Errors with `HermiticityViolation` when the deviation exceeds
    /// `tol · (1 + max|ρ|)`.
    pub fn check_hermitian(&self, tol: f64) -> Result<()> {
        let deviation = self.hermiticity_deviation();
        let scale = 1.0 + crate::linalg::max_abs(&self.values);
        if deviation > tol * scale {
            return Err(Error::HermiticityViolation {
                deviation,
                tolerance: tol * scale,
            });
        }
        Ok(())
    }

    pub fn trace_complex(&self) -> C64 {
        self.values.diagonal().iter().sum::<C64>() * self.grid.step
    }

    /// `Σᵢ ρ(Qᵢ,Qᵢ) h` (real part).
    pub fn trace(&self) -> f64 {
        self.trace_complex().re
    }

    /// `Tr ρ² = Σᵢⱼ |ρᵢⱼ|² h²` for Hermitian `ρ`.
    pub fn purity(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.step * self.grid.step
    }

    /// Diagonal weight carried by the outermost `width` points on each side.
    pub fn boundary_mass(&self, width: usize) -> f64 {
        let n = self.grid.n;
        let w = width.min(n / 2);
        let d = self.values.diagonal();
        (0..w).chain(n - w..n).map(|i| d[i].norm()).sum::<f64>() * self.grid.step
    }

    fn diagonal_functional(&self, f: impl Fn(usize) -> C64) -> f64 {
        (0..self.grid.n).map(f).sum::<C64>().re * self.grid.step
    }

    /// `P̂ρ = −(iħ/2)(∂_Q − ∂_q)ρ` by spectral differentiation.
    pub fn apply_p(&self) -> CMatrix {
        let n = self.grid.n;
        let plan = SpectralPlan::new(n);
        let d = derivative_multiplier(n, self.grid.step);
        let factor = C64::new(0.0, -0.5 * self.hbar);
        let mut out = self.values.clone();
        plan.filter_2d(&mut out, |i, j| factor * (d[i] - d[j]));
        out
    }

    pub fn expect_x(&self) -> Result<f64> {
        self.check_hermitian(HERMITICITY_TOL)?;
        Ok(self.diagonal_functional(|i| self.grid.point(i) * self.values[(i, i)]))
    }

    pub fn expect_x2(&self) -> Result<f64> {
        self.check_hermitian(HERMITICITY_TOL)?;
        Ok(self.diagonal_functional(|i| self.grid.point(i).powi(2) * self.values[(i, i)]))
    }

    pub fn expect_p(&self) -> Result<f64> {
        self.check_hermitian(HERMITICITY_TOL)?;
        let p = self.apply_p();
        Ok(self.diagonal_functional(|i| p[(i, i)]))
    }

    pub fn expect_p2(&self) -> Result<f64> {
        self.check_hermitian(HERMITICITY_TOL)?;
        let once = Self {
            values: self.apply_p(),
            ..*self
        };
        let twice = once.apply_p();
        Ok(self.diagonal_functional(|i| twice[(i, i)]))
    }

    /// `½ Tr((X̂P̂ + P̂X̂)ρ)`. `X̂ = (Q+q)/2` and `P̂` commute on superspace,
    /// so the symmetrized product reduces to `X̂P̂`.
    pub fn expect_xp_weyl(&self) -> Result<f64> {
        self.check_hermitian(HERMITICITY_TOL)?;
        let p = self.apply_p();
        Ok(self.diagonal_functional(|i| self.grid.point(i) * p[(i, i)]))
    }

    /// Eigenvalues of the discretized operator `ρ h`, descending.
    /// Negative values are reported, never clipped.
    pub fn spectrum_report(&self) -> Result<Vec<f64>> {
        self.check_hermitian(HERMITICITY_TOL)?;
        let sym = (&self.values + self.values.adjoint()) * C64::new(0.5 * self.grid.step, 0.0);
        let mut values = HermitianEigen::new(&sym)?.values;
        values.reverse();
        Ok(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid() -> SuperGrid {
        SuperGrid::centered(12.0, 192).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(SuperGrid::new(0.0, 1.0, 7).is_err());
        assert!(SuperGrid::new(1.0, 0.0, 8).is_err());
        let g = SuperGrid::new(-1.0, 1.0, 8).unwrap();
        assert_eq!(g.step, 0.25);
        assert_eq!(g.q_max(), 1.0);
        let pg = PhaseGrid::for_super(&g, 1.0, 0.0);
        assert!(pg.super_grid().unwrap().same_as(&g));
        let bad = PhaseGrid {
            dp: pg.dp * 1.01,
            ..pg
        };
        assert!(matches!(bad.super_grid(), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn gaussian_moments_in_superspace() {
        let rho = SuperDensity::classical_gaussian(grid(), 1.0, 1.0, 1.5, -0.5, 0.7, 0.6);
        assert!((rho.trace() - 1.0).abs() < 1e-6);
        assert!((rho.expect_x().unwrap() - 1.5).abs() < 1e-4);
        assert!((rho.expect_p().unwrap() + 0.5).abs() < 1e-4);
        assert!((rho.expect_xp_weyl().unwrap() + 0.75).abs() < 1e-4);
        assert!((rho.expect_x2().unwrap() - (1.5f64.powi(2) + 0.49)).abs() < 1e-4);
        assert!((rho.expect_p2().unwrap() - (0.25 + 0.36)).abs() < 1e-4);
    }

    #[test]
    fn symmetric_density_has_zero_moments() {
        let rho = SuperDensity::classical_gaussian(grid(), 1.0, 1.0, 0.0, 0.0, 0.8, 0.9);
        assert!(rho.expect_x().unwrap().abs() < 1e-12);
        assert!(rho.expect_p().unwrap().abs() < 1e-12);
    }

    #[test]
    fn zero_density() {
        let rho = SuperDensity::zeros(grid(), 1.0, 1.0);
        assert_eq!(rho.trace(), 0.0);
        assert!(rho
            .spectrum_report()
            .unwrap()
            .iter()
            .all(|&v| v.abs() < 1e-14));
    }

    #[test]
    fn pure_state_spectrum_is_rank_one() {
        let g = SuperGrid::centered(8.0, 64).unwrap();
        let rho = SuperDensity::pure(g, 1.0, 1.0, |x| {
            C64::from_polar((-(x - 0.5).powi(2) / 2.0).exp(), 0.3 * x)
        });
        let spec = rho.spectrum_report().unwrap();
        assert!((spec[0] - 1.0).abs() < 1e-10);
        assert!(spec[1..].iter().all(|v| v.abs() < 1e-10));
        assert!((spec.iter().sum::<f64>() - rho.trace()).abs() < 1e-8);
        assert!((rho.purity() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sharp_classical_double_peak_has_negative_eigenvalue() {
        let g = SuperGrid::centered(8.0, 64).unwrap();
        let a = SuperDensity::classical_gaussian(g, 1.0, 1.0, -2.0, 1.0, 0.2, 0.2);
        let b = SuperDensity::classical_gaussian(g, 1.0, 1.0, 2.0, -1.0, 0.2, 0.2);
        let rho = SuperDensity {
            values: (a.values + b.values) * C64::new(0.5, 0.0),
            ..a
        };
        let spec = rho.spectrum_report().unwrap();
        assert!(*spec.last().unwrap() < -1e-3);
        assert!((spec.iter().sum::<f64>() - rho.trace()).abs() < 1e-8);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut rho = SuperDensity::classical_gaussian(grid(), 1.0, 1.0, 0.0, 0.0, 1.0, 1.0);
        rho.values[(3, 5)] += C64::new(0.1, 0.0);
        assert!(matches!(
            rho.expect_x(),
            Err(Error::HermiticityViolation { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn trace_is_linear(alpha in -3.0..3.0f64, x0 in -2.0..2.0f64) {
            let rho = SuperDensity::classical_gaussian(grid(), 1.0, 1.0, x0, 0.2, 0.9, 0.8);
            let scaled = SuperDensity { values: rho.values.clone() * C64::new(alpha, 0.0), ..rho.clone() };
            prop_assert!((scaled.trace() - alpha * rho.trace()).abs() < 1e-12);
        }
    }
}
