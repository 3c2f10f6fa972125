//! Dyson iteration of the superpropagator on a small superspace grid.

use nalgebra::DMatrix;

use crate::evolution::dyson_terms;
use crate::linalg::{unvectorize, vectorize, DENSE_LIMIT};
use crate::liouvillian::{GridLiouvillian, LiouvilleOperator};
use crate::potential::{Kind, Polynomial};
use crate::superspace::{SuperDensity, SuperGrid};
use crate::{CMatrix, Error, Result, C64};

/// Orders `𝒢⁽⁰⁾ … 𝒢⁽ⁿ⁾` of the Dyson series as dense grid propagators.
///
/// `terms[k]` acts on row-major vectorized densities; the continuum kernel
/// at grid points is `terms[k][(a·n+b, c·n+d)] / h²`.
#[derive(Debug, Clone)]
pub struct DysonKernel {
    pub grid: SuperGrid,
    pub kind: Kind,
    pub t: f64,
    pub mass: f64,
    pub hbar: f64,
    pub terms: Vec<CMatrix>,
}

impl DysonKernel {
    pub fn n_orders(&self) -> usize {
        self.terms.len() - 1
    }

    /// `Σ_{k ≤ order} 𝒢⁽ᵏ⁾` as a propagator matrix.
    pub fn propagator(&self, order: usize) -> CMatrix {
        let d = self.terms[0].nrows();
        self.terms
            .iter()
            .take(order + 1)
            .fold(CMatrix::zeros(d, d), |acc, m| acc + m)
    }

    /// Kernel value `𝒢(Q_a, q_b; T | Q_c, q_d)` truncated at `order`.
    pub fn kernel(&self, order: usize, fin: (usize, usize), init: (usize, usize)) -> C64 {
        let n = self.grid.n;
        let h2 = self.grid.step * self.grid.step;
        let r = fin.0 * n + fin.1;
        let c = init.0 * n + init.1;
        self.terms
            .iter()
            .take(order + 1)
            .map(|m| m[(r, c)])
            .sum::<C64>()
            / h2
    }

    /// Single term `𝒢⁽ᵏ⁾ρ`.
    pub fn apply_term(&self, k: usize, rho: &CMatrix) -> CMatrix {
        let n = self.grid.n;
        unvectorize(&(&self.terms[k] * vectorize(rho)), n, n)
    }

    /// State propagated with the series truncated at `order`.
    pub fn apply(&self, order: usize, rho: &SuperDensity) -> Result<SuperDensity> {
        if !rho.grid.same_as(&self.grid) {
            return Err(Error::GridMismatch(
                "density and kernel grids differ".into(),
            ));
        }
        let n = self.grid.n;
        let values = unvectorize(&(self.propagator(order) * vectorize(&rho.values)), n, n);
        SuperDensity::new(self.grid, self.hbar, self.mass, values)
    }
}

/// Iterates `𝒢 = 𝒢₀ − (i/ħ)∫𝒢₀𝒱𝒢` to `n_orders` on `grid`.
///
/// `𝒢₀` is the free spectral propagator; `𝒱` multiplies by the
/// superpotential of `kind`. All orders come from one block-bidiagonal
/// matrix exponential.
pub fn dyson_iterate(
    grid: SuperGrid,
    v: &Polynomial,
    kind: Kind,
    n_orders: usize,
    t: f64,
    mass: f64,
    hbar: f64,
) -> Result<DysonKernel> {
    if !(t > 0.0) {
        return Err(Error::NonpositiveTime(t));
    }
    let dim = grid.n * grid.n;
    if dim > DENSE_LIMIT {
        return Err(Error::DimensionTooLarge {
            dim,
            max: DENSE_LIMIT,
        });
    }
    let free = GridLiouvillian::new(&Polynomial::zero(), grid, kind, mass, hbar)?.dense()?;
    let full = GridLiouvillian::new(v, grid, kind, mass, hbar)?;
    let diag: DMatrix<f64> = full.diagonal();
    let n = grid.n;
    let mut pert = CMatrix::zeros(dim, dim);
    for r in 0..dim {
        pert[(r, r)] = C64::new(diag[(r / n, r % n)], 0.0);
    }
    let terms = dyson_terms(&free, &pert, t, hbar, n_orders)?;
    Ok(DysonKernel {
        grid,
        kind,
        t,
        mass,
        hbar,
        terms,
    })
}
