//! Finite Liouville superoperators `ℒ` with `iħ ∂ₜρ = ℒρ`.
//!
//! [`GridLiouvillian`] discretizes `Ĥ_Q − Ĥ_q + ℰ(Q,q)` on a
//! [`SuperGrid`](crate::superspace::SuperGrid) with spectral kinetic terms.
//! [`BasisLiouvillian`] is the commutator `[H, ·]` of a Hermitian matrix,
//! optionally plus an extra superoperator. Dense matrices act on row-major
//! vectorized densities (see [`crate::linalg`]).

use std::path::Path;

use nalgebra::DMatrix;

use crate::linalg::{
    commutator_superop, eigenvalues_general, hermiticity_deviation, max_abs,
    negation_pairing_residual, unvectorize, vectorize, HermitianEigen, DENSE_LIMIT,
};
use crate::potential::{e_superoperator, Kind, Polynomial};
use crate::spectral::{neg_second_derivative_matrix, wavenumbers, SpectralPlan};
use crate::superspace::SuperGrid;
use crate::{CMatrix, Error, Result, C64};

/// Common interface of grid and basis generators.
pub trait LiouvilleOperator {
    /// Side length `N` of the density matrices acted on.
    fn size(&self) -> usize;

    /// `ℒρ`.
    fn apply(&self, rho: &CMatrix) -> CMatrix;

    /// Dense `N² × N²` matrix.
    fn dense(&self) -> Result<CMatrix>;

    fn dimension(&self) -> usize {
        self.size() * self.size()
    }
}

fn check_dense(dim: usize) -> Result<()> {
    if dim > DENSE_LIMIT {
        return Err(Error::DimensionTooLarge {
            dim,
            max: DENSE_LIMIT,
        });
    }
    Ok(())
}

/// `Ĥ_Q − Ĥ_q + ℰ` on a superspace grid; `ℰ` is included only for
/// [`Kind::Classical`].
#[derive(Debug, Clone)]
pub struct GridLiouvillian {
    pub grid: SuperGrid,
    pub kind: Kind,
    pub mass: f64,
    pub hbar: f64,
    pub potential: Polynomial,
    /// `V(Qᵢ) − V(qⱼ)`.
    pub potential_diag: DMatrix<f64>,
    /// `ℰ(Qᵢ, qⱼ)`, zero for the quantum kind.
    pub e_diag: DMatrix<f64>,
}

impl GridLiouvillian {
    pub fn new(
        potential: &Polynomial,
        grid: SuperGrid,
        kind: Kind,
        mass: f64,
        hbar: f64,
    ) -> Result<Self> {
        if !(mass > 0.0) || !(hbar > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mass {mass} and ħ {hbar} must be positive"
            )));
        }
        if grid.n < 2 || !grid.n.is_multiple_of(2) {
            return Err(Error::GridMismatch(format!(
                "grid size must be even, got {}",
                grid.n
            )));
        }
        let x = grid.points();
        let vx: Vec<f64> = x.iter().map(|&v| potential.eval(v)).collect();
        let potential_diag = DMatrix::from_fn(grid.n, grid.n, |i, j| vx[i] - vx[j]);
        let e_diag = match kind {
            Kind::Quantum => DMatrix::zeros(grid.n, grid.n),
            Kind::Classical => DMatrix::from_fn(grid.n, grid.n, |i, j| {
                e_superoperator(potential, x[i], x[j])
            }),
        };
        Ok(Self {
            grid,
            kind,
            mass,
            hbar,
            potential: potential.clone(),
            potential_diag,
            e_diag,
        })
    }

    /// `V(Q) − V(q) + ℰ(Q,q)`, the multiplicative part of `ℒ`.
    pub fn diagonal(&self) -> DMatrix<f64> {
        &self.potential_diag + &self.e_diag
    }

    /// Kinetic energies `ħ²k²/2m` in FFT order.
    pub fn kinetic_energies(&self) -> Vec<f64> {
        let c = self.hbar * self.hbar / (2.0 * self.mass);
        wavenumbers(self.grid.n, self.grid.step)
            .into_iter()
            .map(|k| c * k * k)
            .collect()
    }

    /// Kinetic matrix `−(ħ²/2m)∂²` on the periodic grid.
    pub fn kinetic_matrix(&self) -> DMatrix<f64> {
        neg_second_derivative_matrix(self.grid.n, self.grid.step)
            * (self.hbar * self.hbar / (2.0 * self.mass))
    }
}

impl LiouvilleOperator for GridLiouvillian {
    fn size(&self) -> usize {
        self.grid.n
    }

    fn apply(&self, rho: &CMatrix) -> CMatrix {
        let n = self.grid.n;
        assert_eq!(rho.shape(), (n, n), "density does not match grid");
        let t = self.kinetic_energies();
        let mut kin = rho.clone();
        SpectralPlan::new(n).filter_2d(&mut kin, |i, j| C64::new(t[i] - t[j], 0.0));
        let d = self.diagonal();
        CMatrix::from_fn(n, n, |i, j| kin[(i, j)] + rho[(i, j)] * d[(i, j)])
    }

    fn dense(&self) -> Result<CMatrix> {
        let n = self.grid.n;
        check_dense(n * n)?;
        let t = self.kinetic_matrix();
        let d = self.diagonal();
        Ok(CMatrix::from_fn(n * n, n * n, |r, c| {
            let (j, k) = (r / n, r % n);
            let (l, m) = (c / n, c % n);
            let mut v = 0.0;
            if k == m {
                v += t[(j, l)];
            }
            if j == l {
                v -= t[(m, k)];
            }
            if r == c {
                v += d[(j, k)];
            }
            C64::new(v, 0.0)
        }))
    }
}

/// `ℒ_{jk,lm} = H_{jl}δ_{km} − conj(H_{km})δ_{jl}`, plus an optional
/// superoperator `𝒮`.
#[derive(Debug, Clone)]
pub struct BasisLiouvillian {
    pub hamiltonian: CMatrix,
    pub extra: Option<CMatrix>,
}

impl BasisLiouvillian {
    pub fn new(hamiltonian: CMatrix, extra: Option<CMatrix>) -> Result<Self> {
        let n = hamiltonian.nrows();
        if hamiltonian.ncols() != n {
            return Err(Error::InvalidParameter("Hamiltonian must be square".into()));
        }
        let deviation = hermiticity_deviation(&hamiltonian);
        if deviation > 1e-12 * (1.0 + max_abs(&hamiltonian)) {
            return Err(Error::NonHermitianInput { deviation });
        }
        if let Some(s) = &extra {
            if s.shape() != (n * n, n * n) {
                return Err(Error::InvalidParameter(format!(
                    "superoperator is {:?}, expected {}×{}",
                    s.shape(),
                    n * n,
                    n * n
                )));
            }
        }
        Ok(Self { hamiltonian, extra })
    }
}

impl LiouvilleOperator for BasisLiouvillian {
    fn size(&self) -> usize {
        self.hamiltonian.nrows()
    }

    fn apply(&self, rho: &CMatrix) -> CMatrix {
        let h = &self.hamiltonian;
        let mut out = h * rho - rho * h;
        if let Some(s) = &self.extra {
            let n = self.size();
            out += unvectorize(&(s * vectorize(rho)), n, n);
        }
        out
    }

    fn dense(&self) -> Result<CMatrix> {
        check_dense(self.dimension())?;
        let mut l = commutator_superop(&self.hamiltonian);
        if let Some(s) = &self.extra {
            l += s;
        }
        Ok(l)
    }
}

/// Dense wrapper, e.g. for generators assembled elsewhere.
#[derive(Debug, Clone)]
pub struct DenseLiouvillian {
    pub matrix: CMatrix,
    pub n: usize,
}

impl DenseLiouvillian {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let dim = matrix.nrows();
        let n = (dim as f64).sqrt().round() as usize;
        if n * n != dim || matrix.ncols() != dim {
            return Err(Error::InvalidParameter(format!(
                "{:?} is not a Liouville-space matrix",
                matrix.shape()
            )));
        }
        Ok(Self { matrix, n })
    }
}

impl LiouvilleOperator for DenseLiouvillian {
    fn size(&self) -> usize {
        self.n
    }

    fn apply(&self, rho: &CMatrix) -> CMatrix {
        unvectorize(&(&self.matrix * vectorize(rho)), self.n, self.n)
    }

    fn dense(&self) -> Result<CMatrix> {
        Ok(self.matrix.clone())
    }
}

/// Eigenvalues of `ℒ`. Hermitian generators (every grid Liouvillian and
/// commutators without extra terms) use the Hermitian solver.
pub fn spectrum(l: &dyn LiouvilleOperator) -> Result<Vec<C64>> {
    let m = l.dense()?;
    if hermiticity_deviation(&m) <= 1e-12 * (1.0 + max_abs(&m)) {
        let e = HermitianEigen::new(&m)?;
        return Ok(e.values.into_iter().map(|v| C64::new(v, 0.0)).collect());
    }
    eigenvalues_general(&m)
}

/// Largest pairing mismatch of `λ ↔ −λ′`, or `None` if the multiset is not
/// symmetric within `rel_tol · (spectral radius)`.
pub fn spectral_symmetry_residual(values: &[C64], rel_tol: f64) -> Option<f64> {
    let radius = values.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
    negation_pairing_residual(values, rel_tol * radius.max(1e-300))
}

/// Writes a dense matrix as CSV, one row per Liouville index, re/im
/// interleaved.
pub fn export_csv(m: &CMatrix, path: &Path) -> Result<()> {
    let io = |e: &dyn std::fmt::Display| Error::InvalidParameter(format!("export: {e}"));
    let mut w = csv::Writer::from_path(path).map_err(|e| io(&e))?;
    let mut header = vec!["row".to_string()];
    for c in 0..m.ncols() {
        header.push(format!("re_{c} [energy]"));
        header.push(format!("im_{c} [energy]"));
    }
    w.write_record(&header).map_err(|e| io(&e))?;
    for r in 0..m.nrows() {
        let mut rec = vec![r.to_string()];
        for c in 0..m.ncols() {
            rec.push(format!("{:e}", m[(r, c)].re));
            rec.push(format!("{:e}", m[(r, c)].im));
        }
        w.write_record(&rec).map_err(|e| io(&e))?;
    }
    w.flush().map_err(|e| io(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        let a = CMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        (&a + a.adjoint()) * C64::new(0.5, 0.0)
    }

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn quartic_grid(kind: Kind, n: usize) -> GridLiouvillian {
        let g = SuperGrid::centered(3.0, n).unwrap();
        GridLiouvillian::new(
            &Polynomial::new(vec![0.0, 0.0, 0.5, 0.0, 0.3]),
            g,
            kind,
            1.0,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn harmonic_cl_equals_qm() {
        let g = SuperGrid::centered(4.0, 16).unwrap();
        let v = Polynomial::harmonic(1.0, 1.3);
        let cl = GridLiouvillian::new(&v, g, Kind::Classical, 1.0, 1.0).unwrap();
        let qm = GridLiouvillian::new(&v, g, Kind::Quantum, 1.0, 1.0).unwrap();
        assert_eq!(cl.dense().unwrap(), qm.dense().unwrap());
    }

    #[test]
    fn free_diagonal_plane_wave_is_stationary() {
        let g = SuperGrid::centered(5.0, 32).unwrap();
        let l = GridLiouvillian::new(&Polynomial::zero(), g, Kind::Classical, 1.0, 1.0).unwrap();
        let k = 2.0 * std::f64::consts::PI * 3.0 / (g.n as f64 * g.step);
        let rho = CMatrix::from_fn(g.n, g.n, |i, j| {
            C64::from_polar(1.0, k * (g.point(i) - g.point(j)))
        });
        assert!(max_abs(&l.apply(&rho)) < 1e-10);
    }

    #[test]
    fn classical_diagonal_matches_superpotential() {
        let l = quartic_grid(Kind::Classical, 32);
        let d = l.diagonal();
        let x = l.grid.points();
        for i in (0..32).step_by(3) {
            for j in (0..32).step_by(5) {
                let expect =
                    crate::potential::super_potential(&l.potential, Kind::Classical, x[i], x[j]);
                assert!((d[(i, j)] - expect).abs() < 1e-12 * (1.0 + expect.abs()));
            }
        }
        assert!((&l.e_diag + l.e_diag.transpose()).abs().max() < 1e-12);
    }

    #[test]
    fn dense_matches_matrix_free() {
        let l = quartic_grid(Kind::Classical, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random_matrix(12, &mut rng);
        let dense = l.dense().unwrap();
        let via_dense = unvectorize(&(&dense * vectorize(&rho)), 12, 12);
        assert!(max_abs_diff(&via_dense, &l.apply(&rho)) < 1e-10);
        assert!(hermiticity_deviation(&dense) < 1e-12);
    }

    #[test]
    fn grid_preserves_hermiticity() {
        let l = quartic_grid(Kind::Classical, 16);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = random_hermitian(16, &mut rng);
        let out = l.apply(&rho);
        let dev = (0..16)
            .flat_map(|i| (0..16).map(move |j| (i, j)))
            .map(|(i, j)| (out[(i, j)] + out[(j, i)].conj()).norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-10);
    }

    #[test]
    fn two_level_spectrum() {
        let h = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(0.3, 0.0),
            C64::new(1.0, 0.0),
        ]));
        let l = BasisLiouvillian::new(h, None).unwrap();
        let mut s: Vec<f64> = spectrum(&l).unwrap().iter().map(|z| z.re).collect();
        s.sort_by(f64::total_cmp);
        let expect = [-0.7, 0.0, 0.0, 0.7];
        for (a, b) in s.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn three_level_differences() {
        let h = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(3.0, 0.0),
        ]));
        let l = BasisLiouvillian::new(h, None).unwrap();
        let mut s: Vec<f64> = spectrum(&l).unwrap().iter().map(|z| z.re).collect();
        s.sort_by(f64::total_cmp);
        let expect = [-3.0, -2.0, -1.0, 0.0, 0.0, 0.0, 1.0, 2.0, 3.0];
        for (a, b) in s.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_hamiltonian() {
        let l = BasisLiouvillian::new(CMatrix::zeros(3, 3), None).unwrap();
        assert_eq!(max_abs(&l.dense().unwrap()), 0.0);
        assert!(spectrum(&l).unwrap().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut h = CMatrix::zeros(2, 2);
        h[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(
            BasisLiouvillian::new(h, None),
            Err(Error::NonHermitianInput { .. })
        ));
    }

    #[test]
    fn dense_limit_enforced() {
        let g = SuperGrid::centered(3.0, 66).unwrap();
        let l = GridLiouvillian::new(&Polynomial::zero(), g, Kind::Quantum, 1.0, 1.0).unwrap();
        assert!(matches!(l.dense(), Err(Error::DimensionTooLarge { .. })));
    }

    #[test]
    fn spectra_are_symmetric() {
        let l = quartic_grid(Kind::Classical, 16);
        let s = spectrum(&l).unwrap();
        assert!(spectral_symmetry_residual(&s, 1e-8).is_some());
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let b = BasisLiouvillian::new(random_hermitian(6, &mut rng), None).unwrap();
        assert!(spectral_symmetry_residual(&spectrum(&b).unwrap(), 1e-8).is_some());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn commutator_identity(n in 2usize..=8, seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = random_hermitian(n, &mut rng);
            let rho = random_matrix(n, &mut rng);
            let l = BasisLiouvillian::new(h.clone(), None).unwrap();
            let direct = &h * &rho - &rho * &h;
            prop_assert!(max_abs_diff(&l.apply(&rho), &direct) < 1e-12);
            let dense = l.dense().unwrap();
            let via = unvectorize(&(&dense * vectorize(&rho)), n, n);
            prop_assert!(max_abs_diff(&via, &direct) < 1e-12);
        }
    }
}
