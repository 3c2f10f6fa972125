//! Two oscillators coupled by `V(x₁−x₂) = λ(x₁−x₂)⁴`, evolved with the
//! quantum and the classical generator in a truncated Fock basis.
//!
//! Tensor index is `i₁·n + i₂`. A superpotential monomial
//! `Q₁ᵃ q₁ᵇ Q₂ᶜ q₂ᵈ` acts as `ρ ↦ (X₁ᵃ⊗X₂ᶜ) ρ (X₁ᵇ⊗X₂ᵈ)`, with `Xᵏ` the
//! k-th power of the truncated position matrix. Using plain powers keeps
//! `Σ c_{ab} X^b X^a = 𝒱(X,X) = 0`, so both generators conserve the trace
//! exactly on the truncated space.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::linalg::{
    expm_action, hermiticity_deviation, left_right_superop, max_abs_diff, trace, unvectorize,
    vectorize, HermitianEigen, DENSE_LIMIT,
};
use crate::liouvillian::DenseLiouvillian;
use crate::potential::{
    bipartite_cl_polynomial, bipartite_qm_polynomial, classify_terms, Kind, MonomialClass,
    MultiPoly,
};
use crate::{CMatrix, Error, Result, C64};

/// Largest population allowed in the top level of either subsystem.
pub const TRUNCATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BipartiteBasis {
    pub n_levels: usize,
    pub omega1: f64,
    pub omega2: f64,
    pub mass: f64,
    pub hbar: f64,
}

impl BipartiteBasis {
    pub fn new(n_levels: usize, omega: f64) -> Self {
        Self {
            n_levels,
            omega1: omega,
            omega2: omega,
            mass: 1.0,
            hbar: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_levels < 2 {
            return Err(Error::InvalidParameter(
                "n_levels must be at least 2".into(),
            ));
        }
        if !(self.omega1 > 0.0 && self.omega2 > 0.0 && self.mass > 0.0 && self.hbar > 0.0) {
            return Err(Error::InvalidParameter(
                "frequencies, mass and ħ must be positive".into(),
            ));
        }
        let dim = self.n_levels.pow(4);
        if dim > DENSE_LIMIT {
            return Err(Error::DimensionTooLarge {
                dim,
                max: DENSE_LIMIT,
            });
        }
        Ok(())
    }

    /// Hilbert-space dimension `n²`.
    pub fn dim(&self) -> usize {
        self.n_levels * self.n_levels
    }

    /// `√(ħ/2mω)(a + a†)` truncated to `n_levels`.
    pub fn position(&self, omega: f64) -> DMatrix<f64> {
        let s = (self.hbar / (2.0 * self.mass * omega)).sqrt();
        DMatrix::from_fn(self.n_levels, self.n_levels, |i, j| {
            if j == i + 1 {
                s * (j as f64).sqrt()
            } else if i == j + 1 {
                s * (i as f64).sqrt()
            } else {
                0.0
            }
        })
    }

    /// `ħω₁(n₁+½) + ħω₂(n₂+½)`.
    pub fn free_hamiltonian(&self) -> CMatrix {
        let n = self.n_levels;
        CMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            if r != c {
                return C64::new(0.0, 0.0);
            }
            let (i1, i2) = (r / n, r % n);
            C64::new(
                self.hbar * (self.omega1 * (i1 as f64 + 0.5) + self.omega2 * (i2 as f64 + 0.5)),
                0.0,
            )
        })
    }

    fn powers(&self, omega: f64, max: usize) -> Vec<CMatrix> {
        let x = self.position(omega).map(|v| C64::new(v, 0.0));
        let mut out = vec![CMatrix::identity(self.n_levels, self.n_levels)];
        for k in 1..=max {
            out.push(&out[k - 1] * &x);
        }
        out
    }

    /// Liouville-space matrix of `ρ ↦ Σ c (X₁ᵃ⊗X₂ᶜ) ρ (X₁ᵇ⊗X₂ᵈ)`.
    pub fn monomial_superop(&self, poly: &MultiPoly) -> CMatrix {
        let max = poly.terms().flat_map(|(e, _)| e).max().unwrap_or(0) as usize;
        let p1 = self.powers(self.omega1, max);
        let p2 = self.powers(self.omega2, max);
        let d = self.dim();
        let mut out = CMatrix::zeros(d * d, d * d);
        for (e, c) in poly.terms() {
            let left = p1[e[0] as usize].kronecker(&p2[e[2] as usize]);
            let right = p1[e[1] as usize].kronecker(&p2[e[3] as usize]);
            out += left_right_superop(&left, &right) * C64::new(c, 0.0);
        }
        out
    }
}

/// Superpotential of `kind` as a polynomial in `(Q₁, q₁, Q₂, q₂)`.
pub fn bipartite_polynomial(lambda: f64, kind: Kind) -> MultiPoly {
    match kind {
        Kind::Quantum => bipartite_qm_polynomial(lambda),
        Kind::Classical => bipartite_cl_polynomial(lambda),
    }
}

/// `[H₀, ·] + 𝒱_kind` on the truncated two-oscillator space.
pub fn build_bipartite_liouvillian(
    basis: &BipartiteBasis,
    lambda: f64,
    kind: Kind,
) -> Result<DenseLiouvillian> {
    basis.validate()?;
    let h0 = basis.free_hamiltonian();
    let id = CMatrix::identity(basis.dim(), basis.dim());
    let mut m = left_right_superop(&h0, &id) - left_right_superop(&id, &h0);
    if lambda != 0.0 {
        m += basis.monomial_superop(&bipartite_polynomial(lambda, kind));
    }
    DenseLiouvillian::new(m)
}

/// Density matrix on the tensor basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteDensity {
    pub n_levels: usize,
    pub values: CMatrix,
}

impl BipartiteDensity {
    pub fn new(n_levels: usize, values: CMatrix) -> Result<Self> {
        let d = n_levels * n_levels;
        if values.shape() != (d, d) {
            return Err(Error::InvalidParameter(format!(
                "expected {d}×{d} density, got {:?}",
                values.shape()
            )));
        }
        Ok(Self { n_levels, values })
    }

    pub fn product(rho1: &CMatrix, rho2: &CMatrix) -> Result<Self> {
        if rho1.shape() != rho2.shape() || rho1.nrows() != rho1.ncols() {
            return Err(Error::InvalidParameter(
                "subsystem densities must be square and equal-sized".into(),
            ));
        }
        Ok(Self {
            n_levels: rho1.nrows(),
            values: rho1.kronecker(rho2),
        })
    }

    /// Product of truncated, renormalized coherent states `|α₁⟩⊗|α₂⟩`.
    pub fn coherent(n_levels: usize, alpha1: f64, alpha2: f64) -> Result<Self> {
        let coh = |alpha: f64| {
            let mut amp = Vec::with_capacity(n_levels);
            let mut c = 1.0;
            for n in 0..n_levels {
                if n > 0 {
                    c *= alpha / (n as f64).sqrt();
                }
                amp.push(c);
            }
            let norm: f64 = amp.iter().map(|a| a * a).sum();
            CMatrix::from_fn(n_levels, n_levels, |i, j| {
                C64::new(amp[i] * amp[j] / norm, 0.0)
            })
        };
        Self::product(&coh(alpha1), &coh(alpha2))
    }

    pub fn trace(&self) -> C64 {
        trace(&self.values)
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        hermiticity_deviation(&self.values)
    }

    /// Top-level population of either subsystem.
    pub fn top_level_population(&self) -> f64 {
        let top = self.n_levels - 1;
        let a = reduced_density(self, 1)[(top, top)].norm();
        let b = reduced_density(self, 2)[(top, top)].norm();
        a.max(b)
    }

    pub fn check_truncation(&self) -> Result<()> {
        let population = self.top_level_population();
        if population > TRUNCATION_TOL {
            return Err(Error::TruncationLeak {
                population,
                tolerance: TRUNCATION_TOL,
            });
        }
        Ok(())
    }

    /// Errors with `NotFactorized` unless `ρ = ρ₁⊗ρ₂/Tr ρ` within `tol`.
    pub fn check_separable(&self, tol: f64) -> Result<()> {
        let r1 = reduced_density(self, 1);
        let r2 = reduced_density(self, 2);
        let deviation = max_abs_diff(&(r1.kronecker(&r2) / self.trace()), &self.values);
        if deviation > tol {
            return Err(Error::NotFactorized { deviation });
        }
        Ok(())
    }
}

/// Partial trace over the other subsystem (`subsystem` is 1 or 2).
pub fn reduced_density(rho: &BipartiteDensity, subsystem: u8) -> CMatrix {
    let n = rho.n_levels;
    let v = &rho.values;
    match subsystem {
        1 => CMatrix::from_fn(n, n, |i, j| (0..n).map(|k| v[(i * n + k, j * n + k)]).sum()),
        _ => CMatrix::from_fn(n, n, |k, l| (0..n).map(|i| v[(i * n + k, i * n + l)]).sum()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntanglementMetrics {
    /// `Tr ρ₁²`.
    pub purity: f64,
    /// Eigenvalues of the full `ρ`, descending; negative values are kept.
    pub eigenvalues: Vec<f64>,
}

impl EntanglementMetrics {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }
}

pub fn entanglement_metrics(rho: &BipartiteDensity) -> Result<EntanglementMetrics> {
    let r1 = reduced_density(rho, 1);
    let purity = (&r1 * &r1).trace().re;
    let mut eigenvalues = HermitianEigen::new(&rho.values)?.values;
    eigenvalues.reverse();
    Ok(EntanglementMetrics {
        purity,
        eigenvalues,
    })
}

/// `H₀ + λ(X₁ − X₂)⁴` on the truncated Hilbert space.
pub fn bipartite_hamiltonian(basis: &BipartiteBasis, lambda: f64) -> Result<CMatrix> {
    basis.validate()?;
    let n = basis.n_levels;
    let id = CMatrix::identity(n, n);
    let x1 = basis.position(basis.omega1).map(|v| C64::new(v, 0.0));
    let x2 = basis.position(basis.omega2).map(|v| C64::new(v, 0.0));
    let rel = x1.kronecker(&id) - id.kronecker(&x2);
    let rel2 = &rel * &rel;
    Ok(basis.free_hamiltonian() + &rel2 * &rel2 * C64::new(lambda, 0.0))
}

/// Exact states at `times` under one generator. The quantum kind is
/// propagated as `UρU†` in Hilbert space, the classical one in Liouville
/// space.
pub fn evolve_bipartite(
    basis: &BipartiteBasis,
    lambda: f64,
    kind: Kind,
    rho0: &BipartiteDensity,
    times: &[f64],
) -> Result<Vec<BipartiteDensity>> {
    if rho0.n_levels != basis.n_levels {
        return Err(Error::InvalidParameter(
            "state and basis sizes differ".into(),
        ));
    }
    let check = |values: CMatrix| -> Result<BipartiteDensity> {
        let rho = BipartiteDensity::new(basis.n_levels, values)?;
        rho.check_truncation()?;
        Ok(rho)
    };
    match kind {
        Kind::Quantum => {
            let eig = HermitianEigen::new(&bipartite_hamiltonian(basis, lambda)?)?;
            times
                .iter()
                .map(|&t| {
                    let u = eig.function(|e| C64::from_polar(1.0, -e * t / basis.hbar));
                    check(&u * &rho0.values * u.adjoint())
                })
                .collect()
        }
        Kind::Classical => {
            let l = build_bipartite_liouvillian(basis, lambda, kind)?;
            // Taylor action from the previous sample: no dense eigensolve,
            // and the cost per sample is O(Δt)
            let (mut v, mut now) = (vectorize(&rho0.values), 0.0);
            times
                .iter()
                .map(|&t| {
                    v = expm_action(&(&l.matrix * C64::new(0.0, -(t - now) / basis.hbar)), &v);
                    now = t;
                    check(unvectorize(&v, basis.dim(), basis.dim()))
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub t: f64,
    pub purity_cl: f64,
    pub purity_qm: f64,
    pub min_eig_cl: f64,
    pub min_eig_qm: f64,
    /// Largest `|Tr ρ − 1|` of the two runs.
    pub trace_drift: f64,
    pub hermiticity: f64,
}

/// CL and QM evolutions from the same separable state.
pub fn compare_cl_qm_entanglement(
    basis: &BipartiteBasis,
    lambda: f64,
    rho0: &BipartiteDensity,
    times: &[f64],
) -> Result<Vec<ComparisonRow>> {
    rho0.check_separable(1e-10)?;
    if rho0.hermiticity_deviation() > 1e-12 {
        return Err(Error::NonHermitianInput {
            deviation: rho0.hermiticity_deviation(),
        });
    }
    let run = |kind| evolve_bipartite(basis, lambda, kind, rho0, times);
    let (cl, qm) = if crate::is_parallel() {
        #[cfg(feature = "parallel")]
        {
            rayon::join(|| run(Kind::Classical), || run(Kind::Quantum))
        }
        #[cfg(not(feature = "parallel"))]
        unreachable!()
    } else {
        (run(Kind::Classical), run(Kind::Quantum))
    };
    let (cl, qm) = (cl?, qm?);
    let tr0 = rho0.trace().re;
    times
        .iter()
        .zip(cl.iter().zip(&qm))
        .map(|(&t, (c, q))| {
            let mc = entanglement_metrics(c)?;
            let mq = entanglement_metrics(q)?;
            Ok(ComparisonRow {
                t,
                purity_cl: mc.purity,
                purity_qm: mq.purity,
                min_eig_cl: mc.min_eigenvalue(),
                min_eig_qm: mq.min_eigenvalue(),
                trace_drift: (c.trace() - tr0).norm().max((q.trace() - tr0).norm()),
                hermiticity: c.hermiticity_deviation().max(q.hermiticity_deviation()),
            })
        })
        .collect()
}

/// Term-by-term comparison of `ℒ_CL − ℒ_QM` with the classified expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeneratorAudit {
    pub n_levels: usize,
    pub lambda: f64,
    pub mixed_terms: usize,
    pub pure_terms: usize,
    /// `max|(ℒ_CL − ℒ_QM) − Σ mixed|`: zero only if the classical pure
    /// terms equal the quantum ones.
    pub literal_residual: f64,
    /// `max|(ℒ_CL − ℒ_QM) − (Σ mixed + Σ pure_CL − Σ QM)|`.
    pub corrected_residual: f64,
    /// `max|Σ pure_CL − ½ Σ QM|`.
    pub half_pure_residual: f64,
}

pub fn audit_generator_difference(basis: &BipartiteBasis, lambda: f64) -> Result<GeneratorAudit> {
    let cl = build_bipartite_liouvillian(basis, lambda, Kind::Classical)?.matrix;
    let qm = build_bipartite_liouvillian(basis, lambda, Kind::Quantum)?.matrix;
    let diff = cl - qm;
    let mut mixed = MultiPoly::zero();
    let mut pure = MultiPoly::zero();
    let terms = classify_terms(&bipartite_cl_polynomial(lambda));
    for t in &terms {
        let m = MultiPoly::monomial(t.exponents, t.coefficient);
        if t.class.is_mixed() {
            mixed = &mixed + &m;
        } else {
            debug_assert!(matches!(
                t.class,
                MonomialClass::PureBra | MonomialClass::PureKet
            ));
            pure = &pure + &m;
        }
    }
    let s_mixed = basis.monomial_superop(&mixed);
    let s_pure = basis.monomial_superop(&pure);
    let s_qm = basis.monomial_superop(&bipartite_qm_polynomial(lambda));
    Ok(GeneratorAudit {
        n_levels: basis.n_levels,
        lambda,
        mixed_terms: mixed.len(),
        pure_terms: pure.len(),
        literal_residual: max_abs_diff(&diff, &s_mixed),
        corrected_residual: max_abs_diff(&diff, &(&s_mixed + &s_pure - &s_qm)),
        half_pure_residual: max_abs_diff(&s_pure, &(s_qm * C64::new(0.5, 0.0))),
    })
}

/// Least-squares fit `1 − P(t) ≈ c·tᵏ` in log-log form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub coefficient: f64,
}

pub fn fit_purity_loss(times: &[f64], purities: &[f64]) -> Result<PowerFit> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(purities)
        .filter(|(t, p)| **t > 0.0 && **p < 1.0)
        .map(|(t, p)| (t.ln(), (1.0 - p).ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least two points with t > 0 and purity < 1".into(),
        ));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let exponent = sxy / sxx;
    Ok(PowerFit {
        exponent,
        coefficient: (my - exponent * mx).exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouvillian::LiouvilleOperator;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn harmonic_limit_identical() {
        let b = BipartiteBasis::new(4, 1.0);
        let cl = build_bipartite_liouvillian(&b, 0.0, Kind::Classical).unwrap();
        let qm = build_bipartite_liouvillian(&b, 0.0, Kind::Quantum).unwrap();
        assert_eq!(cl.matrix, qm.matrix);
    }

    #[test]
    fn quantum_generator_is_commutator() {
        let b = BipartiteBasis {
            omega2: 1.3,
            ..BipartiteBasis::new(4, 0.8)
        };
        let lambda = 0.7;
        let l = build_bipartite_liouvillian(&b, lambda, Kind::Quantum).unwrap();
        let x1 = b.position(b.omega1).map(c);
        let x2 = b.position(b.omega2).map(c);
        let id = CMatrix::identity(4, 4);
        let rel = x1.kronecker(&id) - id.kronecker(&x2);
        let v = &rel * &rel * &rel * &rel * c(lambda);
        let h = b.free_hamiltonian() + v;
        let rho = BipartiteDensity::coherent(4, 0.4, -0.3).unwrap().values
            + CMatrix::from_fn(16, 16, |i, j| {
                C64::new(0.01 * (i + j) as f64, 0.02 * (i as f64 - j as f64))
            });
        let direct = &h * &rho - &rho * &h;
        assert!(max_abs_diff(&l.apply(&rho), &direct) < 1e-10);
    }

    #[test]
    fn difference_contains_mixed_and_half_pure_terms() {
        let b = BipartiteBasis::new(4, 1.0);
        let a = audit_generator_difference(&b, 0.5).unwrap();
        assert!(a.corrected_residual < 1e-10);
        assert!(a.half_pure_residual < 1e-10);
        assert!(a.literal_residual > 1e-3);
        assert!(a.mixed_terms > 0);
        let free = audit_generator_difference(&b, 0.0).unwrap();
        assert_eq!(free.literal_residual, 0.0);
    }

    #[test]
    fn reduced_density_cases() {
        let r1 = CMatrix::from_row_slice(
            2,
            2,
            &[c(0.7), C64::new(0.1, 0.2), C64::new(0.1, -0.2), c(0.3)],
        );
        let r2 = CMatrix::from_row_slice(2, 2, &[c(0.4), c(0.0), c(0.0), c(0.6)]);
        let p = BipartiteDensity::product(&r1, &r2).unwrap();
        assert!(max_abs_diff(&reduced_density(&p, 1), &r1) < 1e-15);
        assert!(max_abs_diff(&reduced_density(&p, 2), &r2) < 1e-15);
        assert!((trace(&reduced_density(&p, 1)) - p.trace()).norm() < 1e-12);
        // (|00⟩ + |11⟩)/√2
        let mut bell = CMatrix::zeros(4, 4);
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            bell[(i, j)] = c(0.5);
        }
        let bell = BipartiteDensity::new(2, bell).unwrap();
        assert!(
            max_abs_diff(
                &reduced_density(&bell, 1),
                &(CMatrix::identity(2, 2) * c(0.5))
            ) < 1e-15
        );
        let m = entanglement_metrics(&bell).unwrap();
        assert!((m.purity - 0.5).abs() < 1e-15);
        assert!((m.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!(bell.check_separable(1e-10).is_err());
    }

    #[test]
    fn maximally_entangled_three_levels() {
        let mut v = CMatrix::zeros(9, 9);
        for i in 0..3 {
            for j in 0..3 {
                v[(i * 3 + i, j * 3 + j)] = c(1.0 / 3.0);
            }
        }
        let m = entanglement_metrics(&BipartiteDensity::new(3, v).unwrap()).unwrap();
        assert!((m.purity - 1.0 / 3.0).abs() < 1e-14);
        let p = entanglement_metrics(&BipartiteDensity::coherent(3, 0.2, 0.1).unwrap()).unwrap();
        assert!((p.purity - 1.0).abs() < 1e-14);
    }

    #[test]
    fn comparison_series() {
        let b = BipartiteBasis::new(5, 1.0);
        let rho0 = BipartiteDensity::coherent(5, 0.1, -0.1).unwrap();
        let times = [0.0, 0.05, 0.1, 0.2];
        let free = compare_cl_qm_entanglement(&b, 0.0, &rho0, &times).unwrap();
        for r in &free {
            assert!((r.purity_cl - 1.0).abs() < 1e-12 && (r.purity_qm - 1.0).abs() < 1e-12);
        }
        let rows = compare_cl_qm_entanglement(&b, 0.002, &rho0, &times).unwrap();
        for r in &rows[1..] {
            assert!(r.purity_qm < 1.0);
            assert!(r.min_eig_qm > -1e-8);
            assert!(r.trace_drift < 1e-8 && r.hermiticity < 1e-8);
        }
        let ent = jc_like_entangled();
        assert!(matches!(
            compare_cl_qm_entanglement(&BipartiteBasis::new(2, 1.0), 0.1, &ent, &[0.1]),
            Err(Error::NotFactorized { .. })
        ));
    }

    fn jc_like_entangled() -> BipartiteDensity {
        let mut v = CMatrix::zeros(4, 4);
        for (i, j) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            v[(i, j)] = c(0.5);
        }
        BipartiteDensity::new(2, v).unwrap()
    }

    #[test]
    fn purity_loss_is_quadratic() {
        let b = BipartiteBasis::new(6, 1.0);
        let rho0 = BipartiteDensity::coherent(6, 0.2, -0.1).unwrap();
        let times: Vec<f64> = (1..=6).map(|k| 0.01 * k as f64).collect();
        let states = evolve_bipartite(&b, 0.005, Kind::Quantum, &rho0, &times).unwrap();
        let purities: Vec<f64> = states
            .iter()
            .map(|s| entanglement_metrics(s).unwrap().purity)
            .collect();
        let fit = fit_purity_loss(&times, &purities).unwrap();
        assert!((fit.exponent - 2.0).abs() < 0.1, "{fit:?}");
    }

    #[test]
    fn hilbert_and_liouville_paths_agree() {
        let b = BipartiteBasis::new(4, 1.1);
        let rho0 = BipartiteDensity::coherent(4, 0.05, 0.02).unwrap();
        let fast = evolve_bipartite(&b, 0.001, Kind::Quantum, &rho0, &[0.3]).unwrap();
        let l = build_bipartite_liouvillian(&b, 0.001, Kind::Quantum).unwrap();
        let slow = crate::evolution::ExactPropagator::from_dense(l.matrix, 1.0)
            .unwrap()
            .apply(&rho0.values, 0.3);
        assert!(max_abs_diff(&fast[0].values, &slow) < 1e-12);
    }

    #[test]
    fn stepped_classical_path_matches_propagator() {
        let b = BipartiteBasis::new(5, 0.9);
        let rho0 = BipartiteDensity::coherent(5, 0.05, -0.03).unwrap();
        let stepped = evolve_bipartite(&b, 5e-4, Kind::Classical, &rho0, &[0.0, 0.2, 0.7]).unwrap();
        let l = build_bipartite_liouvillian(&b, 5e-4, Kind::Classical).unwrap();
        let prop = crate::evolution::ExactPropagator::from_dense(l.matrix, 1.0).unwrap();
        for (s, t) in stepped.iter().zip([0.0, 0.2, 0.7]) {
            assert!(max_abs_diff(&s.values, &prop.apply(&rho0.values, t)) < 1e-12);
        }
    }

    #[test]
    fn guards() {
        assert!(matches!(
            BipartiteBasis::new(9, 1.0).validate(),
            Err(Error::DimensionTooLarge { .. })
        ));
        assert!(BipartiteBasis::new(1, 1.0).validate().is_err());
        let b = BipartiteBasis::new(3, 1.0);
        let rho0 = BipartiteDensity::coherent(3, 1.5, 0.0).unwrap();
        assert!(matches!(
            evolve_bipartite(&b, 0.1, Kind::Quantum, &rho0, &[0.1]),
            Err(Error::TruncationLeak { .. })
        ));
    }
}
