//! Dense linear-algebra helpers shared by the Liouvillian and evolution code.
//!
//! Liouville-space vectors use row-major vectorization: the density-matrix
//! entry `ρ[j,k]` of an `N×N` matrix lives at index `j·N + k`. Under that
//! convention `vec(A ρ B) = (A ⊗ Bᵀ) vec(ρ)`.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};

use crate::{CMatrix, Error, Result, C64};

/// Largest Liouville-space dimension materialized densely by default.
pub const DENSE_LIMIT: usize = 4096;

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

/// `max |m[i,j] − conj m[j,i]|`.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "square matrix expected");
    let mut dev = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn ensure_hermitian(m: &CMatrix, tol: f64) -> Result<()> {
    let deviation = hermiticity_deviation(m);
    if deviation > tol {
        return Err(Error::NonHermitianInput { deviation });
    }
    Ok(())
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Row-major vectorization.
pub fn vectorize(rho: &CMatrix) -> DVector<C64> {
    let (r, c) = rho.shape();
    DVector::from_fn(r * c, |idx, _| rho[(idx / c, idx % c)])
}

pub fn unvectorize(v: &DVector<C64>, rows: usize, cols: usize) -> CMatrix {
    assert_eq!(v.len(), rows * cols, "vector length mismatch");
    CMatrix::from_fn(rows, cols, |i, j| v[i * cols + j])
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Superoperator of `ρ ↦ L ρ R` in row-major Liouville space.
pub fn left_right_superop(left: &CMatrix, right: &CMatrix) -> CMatrix {
    left.kronecker(&right.transpose())
}

/// Superoperator of `ρ ↦ Hρ − ρH`.
pub fn commutator_superop(h: &CMatrix) -> CMatrix {
    let id = CMatrix::identity(h.nrows(), h.ncols());
    left_right_superop(h, &id) - left_right_superop(&id, h)
}

pub fn real_to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| C64::new(x, 0.0))
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(m: &CMatrix) -> Result<Self> {
        ensure_hermitian(m, 1e-10 * (1.0 + max_abs(m)))?;
        let eig = SymmetricEigen::new(m.clone());
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors =
            CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| eig.eigenvectors[(i, order[j])]);
        Ok(Self { values, vectors })
    }

    /// `V f(Λ) V†`.
    pub fn function<F: Fn(f64) -> C64>(&self, f: F) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let fj = f(lam);
            for i in 0..n {
                scaled[(i, j)] *= fj;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// Matrix exponential by Padé scaling and squaring.
pub fn expm(m: &CMatrix) -> CMatrix {
    m.exp()
}

/// `exp(A) v` by scaled Taylor steps, using only matrix-vector products.
pub fn expm_action(a: &CMatrix, v: &DVector<C64>) -> DVector<C64> {
    let norm1 = (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let steps = norm1.ceil().max(1.0) as usize;
    let scale = C64::new(1.0 / steps as f64, 0.0);
    let mut out = v.clone();
    for _ in 0..steps {
        let mut term = out.clone();
        let mut acc = out.clone();
        let base = acc.norm().max(f64::MIN_POSITIVE);
        for k in 1..64 {
            term = (a * &term) * (scale / k as f64);
            acc += &term;
            if term.norm() <= 1e-17 * base {
                break;
            }
        }
        out = acc;
    }
    out
}

/// Eigenvalues of a general complex matrix (complex Schur form).
pub fn eigenvalues_general(m: &CMatrix) -> Result<Vec<C64>> {
    let n = m.nrows();
    let schur = Schur::try_new(m.clone(), 1e-14, 100 * n.max(10))
        .ok_or_else(|| Error::InvalidParameter("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

/// Greedy pairing of each eigenvalue `λ` with an unused `−λ′`.
///
/// Returns the largest pairing distance, or `None` if the multiset has no
/// complete pairing within `tol` (absolute).
pub fn negation_pairing_residual(values: &[C64], tol: f64) -> Option<f64> {
    let mut sorted: Vec<C64> = values.to_vec();
    sorted.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut used = vec![false; sorted.len()];
    let mut worst = 0.0_f64;
    for i in 0..sorted.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let target = -sorted[i];
        if sorted[i].norm() <= tol {
            worst = worst.max(sorted[i].norm());
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for (j, z) in sorted.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (z - target).norm();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        match best {
            Some((j, d)) if d <= tol => {
                used[j] = true;
                worst = worst.max(d);
            }
            _ => return None,
        }
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn left_right_superop_matches_products() {
        let a = CMatrix::from_fn(3, 3, |i, j| c(i as f64 + 0.5 * j as f64, j as f64 - 1.0));
        let b = CMatrix::from_fn(3, 3, |i, j| c((i * j) as f64 * 0.3, 0.1 * i as f64));
        let rho = CMatrix::from_fn(3, 3, |i, j| c(0.2 * i as f64 - j as f64, 0.7));
        let direct = &a * &rho * &b;
        let via = unvectorize(&(left_right_superop(&a, &b) * vectorize(&rho)), 3, 3);
        assert!(max_abs_diff(&direct, &via) < 1e-12);
    }

    #[test]
    fn hermitian_function_reconstructs_matrix() {
        let h = CMatrix::from_fn(4, 4, |i, j| {
            if i == j {
                c(i as f64, 0.0)
            } else if i < j {
                c(0.3, 0.1 * (i + j) as f64)
            } else {
                c(0.3, -0.1 * (i + j) as f64)
            }
        });
        let eig = HermitianEigen::new(&h).unwrap();
        let back = eig.function(|l| c(l, 0.0));
        assert!(max_abs_diff(&h, &back) < 1e-12);
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = CMatrix::from_fn(2, 2, |i, j| c((i + 2 * j) as f64, 0.0));
        assert!(matches!(
            HermitianEigen::new(&m),
            Err(Error::NonHermitianInput { .. })
        ));
    }

    #[test]
    fn general_eigenvalues_of_triangular() {
        let m =
            CMatrix::from_row_slice(2, 2, &[c(1.0, 1.0), c(2.0, 0.0), c(0.0, 0.0), c(-3.0, 0.5)]);
        let mut ev = eigenvalues_general(&m).unwrap();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((ev[0] - c(-3.0, 0.5)).norm() < 1e-12);
        assert!((ev[1] - c(1.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn pairing_detects_asymmetry() {
        let sym = [
            c(1.0, 0.0),
            c(-1.0, 0.0),
            c(0.0, 0.0),
            c(2.0, 0.5),
            c(-2.0, -0.5),
        ];
        assert!(negation_pairing_residual(&sym, 1e-12).is_some());
        let asym = [c(1.0, 0.0), c(-1.1, 0.0)];
        assert!(negation_pairing_residual(&asym, 1e-3).is_none());
    }

    #[test]
    fn expm_action_matches_expm() {
        let m = CMatrix::from_fn(5, 5, |i, j| {
            c((i as f64 - j as f64) * 0.7, 0.3 * (i * j) as f64)
        });
        let v = DVector::from_fn(5, |i, _| c(1.0 - i as f64 * 0.2, 0.1));
        let direct = expm(&m) * &v;
        let via = expm_action(&m, &v);
        assert!((&direct - &via).norm() < 1e-11 * via.norm());
    }

    #[test]
    fn expm_of_diagonal() {
        let m = CMatrix::from_diagonal(&DVector::from_vec(vec![c(0.0, 1.0), c(-0.5, 0.0)]));
        let e = expm(&m);
        assert!((e[(0, 0)] - c(0.0, 1.0).exp()).norm() < 1e-14);
        assert!((e[(1, 1)] - (-0.5f64).exp()).norm() < 1e-14);
    }
}
