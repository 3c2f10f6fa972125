use nalgebra::DVector;

use super::EvolutionConfig;
use crate::linalg::{
    expm, expm_action, hermiticity_deviation, max_abs, unvectorize, vectorize, HermitianEigen,
    DENSE_LIMIT,
};
use crate::liouvillian::LiouvilleOperator;
use crate::{CMatrix, Error, Result, C64};

#[derive(Debug, Clone)]
enum Repr {
    Hermitian(HermitianEigen),
    General(CMatrix),
}

/// `𝒰(t) = exp(−iℒt/ħ)` for a fixed dense generator.
///
/// Hermitian generators are diagonalized once so that every later time
/// costs two matrix-vector products; others apply the exponential to
/// the state by scaled Taylor steps at each requested time.
#[derive(Debug, Clone)]
pub struct ExactPropagator {
    n: usize,
    hbar: f64,
    repr: Repr,
}

impl ExactPropagator {
    pub fn new(l: &dyn LiouvilleOperator, hbar: f64) -> Result<Self> {
        Self::from_dense(l.dense()?, hbar)
    }

    pub fn from_dense(m: CMatrix, hbar: f64) -> Result<Self> {
        let dim = m.nrows();
        if dim > DENSE_LIMIT {
            return Err(Error::DimensionTooLarge {
                dim,
                max: DENSE_LIMIT,
            });
        }
        let n = (dim as f64).sqrt().round() as usize;
        if n * n != dim || m.ncols() != dim {
            return Err(Error::InvalidParameter(format!(
                "{:?} is not a Liouville-space matrix",
                m.shape()
            )));
        }
        let repr = if hermiticity_deviation(&m) <= 1e-12 * (1.0 + max_abs(&m)) {
            Repr::Hermitian(HermitianEigen::new(&m)?)
        } else {
            Repr::General(m)
        };
        Ok(Self { n, hbar, repr })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Dense `𝒰(t)`.
    pub fn propagator(&self, t: f64) -> CMatrix {
        let w = -t / self.hbar;
        match &self.repr {
            Repr::Hermitian(e) => e.function(|lam| C64::from_polar(1.0, w * lam)),
            Repr::General(m) => expm(&(m * C64::new(0.0, w))),
        }
    }

    pub fn apply_vec(&self, v: &DVector<C64>, t: f64) -> DVector<C64> {
        if t == 0.0 {
            return v.clone();
        }
        match &self.repr {
            Repr::Hermitian(e) => {
                let w = -t / self.hbar;
                let mut c = e.vectors.adjoint() * v;
                for (ck, &lam) in c.iter_mut().zip(&e.values) {
                    *ck *= C64::from_polar(1.0, w * lam);
                }
                &e.vectors * c
            }
            Repr::General(m) => expm_action(&(m * C64::new(0.0, -t / self.hbar)), v),
        }
    }

    pub fn apply(&self, rho: &CMatrix, t: f64) -> CMatrix {
        unvectorize(&self.apply_vec(&vectorize(rho), t), self.n, self.n)
    }
}

/// `ρ(t) = exp(−iℒt/ħ) ρ₀`.
pub fn evolve_exact(
    l: &dyn LiouvilleOperator,
    rho0: &CMatrix,
    t: f64,
    hbar: f64,
) -> Result<CMatrix> {
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    Ok(ExactPropagator::new(l, hbar)?.apply(rho0, t))
}

/// Midpoint-exponential product `∏ₖ exp(−iℒ(tₖ + Δt/2)Δt/ħ)` (second order).
/// `generator(t)` returns the dense generator at time `t`.
pub fn evolve_ordered<F>(generator: F, rho0: &CMatrix, cfg: &EvolutionConfig) -> Result<CMatrix>
where
    F: Fn(f64) -> Result<CMatrix>,
{
    cfg.validate()?;
    let n = rho0.nrows();
    let dt = cfg.dt();
    let mut v = vectorize(rho0);
    for k in 0..cfg.n_steps {
        let mid = cfg.t0 + (k as f64 + 0.5) * dt;
        let m = generator(mid)?;
        if m.nrows() != n * n {
            return Err(Error::InvalidParameter(format!(
                "generator at t={mid} has dimension {}",
                m.nrows()
            )));
        }
        v = expm(&(m * C64::new(0.0, -dt / cfg.hbar))) * v;
    }
    Ok(unvectorize(&v, n, n))
}

/// Evolution under `ℒ₀ + ℒ′` in the interaction picture: the rotated
/// perturbation `𝒰₀(τ)⁻¹ ℒ′ 𝒰₀(τ)` is integrated with
/// [`evolve_ordered`], then rotated back with `𝒰₀(t₁ − t₀)`.
pub fn evolve_interaction_picture(
    l0: &dyn LiouvilleOperator,
    l1: &dyn LiouvilleOperator,
    rho0: &CMatrix,
    cfg: &EvolutionConfig,
) -> Result<CMatrix> {
    cfg.validate()?;
    let b = l1.dense()?;
    let u0 = ExactPropagator::new(l0, cfg.hbar)?;
    let rotated = |tau: f64| -> Result<CMatrix> {
        let s = tau - cfg.t0;
        Ok(u0.propagator(-s) * &b * u0.propagator(s))
    };
    let rho_i = evolve_ordered(rotated, rho0, cfg)?;
    Ok(u0.apply(&rho_i, cfg.t1 - cfg.t0))
}

/// Dyson terms `𝒰⁽⁰⁾ … 𝒰⁽ᵏ⁾` of `exp(−i(A + B)t/ħ)` in powers of `B`.
///
/// Computed exactly as the first block row of the exponential of the block
/// bidiagonal matrix with `−iAt/ħ` on the diagonal and `−iBt/ħ` above it.
pub fn dyson_terms(
    a: &CMatrix,
    b: &CMatrix,
    t: f64,
    hbar: f64,
    order: usize,
) -> Result<Vec<CMatrix>> {
    let d = a.nrows();
    if b.shape() != (d, d) || a.ncols() != d {
        return Err(Error::InvalidParameter(
            "Dyson generators must be square and equal-sized".into(),
        ));
    }
    let big = (order + 1) * d;
    if big > 2 * DENSE_LIMIT {
        return Err(Error::DimensionTooLarge {
            dim: big,
            max: 2 * DENSE_LIMIT,
        });
    }
    let scale = C64::new(0.0, -t / hbar);
    let mut m = CMatrix::zeros(big, big);
    for k in 0..=order {
        m.view_mut((k * d, k * d), (d, d)).copy_from(&(a * scale));
        if k < order {
            m.view_mut((k * d, (k + 1) * d), (d, d))
                .copy_from(&(b * scale));
        }
    }
    let e = expm(&m);
    Ok((0..=order)
        .map(|k| e.view((0, k * d), (d, d)).into_owned())
        .collect())
}

/// `ρ ≈ 𝒰₀(t)ρ₀ − (i/ħ)∫₀ᵗ 𝒰₀(t−τ) ℒ′ 𝒰₀(τ) ρ₀ dτ`.
pub fn first_order_interaction(
    l0: &dyn LiouvilleOperator,
    l1: &dyn LiouvilleOperator,
    rho0: &CMatrix,
    t: f64,
    hbar: f64,
) -> Result<CMatrix> {
    let terms = dyson_terms(&l0.dense()?, &l1.dense()?, t, hbar, 1)?;
    let n = rho0.nrows();
    let u = &terms[0] + &terms[1];
    Ok(unvectorize(&(u * vectorize(rho0)), n, n))
}
