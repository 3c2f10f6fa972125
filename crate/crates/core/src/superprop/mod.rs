//! Free superpropagator, first-order anharmonic corrections and the
//! numerical Dyson terms that check them.
//!
//! The free superpropagator factorizes into a propagator for the bra path
//! and a conjugate one for the ket path,
//! `𝒢₀(Q,q;T|Q′,q′) = G₀(Q,Q′;T) conj G₀(q,q′;T)`, identically for
//! classical and quantum dynamics. For `V = λx⁴` the first-order result is
//! `𝒢 = 𝒢₀ (1 − (i/ħ)λ[C₁Γ_QM + C₂Γ_CL])` with `(C₁,C₂) = (1,0)` for
//! quantum and `(½,½)` for classical dynamics.

mod grid;

pub use grid::{dyson_iterate, DysonKernel};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::parallel::map_slice;
use crate::potential::{Kind, Polynomial};
use crate::quad::integrate;
use crate::{Error, Result, C64};

/// Endpoints `(Q_f, q_f)` at the final time and `(Q_i, q_i)` at the
/// initial time, duration `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatorPoint {
    pub big_q_f: f64,
    pub small_q_f: f64,
    pub big_q_i: f64,
    pub small_q_i: f64,
    pub t: f64,
    pub mass: f64,
    pub hbar: f64,
}

impl PropagatorPoint {
    /// Unit mass and ħ.
    pub fn new(big_q_f: f64, small_q_f: f64, big_q_i: f64, small_q_i: f64, t: f64) -> Self {
        Self {
            big_q_f,
            small_q_f,
            big_q_i,
            small_q_i,
            t,
            mass: 1.0,
            hbar: 1.0,
        }
    }

    /// Bra and ket roles exchanged: `(q_f, Q_f, q_i, Q_i)`.
    pub fn swapped(&self) -> Self {
        Self {
            big_q_f: self.small_q_f,
            small_q_f: self.big_q_f,
            big_q_i: self.small_q_i,
            small_q_i: self.big_q_i,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderCoefficients {
    pub c1: f64,
    pub c2: f64,
}

impl FirstOrderCoefficients {
    pub fn for_kind(kind: Kind) -> Self {
        match kind {
            Kind::Quantum => Self { c1: 1.0, c2: 0.0 },
            Kind::Classical => Self { c1: 0.5, c2: 0.5 },
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0) {
        return Err(Error::NonpositiveTime(t));
    }
    Ok(())
}

/// `G₀(x,y;T) = (m/2πiħT)^{1/2} exp(im(x−y)²/2ħT)` with
/// `(1/i)^{1/2} = e^{−iπ/4}`.
pub fn free_propagator(x: f64, y: f64, t: f64, mass: f64, hbar: f64) -> Result<C64> {
    check_time(t)?;
    let amp = (mass / (2.0 * PI * hbar * t)).sqrt();
    Ok(C64::from_polar(
        amp,
        mass * (x - y).powi(2) / (2.0 * hbar * t) - PI / 4.0,
    ))
}

pub fn free_superpropagator(pt: &PropagatorPoint) -> Result<C64> {
    let bra = free_propagator(pt.big_q_f, pt.big_q_i, pt.t, pt.mass, pt.hbar)?;
    let ket = free_propagator(pt.small_q_f, pt.small_q_i, pt.t, pt.mass, pt.hbar)?;
    Ok(bra * ket.conj())
}

fn gamma_qm_half(q: f64, qp: f64, t: f64, mass: f64, hbar: f64) -> C64 {
    let quantum = C64::new(
        0.0,
        0.5 * hbar * t / mass * (3.0 * q * q + 4.0 * q * qp + 3.0 * qp * qp),
    );
    let classical = q.powi(4) + q.powi(3) * qp + q * q * qp * qp + q * qp.powi(3) + qp.powi(4);
    (quantum + classical) * (t / 5.0)
}

/// `Γ_QM`, with `Q := Q_f`, `Q′ := Q_i`, `q := q_f`, `q′ := q_i`.
pub fn gamma_qm(pt: &PropagatorPoint) -> C64 {
    gamma_qm_half(pt.big_q_f, pt.big_q_i, pt.t, pt.mass, pt.hbar)
        - gamma_qm_half(pt.small_q_f, pt.small_q_i, pt.t, pt.mass, pt.hbar).conj()
}

/// `Γ_CL`. The `iħT/m` term is symmetric under bra/ket exchange; only the
/// quartic bracket is antisymmetrized.
pub fn gamma_cl(pt: &PropagatorPoint) -> C64 {
    let (q, qp, s, sp) = (pt.big_q_f, pt.big_q_i, pt.small_q_f, pt.small_q_i);
    let bracket = |q: f64, qp: f64, s: f64, sp: f64| {
        q.powi(3) * (4.0 * s + sp)
            + q * q * qp * (3.0 * s + 2.0 * sp)
            + q * qp * qp * (2.0 * s + 3.0 * sp)
            + qp.powi(3) * (s + 4.0 * sp)
    };
    let quantum = C64::new(
        0.0,
        pt.hbar * pt.t / pt.mass * (3.0 * q * s + 2.0 * q * sp + 2.0 * qp * s + 3.0 * qp * sp),
    );
    let classical = 0.5 * (bracket(q, qp, s, sp) - bracket(s, sp, q, qp));
    (quantum + classical) * (pt.t / 5.0)
}

/// `𝒢₀ (1 − (i/ħ)λ[C₁Γ_QM + C₂Γ_CL])`.
pub fn first_order_superpropagator(pt: &PropagatorPoint, lambda: f64, kind: Kind) -> Result<C64> {
    let g0 = free_superpropagator(pt)?;
    if lambda == 0.0 {
        return Ok(g0);
    }
    let c = FirstOrderCoefficients::for_kind(kind);
    let gamma = gamma_qm(pt) * c.c1 + gamma_cl(pt) * c.c2;
    Ok(g0 * (C64::new(1.0, 0.0) - C64::new(0.0, lambda / pt.hbar) * gamma))
}

/// `(a, b, c)`: the superpotential of `V` as `Σ c xᵃ yᵇ`.
pub fn superpotential_monomials(v: &Polynomial, kind: Kind) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    match kind {
        Kind::Quantum => {
            for (k, &c) in v.coeffs().iter().enumerate().skip(1) {
                if c != 0.0 {
                    out.push((k, 0, c));
                    out.push((0, k, -c));
                }
            }
        }
        Kind::Classical => {
            // (x − y)·Σ k cₖ ((x+y)/2)^{k−1}
            let n = v.coeffs().len();
            let mut table = vec![vec![0.0; n + 1]; n + 1];
            for (k, &c) in v.coeffs().iter().enumerate().skip(1) {
                if c == 0.0 {
                    continue;
                }
                let scale = k as f64 * c * 0.5f64.powi(k as i32 - 1);
                let mut binom = 1.0;
                for j in 0..k {
                    // ((x+y))^{k−1} term x^j y^{k−1−j}
                    let term = scale * binom;
                    table[j + 1][k - 1 - j] += term;
                    table[j][k - j] -= term;
                    binom = binom * (k - 1 - j) as f64 / (j + 1) as f64;
                }
            }
            for (a, row) in table.iter().enumerate() {
                for (b, &c) in row.iter().enumerate() {
                    if c != 0.0 {
                        out.push((a, b, c));
                    }
                }
            }
        }
    }
    out
}

/// Moments `E[xᵃ]`, `a = 0..=n`, of a Gaussian with complex mean and
/// variance: `m_a = μ m_{a−1} + (a−1) s² m_{a−2}`.
fn gaussian_moments(mu: C64, var: C64, n: usize) -> Vec<C64> {
    let mut m = vec![C64::new(1.0, 0.0); n + 1];
    if n >= 1 {
        m[1] = mu;
    }
    for a in 2..=n {
        m[a] = mu * m[a - 1] + var * (a - 1) as f64 * m[a - 2];
    }
    m
}

/// Quadrature settings for [`dyson_first_order_numeric`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DysonQuadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for DysonQuadrature {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-10,
            max_panels: 200,
        }
    }
}

/// First-order Dyson term
/// `−(i/ħ)∫₀ᵀdτ ∫dx dy 𝒢₀(f|x,y;T−τ) 𝒱(x,y) 𝒢₀(x,y;τ|i)`.
///
/// The product of the two free propagators in `x` equals
/// `G₀(Q_f,Q_i;T)` times a complex Gaussian in `x` with mean
/// `Q_i + (Q_f−Q_i)τ/T` and variance `iħτ(T−τ)/mT` (conjugate for `y`),
/// so the `x, y` integrals reduce to Gaussian moments. The remaining `τ`
/// integral is done by adaptive Gauss-Kronrod.
pub fn dyson_first_order_numeric(
    pt: &PropagatorPoint,
    v: &Polynomial,
    kind: Kind,
    quad: DysonQuadrature,
) -> Result<C64> {
    check_time(pt.t)?;
    let monomials = superpotential_monomials(v, kind);
    if monomials.is_empty() {
        return Ok(C64::new(0.0, 0.0));
    }
    let max_deg = monomials
        .iter()
        .map(|&(a, b, _)| a.max(b))
        .max()
        .unwrap_or(0);
    let t = pt.t;
    let integrand = |tau: f64| {
        let frac = tau / t;
        let var = C64::new(0.0, pt.hbar * tau * (t - tau) / (pt.mass * t));
        let mx = gaussian_moments(
            C64::new(pt.big_q_i + (pt.big_q_f - pt.big_q_i) * frac, 0.0),
            var,
            max_deg,
        );
        let my = gaussian_moments(
            C64::new(pt.small_q_i + (pt.small_q_f - pt.small_q_i) * frac, 0.0),
            var.conj(),
            max_deg,
        );
        monomials
            .iter()
            .map(|&(a, b, c)| mx[a] * my[b] * c)
            .sum::<C64>()
    };
    let q = integrate(
        integrand,
        0.0,
        t,
        quad.abs_tol,
        quad.rel_tol,
        quad.max_panels,
    )?;
    Ok(free_superpropagator(pt)? * C64::new(0.0, -1.0 / pt.hbar) * q.value)
}

/// One row of the `propagator` report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorRow {
    pub point: PropagatorPoint,
    pub g0: C64,
    pub gamma_qm: C64,
    pub gamma_cl: C64,
    pub g_cl: C64,
    pub g_qm: C64,
    pub numeric_cl: C64,
    pub numeric_qm: C64,
    /// Largest `|closed − numeric|` of the first-order corrections.
    pub abs_error: f64,
}

/// Closed forms and numeric checks for a batch of endpoints (parallel).
pub fn propagator_table(
    points: &[PropagatorPoint],
    lambda: f64,
    quad: DysonQuadrature,
) -> Result<Vec<PropagatorRow>> {
    let v = Polynomial::quartic(lambda);
    map_slice(points, |pt| {
        let g0 = free_superpropagator(pt)?;
        let g_cl = first_order_superpropagator(pt, lambda, Kind::Classical)?;
        let g_qm = first_order_superpropagator(pt, lambda, Kind::Quantum)?;
        let numeric_cl = dyson_first_order_numeric(pt, &v, Kind::Classical, quad)?;
        let numeric_qm = dyson_first_order_numeric(pt, &v, Kind::Quantum, quad)?;
        let abs_error = ((g_cl - g0) - numeric_cl)
            .norm()
            .max(((g_qm - g0) - numeric_qm).norm());
        Ok(PropagatorRow {
            point: *pt,
            g0,
            gamma_qm: gamma_qm(pt),
            gamma_cl: gamma_cl(pt),
            g_cl,
            g_qm,
            numeric_cl,
            numeric_qm,
            abs_error,
        })
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn free_propagator_modulus_and_errors() {
        let g = free_propagator(0.3, 0.3, 1.0, 1.0, 1.0).unwrap();
        assert!((g.norm() - 0.398_942_280_401_432_7).abs() < 1e-15);
        let g2 = free_propagator(0.3, 2.7, 1.0, 1.0, 1.0).unwrap();
        assert!((g2.norm() - g.norm()).abs() < 1e-15);
        assert!(matches!(
            free_propagator(0.0, 0.0, 0.0, 1.0, 1.0),
            Err(Error::NonpositiveTime(_))
        ));
        assert!(free_superpropagator(&PropagatorPoint::new(0.0, 0.0, 0.0, 0.0, -1.0)).is_err());
    }

    #[test]
    fn semigroup_by_rotated_contour() {
        // ∫dz G₀(x,z;T₁)G₀(z,y;T₂) along z = c + e^{iπ/4}s, where the
        // Gaussian phase becomes a decaying Gaussian.
        let (x, y, t1, t2, m, hbar) = (0.7, -0.4, 0.6, 1.1, 1.3, 0.9);
        let a = m / (2.0 * hbar) * (1.0 / t1 + 1.0 / t2);
        let c = (x / t1 + y / t2) / (1.0 / t1 + 1.0 / t2);
        let rot = C64::from_polar(1.0, PI / 4.0);
        let g = |u: C64, v: C64, t: f64| {
            let d = u - v;
            C64::from_polar((m / (2.0 * PI * hbar * t)).sqrt(), -PI / 4.0)
                * (C64::new(0.0, m / (2.0 * hbar * t)) * d * d).exp()
        };
        let half_width = (40.0 / a).sqrt();
        let q = integrate(
            |s| {
                let z = C64::new(c, 0.0) + rot * s;
                g(C64::new(x, 0.0), z, t1) * g(z, C64::new(y, 0.0), t2) * rot
            },
            -half_width,
            half_width,
            1e-14,
            1e-12,
            200,
        )
        .unwrap();
        let direct = free_propagator(x, y, t1 + t2, m, hbar).unwrap();
        assert!(close(q.value, direct, 1e-10));
    }

    #[test]
    fn superpropagator_cases() {
        let pt = PropagatorPoint {
            mass: 1.7,
            hbar: 0.8,
            ..PropagatorPoint::new(0.4, 0.4, -1.0, -1.0, 0.9)
        };
        let g = free_superpropagator(&pt).unwrap();
        assert!(g.im.abs() < 1e-15);
        assert!((g.re - 1.7 / (2.0 * PI * 0.8 * 0.9)).abs() < 1e-14);
        let p2 = PropagatorPoint::new(0.3, -0.8, 1.1, 0.2, 0.5);
        let a = free_superpropagator(&p2).unwrap();
        let b = free_superpropagator(&p2.swapped()).unwrap();
        assert!(close(a, b.conj(), 1e-15));
        let factors = free_propagator(0.3, 1.1, 0.5, 1.0, 1.0).unwrap()
            * free_propagator(-0.8, 0.2, 0.5, 1.0, 1.0).unwrap().conj();
        assert!(close(a, factors, 1e-15));
    }

    #[test]
    fn gamma_examples() {
        let g = gamma_qm(&PropagatorPoint::new(1.0, 0.0, 1.0, 0.0, 1.0));
        assert!(close(g, C64::new(1.0, 1.0), 1e-14));
        let g = gamma_qm(&PropagatorPoint::new(1.0, 1.0, 0.0, 0.0, 1.0));
        assert!(close(g, C64::new(0.0, 0.6), 1e-14));
        let g = gamma_cl(&PropagatorPoint::new(1.0, 0.0, 1.0, 0.0, 1.0));
        assert!(close(g, C64::new(0.0, 0.0), 1e-14));
        let g = gamma_cl(&PropagatorPoint::new(1.0, 1.0, 0.0, 0.0, 1.0));
        assert!(close(g, C64::new(0.0, 0.6), 1e-14));
    }

    #[test]
    fn first_order_cases() {
        let pt = PropagatorPoint::new(1.0, 0.0, 1.0, 0.0, 1.0);
        assert_eq!(
            first_order_superpropagator(&pt, 0.0, Kind::Classical).unwrap(),
            free_superpropagator(&pt).unwrap()
        );
        let lambda = 0.3;
        let g0 = free_superpropagator(&pt).unwrap();
        let diff = first_order_superpropagator(&pt, lambda, Kind::Quantum).unwrap()
            - first_order_superpropagator(&pt, lambda, Kind::Classical).unwrap();
        let expect = g0 * C64::new(0.0, -lambda) * (gamma_qm(&pt) * 0.5 - gamma_cl(&pt) * 0.5);
        assert!(close(diff, expect, 1e-14));
    }

    #[test]
    fn monomials_reproduce_superpotential() {
        let v = Polynomial::new(vec![0.2, -0.5, 0.3, 0.7, -0.4, 0.1]);
        for kind in [Kind::Quantum, Kind::Classical] {
            let mono = superpotential_monomials(&v, kind);
            for &(x, y) in &[(0.3, -1.2), (1.5, 0.7), (-0.4, -0.9)] {
                let s: f64 = mono
                    .iter()
                    .map(|&(a, b, c)| c * f64::powi(x, a as i32) * f64::powi(y, b as i32))
                    .sum();
                let direct = crate::potential::super_potential(&v, kind, x, y);
                assert!((s - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn numeric_dyson_matches_closed_forms() {
        let lambda = 0.37;
        let v = Polynomial::quartic(lambda);
        let quad = DysonQuadrature::default();
        for pt in [
            PropagatorPoint::new(0.8, -0.3, 0.2, 0.6, 0.7),
            PropagatorPoint {
                mass: 2.0,
                hbar: 0.5,
                ..PropagatorPoint::new(-1.1, 0.4, 0.9, -0.2, 1.3)
            },
        ] {
            let g0 = free_superpropagator(&pt).unwrap();
            for kind in [Kind::Quantum, Kind::Classical] {
                let closed = first_order_superpropagator(&pt, lambda, kind).unwrap() - g0;
                let numeric = dyson_first_order_numeric(&pt, &v, kind, quad).unwrap();
                assert!(
                    (closed - numeric).norm() <= 1e-10 * closed.norm(),
                    "{kind:?}: {closed} vs {numeric}"
                );
            }
        }
        assert_eq!(
            dyson_first_order_numeric(
                &PropagatorPoint::new(1.0, 0.0, 0.0, 1.0, 1.0),
                &Polynomial::zero(),
                Kind::Classical,
                quad
            )
            .unwrap(),
            C64::new(0.0, 0.0)
        );
    }

    #[test]
    fn numeric_dyson_is_linear_in_lambda() {
        let pt = PropagatorPoint::new(0.5, 0.1, -0.3, 0.8, 0.6);
        let quad = DysonQuadrature::default();
        let a = dyson_first_order_numeric(&pt, &Polynomial::quartic(0.2), Kind::Classical, quad)
            .unwrap();
        let b = dyson_first_order_numeric(&pt, &Polynomial::quartic(0.4), Kind::Classical, quad)
            .unwrap();
        assert!((b - a * 2.0).norm() <= 1e-12 * b.norm());
    }

    #[test]
    fn correction_scales_linearly_at_short_times() {
        let rel = |t: f64| {
            let pt = PropagatorPoint::new(1.0, 0.5, 0.8, 0.2, t);
            let g0 = free_superpropagator(&pt).unwrap();
            ((first_order_superpropagator(&pt, 1.0, Kind::Classical).unwrap() - g0) / g0).norm()
        };
        let slope = (rel(0.1) / rel(0.01)).log10();
        assert!((slope - 1.0).abs() < 0.1, "slope {slope}");
    }

    #[test]
    fn batch_table() {
        let pts = [
            PropagatorPoint::new(0.1, 0.2, 0.3, 0.4, 0.5),
            PropagatorPoint::new(-0.5, 0.5, 1.0, 0.0, 0.25),
        ];
        let rows = propagator_table(&pts, 0.2, DysonQuadrature::default()).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.abs_error < 1e-10));
    }

    proptest! {
        #[test]
        fn exchange_structure(q in -2.0..2.0f64, s in -2.0..2.0f64, qp in -2.0..2.0f64, sp in -2.0..2.0f64, t in 0.01..2.0f64) {
            let pt = PropagatorPoint::new(q, s, qp, sp, t);
            let sw = pt.swapped();
            prop_assert!(close(gamma_qm(&pt), -gamma_qm(&sw).conj(), 1e-12));
            prop_assert!(close(gamma_cl(&pt), -gamma_cl(&sw).conj(), 1e-12));
        }

        #[test]
        fn diagonal_endpoints_give_imaginary_gammas(q in -2.0..2.0f64, qp in -2.0..2.0f64, t in 0.01..2.0f64) {
            let pt = PropagatorPoint::new(q, q, qp, qp, t);
            prop_assert!(gamma_qm(&pt).re.abs() < 1e-12);
            prop_assert!(gamma_cl(&pt).re.abs() < 1e-12);
        }
    }
}
