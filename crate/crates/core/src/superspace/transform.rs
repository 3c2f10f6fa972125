use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::{PhaseDensity, PhaseGrid, SuperDensity, SuperGrid, HERMITICITY_TOL};
use crate::parallel::map_range;
use crate::spectral::SpectralPlan;
use crate::{CMatrix, Error, Result, C64};

/// Largest `|l|` with `(s ± l)/2` both inside `[0, n)` and `l ≡ s (mod 2)`.
fn l_max(s: usize, n: usize) -> usize {
    s.min(2 * n - 2 - s)
}

/// `ρ(x,p) → ρ(Q,q)`: discrete Fourier transform along `p`, then the exact
/// lattice rotation `(Qᵢ, qⱼ) = (x_{i+j} ± y_{i−j}/2)`.
///
/// The output is Hermitian by construction.
pub fn phase_to_super(rho: &PhaseDensity, mass: f64) -> Result<SuperDensity> {
    let pg = rho.grid;
    let grid = pg.super_grid()?;
    if rho.values.shape() != (pg.n_x, pg.n_p) {
        return Err(Error::GridMismatch(format!(
            "phase values are {:?}, grid is {}×{}",
            rho.values.shape(),
            pg.n_x,
            pg.n_p
        )));
    }
    let n = grid.n;
    let n_p = pg.n_p;
    let h = grid.step;
    let plan = SpectralPlan::new(n_p);
    let scale = pg.dp / (2.0 * PI * pg.hbar);

    // For each x_s: g_l = (Δp/2πħ) Σ_m e^{i p_m l h/ħ} ρ(x_s, p_m), l ≥ 0, l ≡ s.
    let rows: Vec<Vec<(usize, usize, C64)>> = map_range(2 * n - 1, |s| {
        let mut buf: Vec<C64> = (0..n_p)
            .map(|m| C64::new(rho.values[(s, m)], 0.0))
            .collect();
        plan.inverse_slice(&mut buf);
        let mut out = Vec::new();
        let lm = l_max(s, n);
        let mut l = s % 2;
        while l <= lm {
            let y = l as f64 * h;
            let g = buf[l] * C64::from_polar(scale, pg.p_min * y / pg.hbar);
            out.push(((s + l) / 2, (s - l) / 2, g));
            l += 2;
        }
        out
    });

    let mut values = CMatrix::zeros(n, n);
    for entries in rows {
        for (i, j, g) in entries {
            if i == j {
                values[(i, j)] = C64::new(g.re, 0.0);
            } else {
                values[(i, j)] = g;
                values[(j, i)] = g.conj();
            }
        }
    }
    Ok(SuperDensity {
        grid,
        hbar: pg.hbar,
        mass,
        values,
    })
}

/// `ρ(Q,q) → ρ(x,p)`, the inverse of [`phase_to_super`] on the phase grid
/// returned by [`PhaseGrid::for_super`].
///
/// At fixed `x_s` only every other `y` is available, so the reconstruction
/// is periodic in `p` with half the window length. Only the central half
/// of the momentum window is filled; the outer quarters are zero. The
/// result is exact for densities confined to that central half.
pub fn super_to_phase(rho: &SuperDensity, p_center: f64) -> Result<PhaseDensity> {
    rho.check_hermitian(HERMITICITY_TOL)?;
    let grid: SuperGrid = rho.grid;
    let pg = PhaseGrid::for_super(&grid, rho.hbar, p_center);
    let n = grid.n;
    let n_p = pg.n_p;
    let h = grid.step;
    let plan = SpectralPlan::new(n_p);
    let sym = (&rho.values + rho.values.adjoint()) * C64::new(0.5, 0.0);

    let rows: Vec<Vec<f64>> = map_range(2 * n - 1, |s| {
        let mut buf = vec![C64::new(0.0, 0.0); n_p];
        let lm = l_max(s, n) as isize;
        let mut l = -lm;
        while l <= lm {
            let i = ((s as isize + l) / 2) as usize;
            let j = ((s as isize - l) / 2) as usize;
            let y = l as f64 * h;
            buf[l.rem_euclid(n_p as isize) as usize] =
                sym[(i, j)] * C64::from_polar(2.0 * h, -pg.p_min * y / rho.hbar);
            l += 2;
        }
        plan.forward_slice(&mut buf);
        let (lo, hi) = (n_p / 4, n_p - n_p / 4);
        buf.into_iter()
            .enumerate()
            .map(|(m, z)| if (lo..hi).contains(&m) { z.re } else { 0.0 })
            .collect()
    });

    let mut values = DMatrix::zeros(pg.n_x, n_p);
    for (s, row) in rows.into_iter().enumerate() {
        for (m, v) in row.into_iter().enumerate() {
            values[(s, m)] = v;
        }
    }
    Ok(PhaseDensity { grid: pg, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (SuperGrid, PhaseGrid) {
        let g = SuperGrid::centered(12.0, 192).unwrap();
        (g, PhaseGrid::for_super(&g, 1.0, 0.0))
    }

    #[test]
    fn gaussian_matches_analytic_image() {
        let (g, pg) = setup();
        let phase = PhaseDensity::gaussian(pg, 1.5, -0.5, 0.7, 0.6);
        let sup = phase_to_super(&phase, 1.0).unwrap();
        let exact = SuperDensity::classical_gaussian(g, 1.0, 1.0, 1.5, -0.5, 0.7, 0.6);
        assert!(crate::linalg::max_abs_diff(&sup.values, &exact.values) < 1e-10);
        assert_eq!(sup.hermiticity_deviation(), 0.0);
        assert!((sup.trace() - phase.moments().norm).abs() < 1e-8);
    }

    #[test]
    fn narrow_gaussian_peak_value() {
        // δ-like input: ρ(Q,q) ≈ e^{ip0(Q−q)} N((Q+q)/2 − x0).
        let (g, pg) = setup();
        let sx = 3.0 * g.step;
        let phase = PhaseDensity::gaussian(pg, 0.0, 2.0, sx, 0.3);
        let sup = phase_to_super(&phase, 1.0).unwrap();
        let i0 = g.n / 2;
        let peak = 1.0 / (sx * (2.0 * PI).sqrt());
        assert!((sup.values[(i0, i0)].re - peak).abs() / peak < 0.01);
        let off = sup.values[(i0 + 1, i0 - 1)];
        let expected = C64::from_polar(
            peak * (-(0.3 * 2.0 * g.step).powi(2) / 2.0).exp(),
            2.0 * 2.0 * g.step,
        );
        assert!((off - expected).norm() / peak < 0.01);
    }

    #[test]
    fn uniform_maps_to_diagonal() {
        let (_, pg) = setup();
        let phase = PhaseDensity::from_fn(pg, |_, _| 1.0);
        let sup = phase_to_super(&phase, 1.0).unwrap();
        for i in 0..sup.grid.n {
            for j in 0..sup.grid.n {
                if i != j {
                    assert!(sup.values[(i, j)].norm() < 1e-12);
                }
            }
        }
        assert!(sup.values[(40, 40)].re > 1.0);
    }

    #[test]
    fn round_trip_interior() {
        let (_, pg) = setup();
        let phase = PhaseDensity::gaussian(pg, 0.3, 0.4, 0.8, 0.5);
        let back = super_to_phase(&phase_to_super(&phase, 1.0).unwrap(), 0.0).unwrap();
        let mut worst = 0.0_f64;
        for s in 0..pg.n_x {
            if pg.x(s).abs() > 4.0 {
                continue;
            }
            for m in 0..pg.n_p {
                worst = worst.max((back.values[(s, m)] - phase.values[(s, m)]).abs());
            }
        }
        assert!(worst < 1e-8, "round trip error {worst:e}");
    }

    #[test]
    fn gaussian_operator_to_wigner() {
        // exp(−(Q²+q²)/2) ↦ x-width 1/√2, p-width 1/√2 Gaussian; real and normalizable.
        let (g, _) = setup();
        let values = CMatrix::from_fn(g.n, g.n, |i, j| {
            C64::new(
                (-(g.point(i).powi(2) + g.point(j).powi(2)) / 2.0).exp(),
                0.0,
            )
        });
        let rho = SuperDensity::new(g, 1.0, 1.0, values).unwrap();
        let w = super_to_phase(&rho, 0.0).unwrap();
        let m = w.moments();
        assert!((m.norm - rho.trace()).abs() < 1e-8);
        let pg = w.grid;
        let s0 = pg.n_x / 2;
        let m0 = pg.n_p / 2;
        // ρ(x,p) = 2√π e^{−x²−p²}
        let expected = 2.0 * PI.sqrt();
        assert!((w.values[(s0, m0)] - expected).abs() < 1e-8);
        assert!(
            (w.values[(s0 + 4, m0 + 3)]
                - expected * (-(pg.x(s0 + 4).powi(2) + pg.p(m0 + 3).powi(2))).exp())
            .abs()
                < 1e-8
        );
    }

    #[test]
    fn phase_and_super_moments_agree() {
        let (g, pg) = setup();
        let phase = PhaseDensity::gaussian(pg, -1.2, 0.7, 0.9, 0.55);
        let pm = phase.moments();
        let sup = phase_to_super(&phase, 1.0).unwrap();
        assert!((sup.expect_x().unwrap() - pm.x).abs() < 1e-6);
        assert!((sup.expect_p().unwrap() - pm.p).abs() < 1e-6);
        assert!((sup.expect_xp_weyl().unwrap() - pm.xp).abs() < 1e-6);
        let _ = g;
    }

    #[test]
    fn non_hermitian_input_rejected() {
        let (g, _) = setup();
        let mut rho = SuperDensity::classical_gaussian(g, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0);
        rho.values[(10, 20)] += C64::new(0.0, 0.5);
        assert!(matches!(
            super_to_phase(&rho, 0.0),
            Err(Error::HermiticityViolation { .. })
        ));
    }

    #[test]
    fn mismatched_phase_grid() {
        let (_, pg) = setup();
        let bad = PhaseGrid {
            n_p: pg.n_p / 2,
            ..pg
        };
        let phase = PhaseDensity::from_fn(bad, |_, _| 0.0);
        assert!(matches!(
            phase_to_super(&phase, 1.0),
            Err(Error::GridMismatch(_))
        ));
    }
}
