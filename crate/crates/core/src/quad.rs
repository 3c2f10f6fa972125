//! Adaptive Gauss–Kronrod (7/15) quadrature for complex integrands.

use crate::{Error, Result, C64};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: C64,
    pub error: f64,
    pub evaluations: usize,
}

fn kronrod_panel<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    let k = kronrod * half;
    let g = gauss * half;
    (k, (k - g).norm())
}

/// Integrates `f` over `[a, b]` by interval bisection until the summed
/// Kronrod–Gauss error estimate drops below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: Fn(f64) -> C64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<Quadrature> {
    let (v0, e0) = kronrod_panel(&f, a, b);
    let mut panels = vec![(a, b, v0, e0)];
    let mut evaluations = 15;
    loop {
        let value: C64 = panels.iter().map(|p| p.2).sum();
        let error: f64 = panels.iter().map(|p| p.3).sum();
        let target = abs_tol.max(rel_tol * value.norm());
        if error <= target {
            return Ok(Quadrature {
                value,
                error,
                evaluations,
            });
        }
        if panels.len() >= max_panels {
            return Err(Error::QuadratureNotConverged {
                estimate: error,
                tolerance: target,
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (vl, el) = kronrod_panel(&f, lo, mid);
        let (vr, er) = kronrod_panel(&f, mid, hi);
        evaluations += 30;
        panels.push((lo, mid, vl, el));
        panels.push((mid, hi, vr, er));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let q = integrate(|x| C64::new(x.powi(6), x), 0.0, 2.0, 1e-13, 1e-13, 50).unwrap();
        assert!((q.value.re - 128.0 / 7.0).abs() < 1e-12);
        assert!((q.value.im - 2.0).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_needs_refinement() {
        let q = integrate(
            |x| C64::new(0.0, 40.0 * x).exp(),
            0.0,
            1.0,
            1e-12,
            1e-12,
            500,
        )
        .unwrap();
        let exact = (C64::new(0.0, 40.0).exp() - 1.0) / C64::new(0.0, 40.0);
        assert!((q.value - exact).norm() < 1e-11);
    }

    #[test]
    fn reports_non_convergence() {
        let r = integrate(
            |x| C64::new(1.0 / x.abs().sqrt().max(1e-300), 0.0),
            -1.0,
            1.0,
            1e-14,
            1e-14,
            4,
        );
        assert!(matches!(r, Err(Error::QuadratureNotConverged { .. })));
    }
}
