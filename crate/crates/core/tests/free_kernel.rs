use liouville::evolution::{evolve_trotter, EvolutionConfig, Method};
use liouville::liouvillian::GridLiouvillian;
use liouville::potential::{Kind, Polynomial};
use liouville::superprop::{free_superpropagator, PropagatorPoint};
use liouville::superspace::{SuperDensity, SuperGrid};
use liouville::C64;

const X0: f64 = -0.5;
const P0: f64 = 1.2;
const SIGMA: f64 = 0.6;

fn psi(x: f64) -> C64 {
    let amp = (-(x - X0).powi(2) / (4.0 * SIGMA * SIGMA)).exp()
        / (2.0 * std::f64::consts::PI * SIGMA * SIGMA).powf(0.25);
    C64::from_polar(amp, P0 * x)
}

#[test]
fn free_kernel_transports_mean_ballistically() {
    let t = 0.5;
    // initial-point trapezoid
    let (lo, hi, m) = (X0 - 5.0, X0 + 5.0, 300);
    let dx = (hi - lo) / m as f64;
    let init: Vec<(f64, C64)> = (0..=m)
        .map(|a| {
            let x = lo + a as f64 * dx;
            let w = if a == 0 || a == m { 0.5 } else { 1.0 };
            (x, psi(x) * w * dx)
        })
        .collect();
    let mut norm = 0.0;
    let mut first = 0.0;
    let out_h = 0.05;
    for k in 0..200 {
        let q = -5.0 + k as f64 * out_h;
        let mut rho = C64::new(0.0, 0.0);
        for &(qp, wa) in &init {
            for &(sp, wb) in &init {
                let g = free_superpropagator(&PropagatorPoint::new(q, q, qp, sp, t)).unwrap();
                rho += g * wa * wb.conj();
            }
        }
        norm += rho.re * out_h;
        first += q * rho.re * out_h;
    }
    let mean_kernel = first / norm;
    assert!((norm - 1.0).abs() < 1e-4, "norm {norm}");

    let grid = SuperGrid::centered(8.0, 128).unwrap();
    let l = GridLiouvillian::new(&Polynomial::zero(), grid, Kind::Classical, 1.0, 1.0).unwrap();
    let rho0 = SuperDensity::pure(grid, 1.0, 1.0, psi);
    let rho = evolve_trotter(
        &l,
        &rho0,
        &EvolutionConfig::new(t, 10, Method::TrotterStrang),
    )
    .unwrap();
    let mean_grid = rho.expect_x().unwrap();

    assert!(
        (mean_kernel - mean_grid).abs() < 1e-4,
        "{mean_kernel} vs {mean_grid}"
    );
    assert!((mean_grid - (X0 + P0 * t)).abs() < 1e-4);
}
