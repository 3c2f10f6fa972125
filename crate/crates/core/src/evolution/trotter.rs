use super::{EvolutionConfig, ExactPropagator, Method};
use crate::liouvillian::{GridLiouvillian, LiouvilleOperator};
use crate::spectral::SpectralPlan;
use crate::superspace::SuperDensity;
use crate::{CMatrix, Error, Result, C64};

/// Boundary diagonal weight above which a run is flagged as affected by the
/// periodic truncation.
const BOUNDARY_WARN: f64 = 1e-10;

/// Precomputed split-step factors for one step size.
///
/// The kinetic substep `exp(−iΔt(T(k_Q) − T(k_q))/ħ)` is diagonal in the
/// 2-D Fourier basis; the potential substep `exp(−iΔt D(Q,q)/ħ)` with
/// `D = V(Q) − V(q) + ℰ` is diagonal on the grid.
#[derive(Debug, Clone)]
pub struct TrotterStepper {
    method: Method,
    plan: SpectralPlan,
    kinetic_phase: Vec<f64>,
    dt_over_hbar: f64,
    potential_full: CMatrix,
    potential_half: CMatrix,
}

impl TrotterStepper {
    pub fn new(l: &GridLiouvillian, dt: f64, method: Method) -> Result<Self> {
        if !matches!(method, Method::TrotterLie | Method::TrotterStrang) {
            return Err(Error::InvalidParameter(format!(
                "{method:?} is not a split-step method"
            )));
        }
        let d = l.diagonal();
        let w = dt / l.hbar;
        let phase = |scale: f64| d.map(|v| C64::from_polar(1.0, -scale * w * v));
        Ok(Self {
            method,
            plan: SpectralPlan::new(l.grid.n),
            kinetic_phase: l.kinetic_energies(),
            dt_over_hbar: w,
            potential_full: phase(1.0),
            potential_half: phase(0.5),
        })
    }

    fn kinetic(&self, rho: &mut CMatrix) {
        let t = &self.kinetic_phase;
        let w = self.dt_over_hbar;
        self.plan
            .filter_2d(rho, |i, j| C64::from_polar(1.0, -w * (t[i] - t[j])));
    }

    pub fn step(&self, rho: &mut CMatrix) {
        match self.method {
            Method::TrotterLie => {
                rho.component_mul_assign(&self.potential_full);
                self.kinetic(rho);
            }
            _ => {
                rho.component_mul_assign(&self.potential_half);
                self.kinetic(rho);
                rho.component_mul_assign(&self.potential_half);
            }
        }
    }
}

pub(super) fn check_grid(
    l: &GridLiouvillian,
    rho0: &SuperDensity,
    cfg: &EvolutionConfig,
) -> Result<()> {
    if !l.grid.same_as(&rho0.grid) {
        return Err(Error::GridMismatch(
            "density and Liouvillian use different grids".into(),
        ));
    }
    if cfg.hbar != l.hbar || cfg.mass != l.mass {
        return Err(Error::InvalidParameter(format!(
            "config (ħ={}, m={}) disagrees with the Liouvillian (ħ={}, m={})",
            cfg.hbar, cfg.mass, l.hbar, l.mass
        )));
    }
    let edge = rho0.boundary_mass(2);
    if edge > BOUNDARY_WARN {
        log::warn!(
            "initial density has boundary weight {edge:.2e}; periodic truncation may matter"
        );
    }
    Ok(())
}

/// Split-step evolution on the superspace grid (Lie: order 1, Strang: order 2).
pub fn evolve_trotter(
    l: &GridLiouvillian,
    rho0: &SuperDensity,
    cfg: &EvolutionConfig,
) -> Result<SuperDensity> {
    cfg.validate()?;
    check_grid(l, rho0, cfg)?;
    let stepper = TrotterStepper::new(l, cfg.dt(), cfg.method)?;
    let mut rho = rho0.values.clone();
    for _ in 0..cfg.n_steps {
        stepper.step(&mut rho);
    }
    Ok(SuperDensity {
        values: rho,
        ..*rho0
    })
}

/// Classical fourth-order Runge-Kutta on `∂ₜρ = −(i/ħ)ℒρ`.
pub fn evolve_rk4(
    l: &dyn LiouvilleOperator,
    rho0: &CMatrix,
    cfg: &EvolutionConfig,
) -> Result<CMatrix> {
    cfg.validate()?;
    let dt = cfg.dt();
    let f = |r: &CMatrix| l.apply(r) * C64::new(0.0, -1.0 / cfg.hbar);
    let mut rho = rho0.clone();
    for _ in 0..cfg.n_steps {
        let k1 = f(&rho);
        let k2 = f(&(&rho + &k1 * C64::new(0.5 * dt, 0.0)));
        let k3 = f(&(&rho + &k2 * C64::new(0.5 * dt, 0.0)));
        let k4 = f(&(&rho + &k3 * C64::new(dt, 0.0)));
        rho +=
            (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0);
    }
    Ok(rho)
}

/// Evolves a grid density with the method selected in `cfg`.
pub fn evolve_grid(
    l: &GridLiouvillian,
    rho0: &SuperDensity,
    cfg: &EvolutionConfig,
) -> Result<SuperDensity> {
    cfg.validate()?;
    check_grid(l, rho0, cfg)?;
    let values = match cfg.method {
        Method::MatrixExp => {
            ExactPropagator::new(l, cfg.hbar)?.apply(&rho0.values, cfg.t1 - cfg.t0)
        }
        Method::TrotterLie | Method::TrotterStrang => return evolve_trotter(l, rho0, cfg),
        Method::Rk4 => evolve_rk4(l, &rho0.values, cfg)?,
    };
    Ok(SuperDensity { values, ..*rho0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::potential::{Kind, Polynomial};
    use crate::superspace::SuperGrid;

    fn quartic(kind: Kind, n: usize) -> GridLiouvillian {
        let g = SuperGrid::centered(4.0, n).unwrap();
        GridLiouvillian::new(
            &Polynomial::new(vec![0.0, 0.0, 0.5, 0.0, 0.1]),
            g,
            kind,
            1.0,
            1.0,
        )
        .unwrap()
    }

    fn start(l: &GridLiouvillian) -> SuperDensity {
        SuperDensity::classical_gaussian(l.grid, 1.0, 1.0, 0.4, 0.2, 0.8, 0.8)
    }

    #[test]
    fn strang_is_second_order_lie_first() {
        let l = quartic(Kind::Classical, 16);
        let rho0 = start(&l);
        let exact = ExactPropagator::new(&l, 1.0)
            .unwrap()
            .apply(&rho0.values, 0.5);
        let err = |n, m| {
            let cfg = EvolutionConfig::new(0.5, n, m);
            max_abs_diff(&evolve_trotter(&l, &rho0, &cfg).unwrap().values, &exact)
        };
        let strang = (err(40, Method::TrotterStrang) / err(80, Method::TrotterStrang)).log2();
        let lie = (err(40, Method::TrotterLie) / err(80, Method::TrotterLie)).log2();
        assert!((strang - 2.0).abs() < 0.2, "strang order {strang}");
        assert!((lie - 1.0).abs() < 0.2, "lie order {lie}");
    }

    #[test]
    fn rk4_agrees_with_exact() {
        let l = quartic(Kind::Classical, 16);
        let rho0 = start(&l);
        let exact = ExactPropagator::new(&l, 1.0)
            .unwrap()
            .apply(&rho0.values, 0.3);
        let rk = evolve_rk4(
            &l,
            &rho0.values,
            &EvolutionConfig::new(0.3, 3000, Method::Rk4),
        )
        .unwrap();
        assert!(max_abs_diff(&rk, &exact) < 1e-8);
    }

    #[test]
    fn harmonic_cl_and_qm_trotter_identical() {
        let g = SuperGrid::centered(5.0, 32).unwrap();
        let v = Polynomial::harmonic(1.0, 1.0);
        let cl = GridLiouvillian::new(&v, g, Kind::Classical, 1.0, 1.0).unwrap();
        let qm = GridLiouvillian::new(&v, g, Kind::Quantum, 1.0, 1.0).unwrap();
        let rho0 = SuperDensity::classical_gaussian(g, 1.0, 1.0, 0.5, 0.0, 0.7, 0.7);
        let cfg = EvolutionConfig::new(1.0, 50, Method::TrotterStrang);
        let a = evolve_trotter(&cl, &rho0, &cfg).unwrap();
        let b = evolve_trotter(&qm, &rho0, &cfg).unwrap();
        assert!(max_abs_diff(&a.values, &b.values) < 1e-10);
    }

    #[test]
    fn free_single_step_is_exact() {
        let g = SuperGrid::centered(16.0, 128).unwrap();
        let l = GridLiouvillian::new(&Polynomial::zero(), g, Kind::Classical, 1.0, 1.0).unwrap();
        let rho0 = SuperDensity::classical_gaussian(g, 1.0, 1.0, -2.0, 1.0, 0.8, 0.6);
        let one =
            evolve_trotter(&l, &rho0, &EvolutionConfig::new(2.0, 1, Method::TrotterLie)).unwrap();
        let many = evolve_trotter(
            &l,
            &rho0,
            &EvolutionConfig::new(2.0, 17, Method::TrotterStrang),
        )
        .unwrap();
        assert!(max_abs_diff(&one.values, &many.values) < 1e-12);
        assert!(one.expect_x().unwrap().abs() < 1e-8);
        assert!((one.expect_p().unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn grid_mismatch_detected() {
        let l = quartic(Kind::Quantum, 16);
        let other = SuperDensity::classical_gaussian(
            SuperGrid::centered(4.0, 18).unwrap(),
            1.0,
            1.0,
            0.0,
            0.0,
            1.0,
            1.0,
        );
        let cfg = EvolutionConfig::new(0.1, 1, Method::TrotterStrang);
        assert!(matches!(
            evolve_trotter(&l, &other, &cfg),
            Err(Error::GridMismatch(_))
        ));
        assert!(TrotterStepper::new(&l, 0.1, Method::Rk4).is_err());
    }
}
