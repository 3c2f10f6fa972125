use serde::Serialize;

use super::{evolve_rk4, EvolutionConfig, ExactPropagator, Method, TrotterStepper};
use crate::liouvillian::GridLiouvillian;
use crate::superspace::SuperDensity;
use crate::Result;

/// One output row of a grid evolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentRow {
    pub t: f64,
    pub trace: f64,
    pub x: f64,
    pub p: f64,
    pub x2: f64,
    pub purity: f64,
    pub hermiticity: f64,
}

impl MomentRow {
    pub fn of(t: f64, rho: &SuperDensity) -> Result<Self> {
        Ok(Self {
            t,
            trace: rho.trace(),
            x: rho.expect_x()?,
            p: rho.expect_p()?,
            x2: rho.expect_x2()?,
            purity: rho.purity(),
            hermiticity: rho.hermiticity_deviation(),
        })
    }
}

/// Moments every `every` steps (and at the final time), starting at `t0`.
pub fn moment_series(
    l: &GridLiouvillian,
    rho0: &SuperDensity,
    cfg: &EvolutionConfig,
    every: usize,
) -> Result<Vec<MomentRow>> {
    cfg.validate()?;
    super::trotter::check_grid(l, rho0, cfg)?;
    let every = every.max(1);
    let dt = cfg.dt();
    let mut rho = rho0.clone();
    let mut rows = vec![MomentRow::of(cfg.t0, &rho)?];

    enum Stepper {
        Exact(ExactPropagator),
        Split(TrotterStepper),
        Rk4,
    }
    let stepper = match cfg.method {
        Method::MatrixExp => Stepper::Exact(ExactPropagator::new(l, cfg.hbar)?),
        Method::TrotterLie | Method::TrotterStrang => {
            Stepper::Split(TrotterStepper::new(l, dt, cfg.method)?)
        }
        Method::Rk4 => Stepper::Rk4,
    };
    let single = EvolutionConfig {
        t0: 0.0,
        t1: dt,
        n_steps: 1,
        ..*cfg
    };
    for k in 1..=cfg.n_steps {
        match &stepper {
            Stepper::Exact(p) => rho.values = p.apply(&rho.values, dt),
            Stepper::Split(s) => s.step(&mut rho.values),
            Stepper::Rk4 => rho.values = evolve_rk4(l, &rho.values, &single)?,
        }
        if k % every == 0 || k == cfg.n_steps {
            rows.push(MomentRow::of(cfg.t0 + k as f64 * dt, &rho)?);
        }
    }
    Ok(rows)
}
