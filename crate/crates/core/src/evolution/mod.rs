//! Time evolution of density matrices under `iħ ∂ₜρ = ℒρ`.
//!
//! * [`ExactPropagator`] / [`evolve_exact`]: `exp(−iℒt/ħ)` on the dense generator
//! * [`evolve_ordered`]: midpoint product for time-dependent generators
//! * [`evolve_interaction_picture`] and [`dyson_terms`]: perturbative splitting
//! * [`evolve_trotter`]: split-step Fourier on the superspace grid
//! * [`evolve_rk4`]: matrix-free fourth-order Runge-Kutta
//! * [`characteristics`]: phase-space trajectories as an independent oracle

pub mod characteristics;
mod exact;
mod series;
mod trotter;

pub use characteristics::{
    evolve_characteristics, CharacteristicsEnsemble, EnsembleMoments, Sample,
};
pub use exact::{
    dyson_terms, evolve_exact, evolve_interaction_picture, evolve_ordered, first_order_interaction,
    ExactPropagator,
};
pub use series::{moment_series, MomentRow};
pub use trotter::{evolve_grid, evolve_rk4, evolve_trotter, TrotterStepper};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MatrixExp,
    TrotterLie,
    TrotterStrang,
    Rk4,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "matrix_exp" | "exact" | "expm" => Ok(Method::MatrixExp),
            "trotter_lie" | "lie" => Ok(Method::TrotterLie),
            "trotter_strang" | "strang" => Ok(Method::TrotterStrang),
            "rk4" => Ok(Method::Rk4),
            other => Err(Error::InvalidParameter(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub t0: f64,
    pub t1: f64,
    pub n_steps: usize,
    pub method: Method,
    pub hbar: f64,
    pub mass: f64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            t0: 0.0,
            t1: 1.0,
            n_steps: 100,
            method: Method::TrotterStrang,
            hbar: 1.0,
            mass: 1.0,
        }
    }
}

impl EvolutionConfig {
    pub fn new(t1: f64, n_steps: usize, method: Method) -> Self {
        Self {
            t1,
            n_steps,
            method,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t1 > self.t0) {
            return Err(Error::InvalidParameter(format!(
                "t1 = {} must exceed t0 = {}",
                self.t1, self.t0
            )));
        }
        if self.n_steps == 0 {
            return Err(Error::InvalidParameter("n_steps must be at least 1".into()));
        }
        if !(self.hbar > 0.0) || !(self.mass > 0.0) {
            return Err(Error::InvalidParameter(
                "ħ and mass must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / self.n_steps as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(EvolutionConfig::default().validate().is_ok());
        assert!(EvolutionConfig {
            t1: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(EvolutionConfig {
            n_steps: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert_eq!(EvolutionConfig::new(2.0, 4, Method::Rk4).dt(), 0.5);
        assert_eq!("strang".parse::<Method>().unwrap(), Method::TrotterStrang);
    }
}
