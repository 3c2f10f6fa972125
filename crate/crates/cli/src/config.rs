//! Scenario configuration: TOML file, environment, then flags.
//!
//! Every section has documented defaults, so an empty file is valid.
//! Unknown keys are rejected at every level.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use liouville::evolution::Method;
use liouville::potential::{Kind, Polynomial};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const ENV_OUT_DIR: &str = "LIOUVILLE_OUT_DIR";
pub const ENV_THREADS: &str = "LIOUVILLE_THREADS";

/// Potential as written in configs: `{type = "polynomial", coeffs = [...]}`
/// or `{type = "coulomb", e2 = ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum PotentialSpec {
    Polynomial { coeffs: Vec<f64> },
    Coulomb { e2: f64 },
}

impl PotentialSpec {
    pub fn polynomial(&self) -> Result<Polynomial, CliError> {
        match self {
            PotentialSpec::Polynomial { coeffs } => Ok(Polynomial::new(coeffs.clone())),
            PotentialSpec::Coulomb { .. } => Err(CliError::Config(
                "this subcommand needs a polynomial potential".into(),
            )),
        }
    }
}

/// Flag form: `quartic:λ`, `harmonic:ω` (unit mass), `poly:c0,c1,…`,
/// `free`, `coulomb:e2`.
impl FromStr for PotentialSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (head, tail) = s.split_once(':').unwrap_or((s, ""));
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad number `{t}` in potential `{s}`"))
        };
        let spec = match head.trim() {
            "free" if tail.is_empty() => PotentialSpec::Polynomial { coeffs: vec![0.0] },
            "quartic" => PotentialSpec::Polynomial { coeffs: vec![0.0, 0.0, 0.0, 0.0, num(tail)?] },
            "harmonic" => {
                let w = num(tail)?;
                PotentialSpec::Polynomial { coeffs: vec![0.0, 0.0, 0.5 * w * w] }
            }
            "poly" => PotentialSpec::Polynomial { coeffs: tail.split(',').map(num).collect::<Result<_, _>>()? },
            "coulomb" => PotentialSpec::Coulomb { e2: num(tail)? },
            _ => return Err(format!("unknown potential `{s}` (expected free, quartic:λ, harmonic:ω, poly:c0,c1,… or coulomb:e2)")),
        };
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub half_width: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaussianSpec {
    pub x0: f64,
    pub p0: f64,
    pub sigma_x: f64,
    pub sigma_p: f64,
}

impl Default for GaussianSpec {
    fn default() -> Self {
        Self {
            x0: 1.0,
            p0: 0.0,
            sigma_x: 0.5,
            sigma_p: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuperopConfig {
    pub potential: PotentialSpec,
    pub kind: Kind,
    pub grid: GridSpec,
    pub mass: f64,
    pub hbar: f64,
    /// Write the dense Liouvillian and check its spectrum (≤ 32 points).
    pub dense: bool,
    /// Coulomb elements as `a,b,c,d` state labels.
    pub elements: Vec<String>,
    pub samples: usize,
}

impl Default for SuperopConfig {
    fn default() -> Self {
        Self {
            potential: PotentialSpec::Polynomial {
                coeffs: vec![0.0, 0.0, 0.0, 0.0, 0.1],
            },
            kind: Kind::Classical,
            grid: GridSpec {
                half_width: 4.0,
                points: 12,
            },
            mass: 1.0,
            hbar: 1.0,
            dense: true,
            elements: vec!["1s,1s,1s,2p0".into(), "1s,2s,1s,2s".into()],
            samples: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    pub potential: PotentialSpec,
    pub kind: Kind,
    pub grid: GridSpec,
    pub initial: GaussianSpec,
    pub method: Method,
    pub t: f64,
    pub steps: usize,
    /// Output every `every` steps.
    pub every: usize,
    pub mass: f64,
    pub hbar: f64,
    /// Also write the final density matrix.
    pub density: bool,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            potential: PotentialSpec::Polynomial {
                coeffs: vec![0.0, 0.0, 0.0, 0.0, 0.1],
            },
            kind: Kind::Classical,
            grid: GridSpec {
                half_width: 8.0,
                points: 64,
            },
            initial: GaussianSpec::default(),
            method: Method::TrotterStrang,
            t: 1.0,
            steps: 100,
            every: 1,
            mass: 1.0,
            hbar: 1.0,
            density: false,
        }
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            half_width: 8.0,
            points: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagatorConfig {
    pub lambda: f64,
    pub t: f64,
    pub mass: f64,
    pub hbar: f64,
    /// Endpoints `[Q_f, q_f, Q_i, q_i]`.
    pub points: Vec<[f64; 4]>,
    pub rel_tol: f64,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        Self {
            lambda: 0.1,
            t: 1.0,
            mass: 1.0,
            hbar: 1.0,
            points: vec![
                [0.3, 0.1, -0.2, 0.4],
                [1.0, -0.5, 0.2, 0.0],
                [0.0, 0.0, 0.5, -0.5],
                [-0.7, 0.9, 0.4, 0.6],
            ],
            rel_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JcConfig {
    pub omega_e: f64,
    pub omega: f64,
    pub d: f64,
    /// `ℰ_egeg` as `[re, im]`.
    pub eps: [f64; 2],
    pub n_max: usize,
    /// Defaults to one Rabi period `π/d`.
    pub t_max: Option<f64>,
    pub t_steps: usize,
    pub init: String,
}

impl Default for JcConfig {
    fn default() -> Self {
        Self {
            omega_e: 1.0,
            omega: 1.0,
            d: 0.05,
            eps: [0.0, 0.0],
            n_max: 10,
            t_max: None,
            t_steps: 200,
            init: "e0".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BipartiteConfig {
    pub n_levels: usize,
    pub omega: f64,
    pub lambda: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub t_max: f64,
    pub t_steps: usize,
    /// Truncation used for the generator audit.
    pub audit_levels: usize,
}

impl Default for BipartiteConfig {
    fn default() -> Self {
        Self {
            n_levels: 6,
            omega: 1.0,
            lambda: 0.001,
            alpha1: 0.1,
            alpha2: -0.1,
            t_max: 2.0,
            t_steps: 20,
            audit_levels: 4,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateConfig {
    /// Restrict to these checks; empty means all.
    pub only: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: Option<String>,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Worker threads; `None` lets rayon decide.
    pub threads: Option<usize>,
    pub superop: SuperopConfig,
    pub evolve: EvolveConfig,
    pub propagator: PropagatorConfig,
    pub jc: JcConfig,
    pub bipartite: BipartiteConfig,
    pub validate: ValidateConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: None,
            seed: 0,
            out_dir: PathBuf::from("liouville-out"),
            threads: None,
            superop: SuperopConfig::default(),
            evolve: EvolveConfig::default(),
            propagator: PropagatorConfig::default(),
            jc: JcConfig::default(),
            bipartite: BipartiteConfig::default(),
            validate: ValidateConfig::default(),
        }
    }
}

impl FromStr for ScenarioConfig {
    type Err = CliError;

    fn from_str(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }
}

impl fmt::Display for ScenarioConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = toml::to_string(self).map_err(|_| fmt::Error)?;
        f.write_str(&text)
    }
}

pub fn parse_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    text.parse().map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Applies `LIOUVILLE_OUT_DIR` and `LIOUVILLE_THREADS` from `env`.
pub fn apply_env(cfg: &mut ScenarioConfig, env: &BTreeMap<String, String>) -> Result<(), CliError> {
    if let Some(dir) = env.get(ENV_OUT_DIR).filter(|d| !d.is_empty()) {
        cfg.out_dir = PathBuf::from(dir);
    }
    if let Some(n) = env.get(ENV_THREADS).filter(|n| !n.is_empty()) {
        let n = n.parse().map_err(|_| {
            CliError::Config(format!(
                "{ENV_THREADS} must be a positive integer, got `{n}`"
            ))
        })?;
        cfg.threads = Some(n);
    }
    Ok(())
}

fn require(ok: bool, what: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(what.to_string()))
    }
}

impl ScenarioConfig {
    /// Range checks that do not need the physics modules.
    pub fn validate(&self) -> Result<(), CliError> {
        require(self.threads != Some(0), "threads must be positive")?;
        let grid = |g: &GridSpec| {
            require(
                g.half_width > 0.0 && g.points >= 4,
                "grid needs half_width > 0 and points ≥ 4",
            )
        };
        let s = &self.superop;
        grid(&s.grid)?;
        require(
            s.mass > 0.0 && s.hbar > 0.0,
            "superop: mass and hbar must be positive",
        )?;
        require(
            !s.dense || s.grid.points <= 32,
            "superop: dense export is limited to 32 grid points",
        )?;
        let e = &self.evolve;
        grid(&e.grid)?;
        require(
            e.t > 0.0 && e.steps > 0 && e.every > 0,
            "evolve: t, steps and every must be positive",
        )?;
        require(
            e.mass > 0.0 && e.hbar > 0.0,
            "evolve: mass and hbar must be positive",
        )?;
        require(
            e.initial.sigma_x > 0.0 && e.initial.sigma_p > 0.0,
            "evolve: initial widths must be positive",
        )?;
        let p = &self.propagator;
        require(
            p.t > 0.0 && p.mass > 0.0 && p.hbar > 0.0,
            "propagator: t, mass and hbar must be positive",
        )?;
        require(
            !p.points.is_empty() && p.rel_tol > 0.0,
            "propagator: needs endpoints and rel_tol > 0",
        )?;
        let j = &self.jc;
        require(
            j.d > 0.0 && j.omega > 0.0,
            "jc: d and omega must be positive",
        )?;
        require(
            j.t_steps > 0 && j.t_max.is_none_or(|t| t > 0.0),
            "jc: t_max and t_steps must be positive",
        )?;
        let b = &self.bipartite;
        require(
            b.t_max > 0.0 && b.t_steps > 0,
            "bipartite: t_max and t_steps must be positive",
        )?;
        require(
            b.audit_levels >= 2,
            "bipartite: audit_levels must be at least 2",
        )?;
        Ok(())
    }

    /// Fills values whose defaults depend on other fields.
    pub fn resolve(&mut self) {
        if self.jc.t_max.is_none() {
            self.jc.t_max = Some(std::f64::consts::PI / self.jc.d);
        }
    }
}
