//! Bundled scenario set: one small, fixed configuration per evolution path.
//!
//! Every scenario yields normalized density matrices at a list of sample
//! times, so the same conservation measurements apply to all of them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::entangle::{evolve_bipartite, BipartiteBasis, BipartiteDensity};
use crate::evolution::{
    evolve_characteristics, evolve_interaction_picture, evolve_ordered, evolve_rk4,
    CharacteristicsEnsemble, EvolutionConfig, ExactPropagator, Method, TrotterStepper,
};
use crate::jaynescummings::{jc_series, InitialState, JCDensity, JCParams};
use crate::linalg::{commutator_superop, hermiticity_deviation, trace};
use crate::liouvillian::{BasisLiouvillian, GridLiouvillian};
use crate::parallel::map_slice;
use crate::potential::{Kind, Polynomial};
use crate::superspace::{SuperDensity, SuperGrid};
use crate::{CMatrix, Result, C64};

/// Which integrator a scenario exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolutionPath {
    GridExact,
    TrotterLie,
    TrotterStrang,
    Rk4,
    BasisExact,
    Ordered,
    InteractionPicture,
    JaynesCummings,
    Bipartite,
    Characteristics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scenario {
    pub name: &'static str,
    pub path: EvolutionPath,
    pub kind: Kind,
}

/// Worst trace and hermiticity errors over the sampled times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservationReport {
    pub name: String,
    pub path: EvolutionPath,
    pub kind: Kind,
    pub samples: usize,
    pub max_trace_error: f64,
    pub max_hermiticity: f64,
}

impl ConservationReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_trace_error < tol && self.max_hermiticity < tol
    }
}

const GRID_HALF_WIDTH: f64 = 4.0;
const GRID_POINTS: usize = 24;
const QUARTIC: f64 = 0.1;
const RK4_DT: f64 = 0.005;
const TROTTER_DT: f64 = 0.01;

pub fn bundled() -> Vec<Scenario> {
    use EvolutionPath::*;
    let mut out = Vec::new();
    for kind in [Kind::Classical, Kind::Quantum] {
        let tag = kind == Kind::Classical;
        out.extend([
            Scenario {
                name: if tag {
                    "grid-exact-cl"
                } else {
                    "grid-exact-qm"
                },
                path: GridExact,
                kind,
            },
            Scenario {
                name: if tag {
                    "trotter-lie-cl"
                } else {
                    "trotter-lie-qm"
                },
                path: TrotterLie,
                kind,
            },
            Scenario {
                name: if tag {
                    "trotter-strang-cl"
                } else {
                    "trotter-strang-qm"
                },
                path: TrotterStrang,
                kind,
            },
            Scenario {
                name: if tag { "rk4-cl" } else { "rk4-qm" },
                path: Rk4,
                kind,
            },
            Scenario {
                name: if tag { "bipartite-cl" } else { "bipartite-qm" },
                path: Bipartite,
                kind,
            },
        ]);
    }
    out.extend([
        Scenario {
            name: "basis-random",
            path: BasisExact,
            kind: Kind::Quantum,
        },
        Scenario {
            name: "driven-basis",
            path: Ordered,
            kind: Kind::Quantum,
        },
        Scenario {
            name: "interaction-picture",
            path: InteractionPicture,
            kind: Kind::Quantum,
        },
        Scenario {
            name: "jc-coulomb",
            path: JaynesCummings,
            kind: Kind::Classical,
        },
        Scenario {
            name: "characteristics-quartic",
            path: Characteristics,
            kind: Kind::Classical,
        },
    ]);
    out
}

fn grid_state(kind: Kind) -> Result<(GridLiouvillian, SuperDensity)> {
    let grid = SuperGrid::centered(GRID_HALF_WIDTH, GRID_POINTS)?;
    let l = GridLiouvillian::new(&Polynomial::quartic(QUARTIC), grid, kind, 1.0, 1.0)?;
    let mut rho = SuperDensity::classical_gaussian(grid, 1.0, 1.0, 0.4, 0.3, 0.6, 0.9);
    let tr = rho.trace_complex();
    rho.values /= tr;
    Ok((l, rho))
}

fn steps_between(a: f64, b: f64, dt: f64) -> usize {
    ((b - a) / dt).round().max(1.0) as usize
}

fn random_hermitian(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> CMatrix {
    let a = CMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    (&a + a.adjoint()) * C64::new(0.5 * scale, 0.0)
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let a = CMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let rho = &a * a.adjoint();
    let tr = trace(&rho);
    rho / tr
}

/// Density matrices (unit-step traces) at each of `times`, which must be
/// ascending and start at or after 0.
pub fn trajectory(s: &Scenario, times: &[f64]) -> Result<Vec<(C64, CMatrix)>> {
    use EvolutionPath::*;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let grid_pair = |rho: &CMatrix, step: f64| (trace(rho) * step, rho.clone());
    match s.path {
        GridExact => {
            let (l, rho0) = grid_state(s.kind)?;
            let prop = ExactPropagator::new(&l, 1.0)?;
            Ok(times
                .iter()
                .map(|&t| grid_pair(&prop.apply(&rho0.values, t), rho0.grid.step))
                .collect())
        }
        TrotterLie | TrotterStrang | Rk4 => {
            let (l, rho0) = grid_state(s.kind)?;
            let step = rho0.grid.step;
            let mut rho = rho0.values.clone();
            let mut now = 0.0;
            let mut out = Vec::with_capacity(times.len());
            let method = match s.path {
                TrotterLie => Method::TrotterLie,
                TrotterStrang => Method::TrotterStrang,
                _ => Method::Rk4,
            };
            let stepper = match method {
                Method::Rk4 => None,
                m => Some(TrotterStepper::new(&l, TROTTER_DT, m)?),
            };
            for &t in times {
                if t > now {
                    match &stepper {
                        Some(st) => {
                            for _ in 0..steps_between(now, t, TROTTER_DT) {
                                st.step(&mut rho);
                            }
                        }
                        None => {
                            let n = steps_between(now, t, RK4_DT);
                            rho = evolve_rk4(
                                &l,
                                &rho,
                                &EvolutionConfig::new(t - now, n, Method::Rk4),
                            )?;
                        }
                    }
                    now = t;
                }
                out.push(grid_pair(&rho, step));
            }
            Ok(out)
        }
        BasisExact => {
            let h = random_hermitian(6, 1.0, &mut rng);
            let rho0 = random_state(6, &mut rng);
            let prop = ExactPropagator::new(&BasisLiouvillian::new(h, None)?, 1.0)?;
            Ok(times
                .iter()
                .map(|&t| grid_pair(&prop.apply(&rho0, t), 1.0))
                .collect())
        }
        Ordered => {
            let h0 = random_hermitian(4, 1.0, &mut rng);
            let h1 = random_hermitian(4, 0.3, &mut rng);
            let rho0 = random_state(4, &mut rng);
            let gen = |t: f64| Ok(commutator_superop(&(&h0 + &h1 * C64::new(t.cos(), 0.0))));
            let mut rho = rho0;
            let mut now = 0.0;
            let mut out = Vec::with_capacity(times.len());
            for &t in times {
                if t > now {
                    let cfg = EvolutionConfig {
                        t0: now,
                        t1: t,
                        n_steps: steps_between(now, t, 0.02),
                        ..Default::default()
                    };
                    rho = evolve_ordered(gen, &rho, &cfg)?;
                    now = t;
                }
                out.push(grid_pair(&rho, 1.0));
            }
            Ok(out)
        }
        InteractionPicture => {
            let l0 = BasisLiouvillian::new(random_hermitian(4, 1.0, &mut rng), None)?;
            let l1 = BasisLiouvillian::new(random_hermitian(4, 0.1, &mut rng), None)?;
            let rho0 = random_state(4, &mut rng);
            times
                .iter()
                .map(|&t| {
                    let rho = if t > 0.0 {
                        let cfg = EvolutionConfig {
                            t1: t,
                            n_steps: steps_between(0.0, t, 0.05),
                            ..Default::default()
                        };
                        evolve_interaction_picture(&l0, &l1, &rho0, &cfg)?
                    } else {
                        rho0.clone()
                    };
                    Ok(grid_pair(&rho, 1.0))
                })
                .collect()
        }
        JaynesCummings => {
            let p = JCParams::new(1.0, 1.0, 0.05, 8).with_eps(C64::new(0.01, -0.02));
            let rho0 = JCDensity::initial(InitialState::Superposition(1), p.n_max)?;
            Ok(jc_series(&p, &rho0, times)?
                .into_iter()
                .map(|(_, r)| grid_pair(&r.values, 1.0))
                .collect())
        }
        Bipartite => {
            let basis = BipartiteBasis::new(5, 1.0);
            let rho0 = BipartiteDensity::coherent(5, 0.1, -0.1)?;
            let states = evolve_bipartite(&basis, 5e-4, s.kind, &rho0, times)?;
            Ok(states
                .into_iter()
                .map(|r| grid_pair(&r.values, 1.0))
                .collect())
        }
        Characteristics => {
            let v = Polynomial::quartic(QUARTIC);
            let ens = CharacteristicsEnsemble::gaussian_lattice(40, 0.4, 0.3, 0.6, 0.9, 4.0, 7)?;
            times
                .iter()
                .map(|&t| {
                    let run = evolve_characteristics(&v, &ens, t, 0.002, 1.0)?;
                    let w: f64 = run.ensemble.samples.iter().map(|s| s.weight).sum();
                    Ok((
                        C64::new(w, 0.0),
                        CMatrix::from_element(1, 1, C64::new(w, 0.0)),
                    ))
                })
                .collect()
        }
    }
}

/// Uniform sample times `0, t_end/n, …, t_end`.
pub fn sample_times(t_end: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| t_end * k as f64 / n as f64).collect()
}

pub fn conservation(s: &Scenario, times: &[f64]) -> Result<ConservationReport> {
    let traj = trajectory(s, times)?;
    let mut max_trace_error = 0.0_f64;
    let mut max_hermiticity = 0.0_f64;
    for (tr, rho) in &traj {
        max_trace_error = max_trace_error.max((tr - 1.0).norm());
        max_hermiticity = max_hermiticity.max(hermiticity_deviation(rho));
    }
    Ok(ConservationReport {
        name: s.name.to_string(),
        path: s.path,
        kind: s.kind,
        samples: traj.len(),
        max_trace_error,
        max_hermiticity,
    })
}

/// Conservation over `[0, t_end]` for every bundled scenario.
pub fn conservation_suite(t_end: f64, n_samples: usize) -> Vec<Result<ConservationReport>> {
    let times = sample_times(t_end, n_samples);
    map_slice(&bundled(), |s| conservation(s, &times))
}
