//! Monte Carlo matrix elements of the Coulomb superoperator between
//! hydrogenic orbitals,
//! `ℰ_{ab,cd} = ∫d³Q d³q ψ*_a(Q)ψ_b(q) ℰ(Q,q) ψ_c(Q)ψ*_d(q)`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, UnitSphere};
use serde::{Deserialize, Serialize};

use super::hydrogen::HydrogenState;
use crate::parallel::map_range;
use crate::potential::{coulomb_e_superoperator, CoulombPotential, DEFAULT_EPS_REG};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    pub block_size: usize,
    /// Abort with `NotConverged` when the standard error exceeds this.
    pub tolerance: Option<f64>,
    pub eps_reg: f64,
    /// Fraction of samples drawn near the `Q + q = 0` shell.
    pub shell_fraction: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            samples: 1_000_000,
            seed: 0,
            block_size: 1 << 14,
            tolerance: None,
            eps_reg: DEFAULT_EPS_REG,
            shell_fraction: 0.2,
        }
    }
}

impl McConfig {
    pub fn with_samples(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            ..Self::default()
        }
    }
}

/// Estimate with its standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub re: f64,
    pub im: f64,
    pub stderr_re: f64,
    pub stderr_im: f64,
    pub samples: usize,
    /// Samples falling inside an excluded singular shell.
    pub excluded: usize,
    /// Bound on the magnitude dropped with the excluded shells.
    pub shell_bound: f64,
}

impl McEstimate {
    pub fn value(&self) -> C64 {
        C64::new(self.re, self.im)
    }

    /// `√(σ_re² + σ_im²)`.
    pub fn stderr(&self) -> f64 {
        self.stderr_re.hypot(self.stderr_im)
    }

    /// `|value| ≤ k·stderr`.
    pub fn consistent_with_zero(&self, k: f64) -> bool {
        self.value().norm() <= k * self.stderr()
    }
}

/// Gamma-distributed radius, uniform direction.
#[derive(Debug, Clone, Copy)]
struct RadialProposal {
    shape: f64,
    rate: f64,
    log_norm: f64,
}

impl RadialProposal {
    fn for_pair(a: &HydrogenState, c: &HydrogenState, bohr: f64) -> Self {
        let shape = (3 + a.l() + c.l()) as f64;
        let base = (1.0 / a.n() as f64 + 1.0 / c.n() as f64) / bohr;
        let nodes = (a.radial_nodes() + c.radial_nodes()) as f64;
        Self::new(shape, base * shape / (shape + nodes))
    }

    fn new(shape: f64, rate: f64) -> Self {
        // integer shape: Γ(k) = (k−1)!
        let log_fact: f64 = (1..shape as u32).map(|k| (k as f64).ln()).sum();
        Self {
            shape,
            rate,
            log_norm: shape * rate.ln() - log_fact - (4.0 * PI).ln(),
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> [f64; 3] {
        let r: f64 = Gamma::new(self.shape, 1.0 / self.rate)
            .expect("positive parameters")
            .sample(rng);
        let u: [f64; 3] = UnitSphere.sample(rng);
        [r * u[0], r * u[1], r * u[2]]
    }

    fn density(&self, x: [f64; 3]) -> f64 {
        let r = norm(x);
        if r == 0.0 {
            return if self.shape == 3.0 {
                (self.log_norm).exp()
            } else {
                0.0
            };
        }
        (self.log_norm + (self.shape - 3.0) * r.ln() - self.rate * r).exp()
    }
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn neg(a: [f64; 3]) -> [f64; 3] {
    [-a[0], -a[1], -a[2]]
}

/// Mixture proposal over `(Q, q)`, invariant under `(Q,q) → (−q,−Q)`.
struct Proposal {
    pa: RadialProposal,
    pb: RadialProposal,
    shell: RadialProposal,
    beta: f64,
}

impl Proposal {
    fn sample<R: Rng>(&self, rng: &mut R) -> ([f64; 3], [f64; 3]) {
        let u: f64 = rng.random();
        if u >= self.beta {
            let (x, y) = (self.pa.sample(rng), self.pb.sample(rng));
            if rng.random::<bool>() {
                (x, y)
            } else {
                (y, x)
            }
        } else {
            let base = if rng.random::<bool>() {
                self.pa.sample(rng)
            } else {
                self.pb.sample(rng)
            };
            let s = self.shell.sample(rng);
            if rng.random::<bool>() {
                // Q = base, q = s − Q
                (base, add(s, neg(base)))
            } else {
                let q = neg(base);
                (add(s, base), q)
            }
        }
    }

    fn density(&self, big_q: [f64; 3], small_q: [f64; 3]) -> f64 {
        let (a_q, b_q) = (self.pa.density(big_q), self.pb.density(big_q));
        let (a_s, b_s) = (self.pa.density(small_q), self.pb.density(small_q));
        let main = 0.5 * (a_q * b_s + b_q * a_s);
        let shell = 0.25 * (a_q + b_q + a_s + b_s) * self.shell.density(add(big_q, small_q));
        (1.0 - self.beta) * main + self.beta * shell
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean_re: f64,
    mean_im: f64,
    m2_re: f64,
    m2_im: f64,
    excluded: usize,
}

impl Moments {
    fn push(&mut self, w: C64) {
        self.n += 1.0;
        let dr = w.re - self.mean_re;
        let di = w.im - self.mean_im;
        self.mean_re += dr / self.n;
        self.mean_im += di / self.n;
        self.m2_re += dr * (w.re - self.mean_re);
        self.m2_im += di * (w.im - self.mean_im);
    }

    fn merge(self, o: Moments) -> Moments {
        if o.n == 0.0 {
            return Moments {
                excluded: self.excluded + o.excluded,
                ..self
            };
        }
        if self.n == 0.0 {
            return Moments {
                excluded: self.excluded + o.excluded,
                ..o
            };
        }
        let n = self.n + o.n;
        let dr = o.mean_re - self.mean_re;
        let di = o.mean_im - self.mean_im;
        Moments {
            n,
            mean_re: self.mean_re + dr * o.n / n,
            mean_im: self.mean_im + di * o.n / n,
            m2_re: self.m2_re + o.m2_re + dr * dr * self.n * o.n / n,
            m2_im: self.m2_im + o.m2_im + di * di * self.n * o.n / n,
            excluded: self.excluded + o.excluded,
        }
    }
}

/// Importance-sampled estimate of `ℰ_{ab,cd}` for charge parameter `e2`
/// (Bohr radius `1/e2`).
///
/// Samples within `eps_reg` of the singular shells `Q = 0`, `q = 0`,
/// `Q + q = 0` are dropped; the reported `shell_bound` bounds what they
/// could have contributed.
pub fn coulomb_superop_element(
    a: &HydrogenState,
    b: &HydrogenState,
    c: &HydrogenState,
    d: &HydrogenState,
    e2: f64,
    cfg: &McConfig,
) -> Result<McEstimate> {
    if cfg.samples < 10_000 {
        return Err(Error::InvalidParameter(format!(
            "at least 10⁴ samples required, got {}",
            cfg.samples
        )));
    }
    if !(e2 > 0.0) || cfg.block_size == 0 || !(0.0..1.0).contains(&cfg.shell_fraction) {
        return Err(Error::InvalidParameter(
            "e2 > 0, block_size > 0 and shell_fraction in [0,1) required".into(),
        ));
    }
    let coulomb = CoulombPotential::new(e2).with_eps_reg(cfg.eps_reg);
    let bohr = coulomb.bohr_radius();
    let proposal = Proposal {
        pa: RadialProposal::for_pair(a, c, bohr),
        pb: RadialProposal::for_pair(b, d, bohr),
        shell: RadialProposal::new(1.0, 2.0 / bohr),
        beta: cfg.shell_fraction,
    };
    let integrand = |big_q: [f64; 3], small_q: [f64; 3]| -> Option<C64> {
        let e = coulomb_e_superoperator(&coulomb, big_q, small_q).ok()?;
        if norm(big_q) < cfg.eps_reg || norm(small_q) < cfg.eps_reg {
            return None;
        }
        let bra = a.wavefunction(big_q, bohr).conj() * c.wavefunction(big_q, bohr);
        let ket = b.wavefunction(small_q, bohr) * d.wavefunction(small_q, bohr).conj();
        Some(bra * ket * e)
    };
    let n_blocks = cfg.samples.div_ceil(cfg.block_size);
    let blocks = map_range(n_blocks, |blk| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(blk as u64);
        let count = cfg.block_size.min(cfg.samples - blk * cfg.block_size);
        let mut m = Moments::default();
        for _ in 0..count {
            let (big_q, small_q) = proposal.sample(&mut rng);
            // antithetic partner (−q, −Q) has the same proposal density
            let w = match (
                integrand(big_q, small_q),
                integrand(neg(small_q), neg(big_q)),
            ) {
                (Some(f), Some(g)) => 0.5 * (f + g) / proposal.density(big_q, small_q),
                _ => {
                    m.excluded += 1;
                    C64::new(0.0, 0.0)
                }
            };
            m.push(w);
        }
        m
    });
    let total = blocks.into_iter().fold(Moments::default(), Moments::merge);
    let n = total.n;
    let est = McEstimate {
        re: total.mean_re,
        im: total.mean_im,
        stderr_re: (total.m2_re / (n - 1.0) / n).sqrt(),
        stderr_im: (total.m2_im / (n - 1.0) / n).sqrt(),
        samples: cfg.samples,
        excluded: total.excluded,
        shell_bound: shell_bound(a, b, c, d, e2, cfg.eps_reg),
    };
    if let Some(tol) = cfg.tolerance {
        if est.stderr() > tol {
            return Err(Error::NotConverged {
                stderr: est.stderr(),
                tolerance: tol,
            });
        }
    }
    Ok(est)
}

// Within |Q+q| < ε: |ℰ| ≤ 4e²|Q−q|/|Q+q|² + e²/|Q| + e²/|q|; the leading
// term integrates to 16πe²ε·|Q−q| over the shell.
fn shell_bound(
    a: &HydrogenState,
    b: &HydrogenState,
    c: &HydrogenState,
    d: &HydrogenState,
    e2: f64,
    eps: f64,
) -> f64 {
    let bohr = 1.0 / e2;
    let amax = a.sup_bound(bohr) * c.sup_bound(bohr);
    let bmax = b.sup_bound(bohr) * d.sup_bound(bohr);
    let mean_r = 0.5 * (b.mean_radius(bohr) + d.mean_radius(bohr));
    let shell = 16.0 * PI * e2 * eps * amax * 2.0 * (mean_r + eps);
    let points = 4.0 * PI * e2 * eps * eps * (amax + bmax);
    shell + points
}
