//! Jaynes-Cummings cavity QED with the classical Coulomb superoperator.
//!
//! Basis order is atom ⊗ Fock: `(g,0), (g,1), …, (g,n_max), (e,0), …`,
//! i.e. index `atom·(n_max+1) + n` with `g = 0`, `e = 1`, and `ω_g ≡ 0`.
//! Evolution follows `i∂ₜρ = [Ĥ_JC, ρ] + ℰ̂ρ` (`ħ = 1`), where `ℰ̂` acts on
//! the atom indices only.

mod hydrogen;
mod montecarlo;

pub use hydrogen::HydrogenState;
pub use montecarlo::{coulomb_superop_element, McConfig, McEstimate};

use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::evolution::ExactPropagator;
use crate::linalg::{hermiticity_deviation, max_abs, max_abs_diff, trace};
use crate::liouvillian::{BasisLiouvillian, LiouvilleOperator};
use crate::{CMatrix, Error, Result, C64};

pub const GROUND: usize = 0;
pub const EXCITED: usize = 1;

/// Largest population allowed in the top two Fock levels.
pub const TRUNCATION_TOL: f64 = 1e-6;

/// Tolerance of the product-state check in [`jc_evolve_first_order`].
pub const FACTORIZATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JCParams {
    pub omega_e: f64,
    pub omega: f64,
    pub d_eg: f64,
    pub n_max: usize,
    /// `ℰ_{eg,eg}`; `ℰ_{ge,ge} = −conj ℰ_{eg,eg}`.
    #[serde(default)]
    pub eps_egeg: [f64; 2],
    /// `ℰ_{ee,gg}`, purely imaginary; `ℰ_{gg,ee} = −conj ℰ_{ee,gg}`.
    #[serde(default)]
    pub eps_eegg: [f64; 2],
}

impl JCParams {
    pub fn new(omega_e: f64, omega: f64, d_eg: f64, n_max: usize) -> Self {
        Self {
            omega_e,
            omega,
            d_eg,
            n_max,
            eps_egeg: [0.0; 2],
            eps_eegg: [0.0; 2],
        }
    }

    pub fn with_eps(mut self, eps_egeg: C64) -> Self {
        self.eps_egeg = [eps_egeg.re, eps_egeg.im];
        self
    }

    pub fn with_eps_eegg(mut self, eps_eegg: C64) -> Self {
        self.eps_eegg = [eps_eegg.re, eps_eegg.im];
        self
    }

    pub fn eps_egeg(&self) -> C64 {
        C64::new(self.eps_egeg[0], self.eps_egeg[1])
    }

    pub fn eps_gege(&self) -> C64 {
        -self.eps_egeg().conj()
    }

    pub fn eps_eegg(&self) -> C64 {
        C64::new(self.eps_eegg[0], self.eps_eegg[1])
    }

    pub fn eps_ggee(&self) -> C64 {
        -self.eps_eegg().conj()
    }

    pub fn levels(&self) -> usize {
        self.n_max + 1
    }

    pub fn dim(&self) -> usize {
        2 * self.levels()
    }

    pub fn idx(&self, atom: usize, n: usize) -> usize {
        atom * self.levels() + n
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max < 1 {
            return Err(Error::InvalidParameter("n_max must be at least 1".into()));
        }
        let finite = [self.omega_e, self.omega, self.d_eg]
            .iter()
            .chain(&self.eps_egeg)
            .chain(&self.eps_eegg)
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter(
                "JC parameters must be finite".into(),
            ));
        }
        if self.eps_eegg[0] != 0.0 {
            return Err(Error::InvalidParameter(
                "ℰ_{ee,gg} must be purely imaginary for the evolution to stay Hermitian".into(),
            ));
        }
        Ok(())
    }

    /// `ℰ_{ab,cd}` on atom indices.
    pub fn eps(&self, a: usize, b: usize, c: usize, d: usize) -> C64 {
        match (a, b, c, d) {
            (EXCITED, GROUND, EXCITED, GROUND) => self.eps_egeg(),
            (GROUND, EXCITED, GROUND, EXCITED) => self.eps_gege(),
            (EXCITED, EXCITED, GROUND, GROUND) => self.eps_eegg(),
            (GROUND, GROUND, EXCITED, EXCITED) => self.eps_ggee(),
            _ => C64::new(0.0, 0.0),
        }
    }
}

fn annihilation(levels: usize) -> DMatrix<f64> {
    DMatrix::from_fn(levels, levels, |n, m| {
        if m == n + 1 {
            (m as f64).sqrt()
        } else {
            0.0
        }
    })
}

/// `Ĥ_JC = ω_e|e⟩⟨e| + ω(a†a + ½) + i d_eg(a|e⟩⟨g| − |g⟩⟨e|a†)`.
pub fn build_jc_hamiltonian(p: &JCParams) -> Result<CMatrix> {
    p.validate()?;
    let levels = p.levels();
    let a = annihilation(levels);
    let mut h = CMatrix::zeros(p.dim(), p.dim());
    for atom in [GROUND, EXCITED] {
        for n in 0..levels {
            let e = if atom == EXCITED { p.omega_e } else { 0.0 };
            h[(p.idx(atom, n), p.idx(atom, n))] = C64::new(e + p.omega * (n as f64 + 0.5), 0.0);
        }
    }
    for n in 0..levels {
        for m in 0..levels {
            if a[(n, m)] != 0.0 {
                // ⟨e,n| a|e⟩⟨g| |g,m⟩ and its adjoint
                h[(p.idx(EXCITED, n), p.idx(GROUND, m))] = C64::new(0.0, p.d_eg * a[(n, m)]);
                h[(p.idx(GROUND, m), p.idx(EXCITED, n))] = C64::new(0.0, -p.d_eg * a[(n, m)]);
            }
        }
    }
    Ok(h)
}

/// Multilevel atom with dipole coupling to one mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultilevelParams {
    /// `ωᵢ` per atomic level.
    pub levels: Vec<f64>,
    /// Row-major `d_ij`; must be symmetric.
    pub dipoles: Vec<Vec<f64>>,
    pub omega: f64,
    pub n_max: usize,
    /// Keep only `a|i⟩⟨j|` for `ωᵢ > ωⱼ` and `a†|j⟩⟨i|` for the reverse.
    #[serde(default)]
    pub rwa: bool,
}

/// `Σᵢωᵢ|i⟩⟨i| + ω(a†a+½) + iΣ_{i≠j} d_ij(a − a†)|i⟩⟨j|` on levels ⊗ Fock.
pub fn build_multilevel_hamiltonian(p: &MultilevelParams) -> Result<CMatrix> {
    let k = p.levels.len();
    if k == 0 || p.dipoles.len() != k || p.dipoles.iter().any(|r| r.len() != k) {
        return Err(Error::InvalidParameter(
            "dipole matrix must be square and match the level count".into(),
        ));
    }
    for i in 0..k {
        for j in 0..i {
            if p.dipoles[i][j] != p.dipoles[j][i] {
                return Err(Error::NonHermitianAssembly(format!(
                    "d[{i}][{j}] = {} differs from d[{j}][{i}] = {}",
                    p.dipoles[i][j], p.dipoles[j][i]
                )));
            }
        }
    }
    let levels = p.n_max + 1;
    let a = annihilation(levels);
    let idx = |i: usize, n: usize| i * levels + n;
    let mut h = CMatrix::zeros(k * levels, k * levels);
    for (i, &w) in p.levels.iter().enumerate() {
        for n in 0..levels {
            h[(idx(i, n), idx(i, n))] = C64::new(w + p.omega * (n as f64 + 0.5), 0.0);
        }
    }
    for i in 0..k {
        for j in 0..k {
            let d = p.dipoles[i][j];
            if i == j || d == 0.0 {
                continue;
            }
            let keep_a = !p.rwa || p.levels[i] >= p.levels[j];
            let keep_ad = !p.rwa || p.levels[i] <= p.levels[j];
            for n in 0..levels {
                for m in 0..levels {
                    // ⟨n|a|m⟩ and ⟨n|a†|m⟩ = ⟨m|a|n⟩
                    let mut f = 0.0;
                    if keep_a {
                        f += a[(n, m)];
                    }
                    if keep_ad {
                        f -= a[(m, n)];
                    }
                    if f != 0.0 {
                        h[(idx(i, n), idx(j, m))] += C64::new(0.0, d * f);
                    }
                }
            }
        }
    }
    let dev = hermiticity_deviation(&h);
    if dev > 1e-12 * (1.0 + max_abs(&h)) {
        return Err(Error::NonHermitianAssembly(format!(
            "assembled Hamiltonian deviates by {dev:e}"
        )));
    }
    Ok(h)
}

/// `ℰ̂` as a Liouville-space matrix: `(ℰ̂ρ)_{an,bn′} = Σ_cd ℰ_{ab,cd} ρ_{cn,dn′}`.
pub fn coulomb_superoperator_matrix(p: &JCParams) -> CMatrix {
    let dim = p.dim();
    let levels = p.levels();
    let mut s = CMatrix::zeros(dim * dim, dim * dim);
    for a in [GROUND, EXCITED] {
        for b in [GROUND, EXCITED] {
            for c in [GROUND, EXCITED] {
                for d in [GROUND, EXCITED] {
                    let e = p.eps(a, b, c, d);
                    if e == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for n in 0..levels {
                        for m in 0..levels {
                            let r = p.idx(a, n) * dim + p.idx(b, m);
                            let col = p.idx(c, n) * dim + p.idx(d, m);
                            s[(r, col)] = e;
                        }
                    }
                }
            }
        }
    }
    s
}

/// Basis Liouvillian `[Ĥ_JC, ·] + ℰ̂`.
///
/// A nonzero `ℰ_{ee,gg}` moves weight between the population blocks and
/// changes the trace at rate `κ·Tr ρ` for `ℰ_{ee,gg} = iκ`; only
/// `ℰ_{ee,gg} = 0` conserves it.
pub fn jc_liouvillian(p: &JCParams) -> Result<BasisLiouvillian> {
    let h = build_jc_hamiltonian(p)?;
    if p.eps_eegg() != C64::new(0.0, 0.0) {
        log::warn!("ℰ_ee,gg = {} does not conserve the trace", p.eps_eegg());
    }
    let eps_zero = p.eps_egeg() == C64::new(0.0, 0.0) && p.eps_eegg() == C64::new(0.0, 0.0);
    BasisLiouvillian::new(
        h,
        if eps_zero {
            None
        } else {
            Some(coulomb_superoperator_matrix(p))
        },
    )
}

/// Initial states: `e<n>`, `g<n>`, `x<n>` (atom in `(|g⟩+|e⟩)/√2`) with
/// Fock state `n`, and `coherent:α` (excited atom, coherent field).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    Excited(usize),
    Ground(usize),
    Superposition(usize),
    Coherent(f64),
}

impl FromStr for InitialState {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unknown initial state '{s}'"));
        if let Some(alpha) = s.strip_prefix("coherent:") {
            return alpha
                .trim()
                .parse()
                .map(InitialState::Coherent)
                .map_err(|_| bad());
        }
        let (head, tail) = s.split_at(s.char_indices().nth(1).map_or(s.len(), |(i, _)| i));
        let n: usize = tail.parse().map_err(|_| bad())?;
        match head {
            "e" => Ok(InitialState::Excited(n)),
            "g" => Ok(InitialState::Ground(n)),
            "x" => Ok(InitialState::Superposition(n)),
            _ => Err(bad()),
        }
    }
}

/// Density matrix in the JC basis.
#[derive(Debug, Clone, PartialEq)]
pub struct JCDensity {
    pub n_max: usize,
    pub values: CMatrix,
}

impl JCDensity {
    pub fn new(n_max: usize, values: CMatrix) -> Result<Self> {
        let dim = 2 * (n_max + 1);
        if values.shape() != (dim, dim) {
            return Err(Error::InvalidParameter(format!(
                "JC density must be {dim}×{dim}, got {:?}",
                values.shape()
            )));
        }
        Ok(Self { n_max, values })
    }

    fn levels(&self) -> usize {
        self.n_max + 1
    }

    fn idx(&self, atom: usize, n: usize) -> usize {
        atom * self.levels() + n
    }

    /// `ρ_atom ⊗ ρ_field`.
    pub fn product(atom: &CMatrix, field: &CMatrix) -> Result<Self> {
        if atom.shape() != (2, 2) || field.nrows() != field.ncols() || field.nrows() < 2 {
            return Err(Error::InvalidParameter(
                "atom must be 2×2 and field square".into(),
            ));
        }
        Ok(Self {
            n_max: field.nrows() - 1,
            values: atom.kronecker(field),
        })
    }

    /// Pure product state from atom and field amplitudes.
    pub fn pure_product(atom: [C64; 2], field: &[C64]) -> Result<Self> {
        let a = CMatrix::from_fn(2, 2, |i, j| atom[i] * atom[j].conj());
        let f = CMatrix::from_fn(field.len(), field.len(), |i, j| field[i] * field[j].conj());
        Self::product(&a, &f)
    }

    pub fn initial(state: InitialState, n_max: usize) -> Result<Self> {
        let levels = n_max + 1;
        let fock = |n: usize| -> Result<Vec<C64>> {
            if n > n_max {
                return Err(Error::InvalidParameter(format!(
                    "Fock state {n} above n_max = {n_max}"
                )));
            }
            let mut v = vec![C64::new(0.0, 0.0); levels];
            v[n] = C64::new(1.0, 0.0);
            Ok(v)
        };
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        match state {
            InitialState::Excited(n) => Self::pure_product([zero, one], &fock(n)?),
            InitialState::Ground(n) => Self::pure_product([one, zero], &fock(n)?),
            InitialState::Superposition(n) => {
                let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                Self::pure_product([h, h], &fock(n)?)
            }
            InitialState::Coherent(alpha) => {
                let mut amp = vec![C64::new(0.0, 0.0); levels];
                let mut c = (-0.5 * alpha * alpha).exp();
                for (n, z) in amp.iter_mut().enumerate() {
                    if n > 0 {
                        c *= alpha / (n as f64).sqrt();
                    }
                    *z = C64::new(c, 0.0);
                }
                let norm = amp.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                amp.iter_mut().for_each(|z| *z /= norm);
                Self::pure_product([zero, one], &amp)
            }
        }
    }

    pub fn trace(&self) -> f64 {
        trace(&self.values).re
    }

    pub fn purity(&self) -> f64 {
        (&self.values * &self.values).trace().re
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        hermiticity_deviation(&self.values)
    }

    pub fn excited_population(&self) -> f64 {
        (0..self.levels())
            .map(|n| self.values[(self.idx(EXCITED, n), self.idx(EXCITED, n))].re)
            .sum()
    }

    /// `ρ_{eg|nn′}`.
    pub fn coherence(&self, n: usize, n_prime: usize) -> C64 {
        self.values[(self.idx(EXCITED, n), self.idx(GROUND, n_prime))]
    }

    /// Field block `ρ_{ab|··}`.
    pub fn atom_block(&self, a: usize, b: usize) -> CMatrix {
        let l = self.levels();
        self.values.view((a * l, b * l), (l, l)).into_owned()
    }

    /// Population of the two highest Fock levels.
    pub fn top_fock_population(&self) -> f64 {
        let l = self.levels();
        (l.saturating_sub(2)..l)
            .flat_map(|n| [GROUND, EXCITED].map(|a| (a, n)))
            .map(|(a, n)| self.values[(self.idx(a, n), self.idx(a, n))].re)
            .sum()
    }

    /// Errors with `TruncationLeak` when the top two Fock levels carry too
    /// much population. Skipped for `n_max < 3`, where those levels are
    /// the dynamics itself.
    pub fn check_truncation(&self) -> Result<()> {
        if self.n_max < 3 {
            log::warn!(
                "n_max = {} is too small for the Fock truncation guard",
                self.n_max
            );
            return Ok(());
        }
        let population = self.top_fock_population();
        if population > TRUNCATION_TOL {
            return Err(Error::TruncationLeak {
                population,
                tolerance: TRUNCATION_TOL,
            });
        }
        Ok(())
    }

    /// Reduced atom and field matrices if `ρ = ρ_atom ⊗ ρ_field` within `tol`.
    pub fn factorize(&self, tol: f64) -> Result<(CMatrix, CMatrix)> {
        let l = self.levels();
        let tr = trace(&self.values);
        let field = self.atom_block(GROUND, GROUND) + self.atom_block(EXCITED, EXCITED);
        let atom = CMatrix::from_fn(2, 2, |a, b| {
            (0..l)
                .map(|n| self.values[(self.idx(a, n), self.idx(b, n))])
                .sum()
        });
        let atom = atom / tr;
        let deviation = max_abs_diff(&atom.kronecker(&field), &self.values);
        if deviation > tol {
            return Err(Error::NotFactorized { deviation });
        }
        Ok((atom, field))
    }
}

fn check_state(p: &JCParams, rho: &JCDensity) -> Result<()> {
    p.validate()?;
    if rho.n_max != p.n_max {
        return Err(Error::InvalidParameter(format!(
            "state n_max {} differs from parameters {}",
            rho.n_max, p.n_max
        )));
    }
    Ok(())
}

/// Exact evolution under `[Ĥ_JC, ·] + ℰ̂`.
pub fn jc_evolve_exact(p: &JCParams, rho0: &JCDensity, t: f64) -> Result<JCDensity> {
    Ok(jc_series(p, rho0, &[t])?.pop().expect("one time").1)
}

/// Exact states at several times from one propagator.
pub fn jc_series(p: &JCParams, rho0: &JCDensity, times: &[f64]) -> Result<Vec<(f64, JCDensity)>> {
    check_state(p, rho0)?;
    let l = jc_liouvillian(p)?;
    let prop = ExactPropagator::from_dense(l.dense()?, 1.0)?;
    times
        .iter()
        .map(|&t| {
            let rho = JCDensity::new(p.n_max, prop.apply(&rho0.values, t))?;
            rho.check_truncation()?;
            Ok((t, rho))
        })
        .collect()
}

/// First-order evolution of a product state.
///
/// Every block gets its free phase `e^{−it[ω_a − ω_b + ω(n−n′)]}` times
/// `ρ(0) − it(ℰ̂ρ)(0) + t·(dipole term)`. On the `eg` block this is
/// `ρ_{eg|nn′}(0)(1 − itℰ_{eg,eg}) + d_eg t[√(n+1)ρ_gg ρ_{n+1,n′} − √n′ ρ_ee ρ_{n,n′−1}]`.
pub fn jc_evolve_first_order(p: &JCParams, rho0: &JCDensity, t: f64) -> Result<JCDensity> {
    check_state(p, rho0)?;
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "time must be nonnegative, got {t}"
        )));
    }
    let (atom, field) = rho0.factorize(FACTORIZATION_TOL)?;
    let levels = p.levels();
    let d = p.d_eg;
    let fld = |n: isize, m: isize| -> C64 {
        if n < 0 || m < 0 || n as usize >= levels || m as usize >= levels {
            C64::new(0.0, 0.0)
        } else {
            field[(n as usize, m as usize)]
        }
    };
    let sq = |n: isize| (n.max(0) as f64).sqrt();
    let freq = |a: usize| if a == EXCITED { p.omega_e } else { 0.0 };
    let mut out = CMatrix::zeros(p.dim(), p.dim());
    for a in [GROUND, EXCITED] {
        for b in [GROUND, EXCITED] {
            for n in 0..levels {
                for m in 0..levels {
                    let (ni, mi) = (n as isize, m as isize);
                    // −i[V,ρ] with V = i d(a|e⟩⟨g| − a†|g⟩⟨e|)
                    let mut dip = C64::new(0.0, 0.0);
                    if a == EXCITED {
                        dip += atom[(GROUND, b)] * fld(ni + 1, mi) * sq(ni + 1);
                    } else {
                        dip -= atom[(EXCITED, b)] * fld(ni - 1, mi) * sq(ni);
                    }
                    if b == EXCITED {
                        dip += atom[(a, GROUND)] * fld(ni, mi + 1) * sq(mi + 1);
                    } else {
                        dip -= atom[(a, EXCITED)] * fld(ni, mi - 1) * sq(mi);
                    }
                    let mut eps = C64::new(0.0, 0.0);
                    for c in [GROUND, EXCITED] {
                        for e in [GROUND, EXCITED] {
                            eps += p.eps(a, b, c, e) * atom[(c, e)];
                        }
                    }
                    let f0 = field[(n, m)];
                    let body = atom[(a, b)] * f0 - C64::new(0.0, t) * eps * f0 + dip * (d * t);
                    let phase = -t * (freq(a) - freq(b) + p.omega * (ni - mi) as f64);
                    out[(p.idx(a, n), p.idx(b, m))] = body * C64::from_polar(1.0, phase);
                }
            }
        }
    }
    JCDensity::new(p.n_max, out)
}

/// One row of the `jc` report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JCRow {
    pub t: f64,
    pub p_e: f64,
    pub coherence_00: f64,
    pub trace: f64,
    pub purity: f64,
}

pub fn jc_report(p: &JCParams, rho0: &JCDensity, times: &[f64]) -> Result<Vec<JCRow>> {
    Ok(jc_series(p, rho0, times)?
        .into_iter()
        .map(|(t, r)| JCRow {
            t,
            p_e: r.excited_population(),
            coherence_00: r.coherence(0, 0).norm(),
            trace: r.trace(),
            purity: r.purity(),
        })
        .collect())
}
