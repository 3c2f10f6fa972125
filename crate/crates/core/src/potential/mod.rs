//! Potentials, superpotentials and the superoperator `ℰ`.
//!
//! For a potential `V`, the quantum superpotential is `V(Q) − V(q)` and the
//! classical one is `(Q − q)·V′((Q + q)/2)`. Their difference
//!
//! ```text
//! ℰ(Q,q) = (Q − q)·V′((Q + q)/2) − V(Q) + V(q) = −ℰ(q,Q)
//! ```
//!
//! is the only place where classical and quantum dynamics differ. For
//! polynomial `V` each monomial `c_k x^k` contributes to `ℰ` only when
//! `k ≥ 3`, so `ℰ ≡ 0` exactly for constant, linear and harmonic potentials.

mod bipartite;
mod coulomb;

pub use bipartite::{
    bipartite_cl_polynomial, bipartite_qm_polynomial, bipartite_super_potential,
    classify_bipartite_terms, classify_terms, ClassifiedTerm, MonomialClass, MultiPoly, Var,
};
pub use coulomb::{coulomb_e_superoperator, CoulombPotential, DEFAULT_EPS_REG};

use serde::{Deserialize, Serialize};

/// `V(x) = Σ c_k x^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl TryFrom<Vec<f64>> for Polynomial {
    type Error = crate::Error;

    fn try_from(coeffs: Vec<f64>) -> crate::Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(crate::Error::InvalidParameter(
                "polynomial coefficients must be finite".into(),
            ));
        }
        Ok(Self::new(coeffs))
    }
}

impl From<Polynomial> for Vec<f64> {
    fn from(p: Polynomial) -> Self {
        p.coeffs
    }
}

impl Polynomial {
    /// Trailing zero coefficients are dropped.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    /// `λ x⁴`.
    pub fn quartic(lambda: f64) -> Self {
        Self::new(vec![0.0, 0.0, 0.0, 0.0, lambda])
    }

    /// `½ m ω² x²`.
    pub fn harmonic(mass: f64, omega: f64) -> Self {
        Self::new(vec![0.0, 0.0, 0.5 * mass * omega * omega])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }
}

/// Selects the quantum (`V(Q) − V(q)`) or classical superpotential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    #[serde(rename = "qm")]
    Quantum,
    #[serde(rename = "cl")]
    Classical,
}

impl Kind {
    pub fn label(self) -> &'static str {
        match self {
            Kind::Quantum => "qm",
            Kind::Classical => "cl",
        }
    }
}

impl std::str::FromStr for Kind {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qm" | "quantum" => Ok(Kind::Quantum),
            "cl" | "classical" => Ok(Kind::Classical),
            other => Err(crate::Error::InvalidParameter(format!(
                "unknown dynamics kind `{other}`"
            ))),
        }
    }
}

pub fn super_potential(v: &Polynomial, kind: Kind, big_q: f64, small_q: f64) -> f64 {
    match kind {
        Kind::Quantum => v.eval(big_q) - v.eval(small_q),
        Kind::Classical => (big_q - small_q) * v.derivative().eval(0.5 * (big_q + small_q)),
    }
}

/// `ℰ(Q,q)`, summed monomial by monomial from degree 3 upwards.
///
/// Each monomial is written as `(Q − q)·[k·m^{k−1} − Σⱼ Qʲ q^{k−1−j}]` with
/// `m = (Q+q)/2`, which keeps the antisymmetry to rounding level.
pub fn e_superoperator(v: &Polynomial, big_q: f64, small_q: f64) -> f64 {
    let mid = 0.5 * (big_q + small_q);
    let mut bracket = 0.0;
    for (k, &c) in v.coeffs().iter().enumerate().skip(3) {
        if c == 0.0 {
            continue;
        }
        let mut geometric = 0.0;
        for j in 0..k {
            geometric += big_q.powi(j as i32) * small_q.powi((k - 1 - j) as i32);
        }
        bracket += c * (k as f64 * mid.powi(k as i32 - 1) - geometric);
    }
    (big_q - small_q) * bracket
}

/// True iff `ℰ ≡ 0`, i.e. `V` is constant, linear or harmonic.
pub fn e_vanishes_identically(v: &Polynomial) -> bool {
    v.degree() <= 2
}

/// `max |ℰ|` over an `n × n` uniform sample of `[lo, hi]²` (numerical check).
pub fn max_abs_e_on_grid(v: &Polynomial, lo: f64, hi: f64, n: usize) -> f64 {
    let step = if n > 1 {
        (hi - lo) / (n - 1) as f64
    } else {
        0.0
    };
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let e = e_superoperator(v, lo + i as f64 * step, lo + j as f64 * step);
            worst = worst.max(e.abs());
        }
    }
    worst
}
