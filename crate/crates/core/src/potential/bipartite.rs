use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Superspace coordinates of two subsystems in the fixed order
/// `(Q₁, q₁, Q₂, q₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    BigQ1 = 0,
    SmallQ1 = 1,
    BigQ2 = 2,
    SmallQ2 = 3,
}

/// Polynomial in `(Q₁, q₁, Q₂, q₂)` keyed by exponent tuples.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MultiPoly {
    terms: BTreeMap<[u32; 4], f64>,
}

impl MultiPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial([0; 4], c)
    }

    pub fn var(v: Var) -> Self {
        let mut e = [0; 4];
        e[v as usize] = 1;
        Self::monomial(e, 1.0)
    }

    pub fn monomial(exponents: [u32; 4], coefficient: f64) -> Self {
        let mut p = Self::zero();
        p.add_term(exponents, coefficient);
        p
    }

    fn add_term(&mut self, exponents: [u32; 4], coefficient: f64) {
        if coefficient == 0.0 {
            return;
        }
        let slot = self.terms.entry(exponents).or_insert(0.0);
        *slot += coefficient;
        if *slot == 0.0 {
            self.terms.remove(&exponents);
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::zero();
        for (&e, &c) in &self.terms {
            out.add_term(e, c * s);
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::constant(1.0), |acc, _| &acc * self)
    }

    pub fn terms(&self) -> impl Iterator<Item = ([u32; 4], f64)> + '_ {
        self.terms.iter().map(|(&e, &c)| (e, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exponents: [u32; 4]) -> f64 {
        self.terms.get(&exponents).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, x: [f64; 4]) -> f64 {
        self.terms
            .iter()
            .map(|(e, &c)| c * (0..4).map(|i| x[i].powi(e[i] as i32)).product::<f64>())
            .sum()
    }

    /// Drops coefficients with `|c| ≤ tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.abs() > tol)
                .map(|(&e, &c)| (e, c))
                .collect(),
        }
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (&e, &c) in &rhs.terms {
            out.add_term(e, c);
        }
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self + &(-rhs)
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(-1.0)
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (a, &ca) in &self.terms {
            for (b, &cb) in &rhs.terms {
                let e = [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]];
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

/// Which side of the density matrix, and which subsystems, a monomial
/// touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonomialClass {
    /// Only `Q₁`, `Q₂` (acts from the left).
    PureBra,
    /// Only `q₁`, `q₂` (acts from the right).
    PureKet,
    /// Both `Qₐ` and `qₐ` of one subsystem, nothing of the other.
    IntraSubsystemMixed,
    /// A bra variable of one subsystem together with a ket variable of the other.
    InterSpaceCross,
}

impl MonomialClass {
    pub fn of(e: [u32; 4]) -> Self {
        let has = |v: Var| e[v as usize] > 0;
        let bra = has(Var::BigQ1) || has(Var::BigQ2);
        let ket = has(Var::SmallQ1) || has(Var::SmallQ2);
        if !ket {
            return MonomialClass::PureBra;
        }
        if !bra {
            return MonomialClass::PureKet;
        }
        let cross =
            (has(Var::BigQ1) && has(Var::SmallQ2)) || (has(Var::BigQ2) && has(Var::SmallQ1));
        if cross {
            MonomialClass::InterSpaceCross
        } else {
            MonomialClass::IntraSubsystemMixed
        }
    }

    pub fn is_mixed(self) -> bool {
        matches!(
            self,
            MonomialClass::IntraSubsystemMixed | MonomialClass::InterSpaceCross
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedTerm {
    pub exponents: [u32; 4],
    pub coefficient: f64,
    pub class: MonomialClass,
}

/// Expands the classical relative-quartic superpotential and classifies
/// every monomial.
pub fn classify_bipartite_terms(lambda: f64) -> Vec<ClassifiedTerm> {
    classify_terms(&bipartite_cl_polynomial(lambda))
}

pub fn classify_terms(p: &MultiPoly) -> Vec<ClassifiedTerm> {
    p.terms()
        .map(|(exponents, coefficient)| ClassifiedTerm {
            exponents,
            coefficient,
            class: MonomialClass::of(exponents),
        })
        .collect()
}

fn relative(a: Var, b: Var) -> MultiPoly {
    &MultiPoly::var(a) - &MultiPoly::var(b)
}

/// `λ(Q₁−Q₂)⁴ − λ(q₁−q₂)⁴`.
pub fn bipartite_qm_polynomial(lambda: f64) -> MultiPoly {
    let big = relative(Var::BigQ1, Var::BigQ2).pow(4);
    let small = relative(Var::SmallQ1, Var::SmallQ2).pow(4);
    (&big - &small).scale(lambda)
}

/// `(λ/2)(Q_r − q_r)(Q_r + q_r)³` with `Q_r = Q₁−Q₂`, `q_r = q₁−q₂`.
pub fn bipartite_cl_polynomial(lambda: f64) -> MultiPoly {
    let qr = relative(Var::BigQ1, Var::BigQ2);
    let sr = relative(Var::SmallQ1, Var::SmallQ2);
    let diff = &qr - &sr;
    let sum = &qr + &sr;
    (&diff * &sum.pow(3)).scale(0.5 * lambda)
}

/// Direct evaluation of the classical relative-quartic superpotential.
pub fn bipartite_super_potential(
    lambda: f64,
    big_q1: f64,
    small_q1: f64,
    big_q2: f64,
    small_q2: f64,
) -> f64 {
    let qr = big_q1 - big_q2;
    let sr = small_q1 - small_q2;
    0.5 * lambda * (qr - sr) * (qr + sr).powi(3)
}
