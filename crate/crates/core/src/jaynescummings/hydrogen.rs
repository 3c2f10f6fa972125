//! Hydrogen-like orbitals with `n ≤ 3` in units where `ħ = m = 1`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Quantum numbers `(n, l, m)` of a bound hydrogenic state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "(u32, u32, i32)", into = "(u32, u32, i32)")]
pub struct HydrogenState {
    n: u32,
    l: u32,
    m: i32,
}

impl TryFrom<(u32, u32, i32)> for HydrogenState {
    type Error = Error;
    fn try_from((n, l, m): (u32, u32, i32)) -> Result<Self> {
        Self::new(n, l, m)
    }
}

impl From<HydrogenState> for (u32, u32, i32) {
    fn from(s: HydrogenState) -> Self {
        (s.n, s.l, s.m)
    }
}

impl HydrogenState {
    pub const MAX_N: u32 = 3;

    pub fn new(n: u32, l: u32, m: i32) -> Result<Self> {
        if n == 0 || l >= n || m.unsigned_abs() > l {
            return Err(Error::InvalidParameter(format!(
                "invalid hydrogen quantum numbers ({n},{l},{m})"
            )));
        }
        if n > Self::MAX_N {
            return Err(Error::InvalidParameter(format!(
                "orbitals are bundled for n ≤ {}, got n = {n}",
                Self::MAX_N
            )));
        }
        Ok(Self { n, l, m })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    /// `(−1)^l`.
    pub fn parity(&self) -> i32 {
        if self.l.is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// Radial nodes `n − l − 1`.
    pub fn radial_nodes(&self) -> u32 {
        self.n - self.l - 1
    }

    /// `⟨r⟩ = (a/2)(3n² − l(l+1))`.
    pub fn mean_radius(&self, bohr: f64) -> f64 {
        let (n, l) = (self.n as f64, self.l as f64);
        0.5 * bohr * (3.0 * n * n - l * (l + 1.0))
    }

    /// `R_nl(r)` for Bohr radius `bohr`.
    pub fn radial(&self, r: f64, bohr: f64) -> f64 {
        let rho = r / bohr;
        let pre = bohr.powf(-1.5);
        pre * match (self.n, self.l) {
            (1, 0) => 2.0 * (-rho).exp(),
            (2, 0) => (1.0 - rho / 2.0) * (-rho / 2.0).exp() / 2f64.sqrt(),
            (2, 1) => rho * (-rho / 2.0).exp() / 24f64.sqrt(),
            (3, 0) => {
                2.0 / 27f64.sqrt()
                    * (1.0 - 2.0 * rho / 3.0 + 2.0 * rho * rho / 27.0)
                    * (-rho / 3.0).exp()
            }
            (3, 1) => 8.0 / (27.0 * 6f64.sqrt()) * rho * (1.0 - rho / 6.0) * (-rho / 3.0).exp(),
            (3, 2) => 4.0 / (81.0 * 30f64.sqrt()) * rho * rho * (-rho / 3.0).exp(),
            _ => unreachable!("validated in new"),
        }
    }

    /// Complex spherical harmonic `Y_lm` (Condon-Shortley phase) at a
    /// direction given by a nonzero vector.
    pub fn angular(&self, x: [f64; 3]) -> C64 {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if r == 0.0 {
            return if self.l == 0 {
                C64::new(1.0 / (4.0 * PI).sqrt(), 0.0)
            } else {
                C64::new(0.0, 0.0)
            };
        }
        let (ux, uy, uz) = (x[0] / r, x[1] / r, x[2] / r);
        let plus = C64::new(ux, uy);
        let minus = C64::new(ux, -uy);
        match (self.l, self.m) {
            (0, 0) => C64::new(1.0 / (4.0 * PI).sqrt(), 0.0),
            (1, 0) => C64::new((3.0 / (4.0 * PI)).sqrt() * uz, 0.0),
            (1, 1) => -plus * (3.0 / (8.0 * PI)).sqrt(),
            (1, -1) => minus * (3.0 / (8.0 * PI)).sqrt(),
            (2, 0) => C64::new((5.0 / (16.0 * PI)).sqrt() * (3.0 * uz * uz - 1.0), 0.0),
            (2, 1) => -plus * uz * (15.0 / (8.0 * PI)).sqrt(),
            (2, -1) => minus * uz * (15.0 / (8.0 * PI)).sqrt(),
            (2, 2) => plus * plus * (15.0 / (32.0 * PI)).sqrt(),
            (2, -2) => minus * minus * (15.0 / (32.0 * PI)).sqrt(),
            _ => unreachable!("validated in new"),
        }
    }

    /// `ψ_nlm(x)`.
    pub fn wavefunction(&self, x: [f64; 3], bohr: f64) -> C64 {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        self.angular(x) * self.radial(r, bohr)
    }

    /// Upper bound on `|ψ|` from sampled radial and angular maxima.
    pub(crate) fn sup_bound(&self, bohr: f64) -> f64 {
        let rmax = 40.0 * bohr;
        let radial = (0..=4000)
            .map(|k| self.radial(rmax * k as f64 / 4000.0, bohr).abs())
            .fold(0.0, f64::max);
        let angular = (0..=720)
            .map(|k| {
                let th = PI * k as f64 / 720.0;
                self.angular([th.sin(), 0.0, th.cos()]).norm()
            })
            .fold(0.0, f64::max);
        radial * angular * 1.01
    }
}

impl fmt::Display for HydrogenState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letter = ['s', 'p', 'd'][self.l as usize];
        if self.l == 0 {
            write!(f, "{}{}", self.n, letter)
        } else {
            write!(f, "{}{}{:+}", self.n, letter, self.m)
        }
    }
}

/// `"1s"`, `"2p"`, `"2p-1"`, `"3d+2"`; `m` defaults to 0.
impl FromStr for HydrogenState {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse orbital '{s}'"));
        let s = s.trim();
        let mut chars = s.char_indices();
        let (_, nc) = chars.next().ok_or_else(bad)?;
        let n = nc.to_digit(10).ok_or_else(bad)?;
        let (i, lc) = chars.next().ok_or_else(bad)?;
        let l = match lc {
            's' => 0,
            'p' => 1,
            'd' => 2,
            _ => return Err(bad()),
        };
        let rest = &s[i + 1..];
        let m = if rest.is_empty() {
            0
        } else {
            rest.parse::<i32>().map_err(|_| bad())?
        };
        Self::new(n, l, m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;

    fn all_states() -> Vec<HydrogenState> {
        let mut v = Vec::new();
        for n in 1..=3u32 {
            for l in 0..n {
                for m in -(l as i32)..=(l as i32) {
                    v.push(HydrogenState::new(n, l, m).unwrap());
                }
            }
        }
        v
    }

    #[test]
    fn radial_normalization_and_mean_radius() {
        let bohr = 1.3;
        for s in all_states() {
            let norm = integrate(
                |r| C64::new((s.radial(r, bohr) * r).powi(2), 0.0),
                0.0,
                80.0 * bohr,
                1e-13,
                1e-11,
                400,
            )
            .unwrap();
            assert!((norm.value.re - 1.0).abs() < 1e-9, "{s}");
            let mean = integrate(
                |r| C64::new((s.radial(r, bohr) * r).powi(2) * r, 0.0),
                0.0,
                80.0 * bohr,
                1e-13,
                1e-11,
                400,
            )
            .unwrap();
            assert!((mean.value.re - s.mean_radius(bohr)).abs() < 1e-8, "{s}");
        }
    }

    #[test]
    fn spherical_harmonics_orthonormal() {
        let states = all_states();
        let (nt, np) = (64, 64);
        // Gauss-Legendre would be exact; a fine midpoint grid in cos θ suffices here
        for a in &states {
            for b in &states {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..nt {
                    let ct = -1.0 + (i as f64 + 0.5) * 2.0 / nt as f64;
                    let st = (1.0 - ct * ct).sqrt();
                    for j in 0..np {
                        let ph = 2.0 * PI * j as f64 / np as f64;
                        let u = [st * ph.cos(), st * ph.sin(), ct];
                        acc += a.angular(u).conj() * b.angular(u);
                    }
                }
                acc *= 2.0 / nt as f64 * 2.0 * PI / np as f64;
                let expect = if a.l == b.l && a.m == b.m { 1.0 } else { 0.0 };
                assert!((acc - expect).norm() < 2e-3, "{a} {b}: {acc}");
            }
        }
    }

    #[test]
    fn parity_of_wavefunctions() {
        for s in all_states() {
            let x = [0.3, -0.7, 1.1];
            let y = [-0.3, 0.7, -1.1];
            let a = s.wavefunction(x, 1.0);
            let b = s.wavefunction(y, 1.0);
            assert!((b - a * s.parity() as f64).norm() < 1e-14, "{s}");
        }
    }

    #[test]
    fn parse_and_validate() {
        assert_eq!(
            "2p-1".parse::<HydrogenState>().unwrap(),
            HydrogenState::new(2, 1, -1).unwrap()
        );
        assert_eq!("1s".parse::<HydrogenState>().unwrap().to_string(), "1s");
        assert_eq!("3d+2".parse::<HydrogenState>().unwrap().to_string(), "3d+2");
        assert!("2d".parse::<HydrogenState>().is_err());
        assert!("4s".parse::<HydrogenState>().is_err());
        assert!(HydrogenState::new(2, 1, 2).is_err());
        assert!(HydrogenState::new(0, 0, 0).is_err());
    }
}
