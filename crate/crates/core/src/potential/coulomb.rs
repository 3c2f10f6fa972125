use crate::{Error, Result};

/// Radius below which Coulomb evaluations are refused.
pub const DEFAULT_EPS_REG: f64 = 1e-6;

/// `V(χ) = −e²/|χ|` in three dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoulombPotential {
    pub e2: f64,
    pub eps_reg: f64,
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

impl CoulombPotential {
    pub fn new(e2: f64) -> Self {
        Self {
            e2,
            eps_reg: DEFAULT_EPS_REG,
        }
    }

    pub fn with_eps_reg(mut self, eps_reg: f64) -> Self {
        self.eps_reg = eps_reg;
        self
    }

    /// Bohr radius for unit mass and ħ.
    pub fn bohr_radius(&self) -> f64 {
        1.0 / self.e2
    }

    pub fn potential(&self, chi: [f64; 3]) -> Result<f64> {
        let r = norm(chi);
        if r < self.eps_reg {
            return Err(Error::SingularRegion(format!(
                "|χ| = {r:e} below {:e}",
                self.eps_reg
            )));
        }
        Ok(-self.e2 / r)
    }

    /// `∇V(χ) = e² χ / |χ|³`.
    pub fn gradient(&self, chi: [f64; 3]) -> Result<[f64; 3]> {
        let r = norm(chi);
        if r < self.eps_reg {
            return Err(Error::SingularRegion(format!(
                "|χ| = {r:e} below {:e}",
                self.eps_reg
            )));
        }
        let f = self.e2 / (r * r * r);
        Ok([f * chi[0], f * chi[1], f * chi[2]])
    }

    /// Classical superpotential `(Q − q)·∇V((Q + q)/2)`.
    pub fn classical_super_potential(&self, big_q: [f64; 3], small_q: [f64; 3]) -> Result<f64> {
        let mid = [
            0.5 * (big_q[0] + small_q[0]),
            0.5 * (big_q[1] + small_q[1]),
            0.5 * (big_q[2] + small_q[2]),
        ];
        let g = self.gradient(mid)?;
        Ok((0..3).map(|i| (big_q[i] - small_q[i]) * g[i]).sum())
    }

    pub fn quantum_super_potential(&self, big_q: [f64; 3], small_q: [f64; 3]) -> Result<f64> {
        Ok(self.potential(big_q)? - self.potential(small_q)?)
    }

    /// `ℰ(Q,q)`; errors inside any of the three excluded shells
    /// `|Q|`, `|q|`, `|Q+q| ≤ eps_reg`.
    pub fn e_superoperator(&self, big_q: [f64; 3], small_q: [f64; 3]) -> Result<f64> {
        let sum = norm([
            big_q[0] + small_q[0],
            big_q[1] + small_q[1],
            big_q[2] + small_q[2],
        ]);
        if sum <= self.eps_reg {
            return Err(Error::SingularRegion(format!(
                "|Q+q| = {sum:e} below {:e}",
                self.eps_reg
            )));
        }
        let cl = self.classical_super_potential(big_q, small_q)?;
        let qm = self.quantum_super_potential(big_q, small_q)?;
        Ok(cl - qm)
    }
}

/// Closed form `4e²(Q²−q²)/|Q+q|³ − V(Q) + V(q)`.
pub fn coulomb_e_superoperator(
    p: &CoulombPotential,
    big_q: [f64; 3],
    small_q: [f64; 3],
) -> Result<f64> {
    let sum = [
        big_q[0] + small_q[0],
        big_q[1] + small_q[1],
        big_q[2] + small_q[2],
    ];
    let s = norm(sum);
    if s <= p.eps_reg {
        return Err(Error::SingularRegion(format!(
            "|Q+q| = {s:e} below {:e}",
            p.eps_reg
        )));
    }
    let sq = |v: [f64; 3]| v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    let head = 4.0 * p.e2 * (sq(big_q) - sq(small_q)) / (s * s * s);
    Ok(head - p.potential(big_q)? + p.potential(small_q)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn singular_points_rejected() {
        let c = CoulombPotential::new(1.0);
        assert!(matches!(
            c.potential([0.0; 3]),
            Err(Error::SingularRegion(_))
        ));
        assert!(c
            .e_superoperator([1.0, 0.0, 0.0], [-1.0, 0.0, 0.0])
            .is_err());
        assert!(c.e_superoperator([0.0; 3], [1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn radial_example() {
        // Q = 2x̂, q = x̂: midpoint 1.5, gradient 1/1.5², V(Q)-V(q) = -1/2 + 1.
        let c = CoulombPotential::new(1.0);
        let e = c.e_superoperator([2.0, 0.0, 0.0], [1.0, 0.0, 0.0]).unwrap();
        assert!((e - (1.0 / 2.25 - 0.5)).abs() < 1e-14);
        let closed = coulomb_e_superoperator(&c, [2.0, 0.0, 0.0], [1.0, 0.0, 0.0]).unwrap();
        assert!((closed + 1.0 / 18.0).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn antisymmetric(a in proptest::array::uniform3(-3.0..3.0f64),
                         b in proptest::array::uniform3(-3.0..3.0f64)) {
            let c = CoulombPotential::new(0.7);
            let s = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
            prop_assume!(norm(a) > 1e-3 && norm(b) > 1e-3 && norm(s) > 1e-3);
            let x = c.e_superoperator(a, b).unwrap();
            let y = c.e_superoperator(b, a).unwrap();
            prop_assert!((x + y).abs() <= 1e-10 * (1.0 + x.abs()));
            let closed = coulomb_e_superoperator(&c, a, b).unwrap();
            prop_assert!((x - closed).abs() <= 1e-12 * (1.0 + closed.abs() + c.potential(a).unwrap().abs() + c.potential(b).unwrap().abs()));
        }
    }
}
