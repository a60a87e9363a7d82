//! Concrete Clebsch systems used by the tests, the acceptance suite and the
//! CLI.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{ClebschHamiltonian, ClebschLagrangian, Symmetry};
use crate::error::Result;
use crate::lie::{DualAlgebraElement, LieAlgebraElement};

/// `V(q, ξ) = ½k|q|² + ¼λ|q|⁴ + ½c|ξ|² + ½s|q|²|ξ|²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelPotential {
    #[serde(default)]
    pub k: f64,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub c: f64,
    #[serde(default)]
    pub s: f64,
}

impl ModelPotential {
    pub fn new(k: f64, lambda: f64, c: f64, s: f64) -> Self {
        Self { k, lambda, c, s }
    }

    pub fn free() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0)
    }

    pub fn harmonic(k: f64) -> Self {
        Self::new(k, 0.0, 0.0, 0.0)
    }

    pub fn anharmonic(k: f64, lambda: f64) -> Self {
        Self::new(k, lambda, 0.0, 0.0)
    }

    pub fn value(&self, q: &DVector<f64>, xi: &LieAlgebraElement) -> f64 {
        let r2 = q.norm_squared();
        let x2 = xi.norm().powi(2);
        0.5 * self.k * r2 + 0.25 * self.lambda * r2 * r2 + 0.5 * self.c * x2 + 0.5 * self.s * r2 * x2
    }

    pub fn dq(&self, q: &DVector<f64>, xi: &LieAlgebraElement) -> DVector<f64> {
        let r2 = q.norm_squared();
        let x2 = xi.norm().powi(2);
        q * (self.k + self.lambda * r2 + self.s * x2)
    }

    pub fn dxi(&self, q: &DVector<f64>, xi: &LieAlgebraElement) -> DualAlgebraElement {
        xi.flat().scale(self.c + self.s * q.norm_squared())
    }

    pub fn depends_on_xi(&self) -> bool {
        self.c != 0.0 || self.s != 0.0
    }
}

/// `L = ½m|v|² − V(q, ξ)`.
#[derive(Debug, Clone)]
pub struct MechanicalLagrangian {
    pub mass: f64,
    pub potential: ModelPotential,
}

impl MechanicalLagrangian {
    pub fn new(mass: f64, potential: ModelPotential) -> Self {
        Self { mass, potential }
    }
}

impl ClebschLagrangian for MechanicalLagrangian {
    fn value(&self, q: &DVector<f64>, v: &DVector<f64>, xi: &LieAlgebraElement) -> f64 {
        0.5 * self.mass * v.norm_squared() - self.potential.value(q, xi)
    }

    fn dv(&self, _q: &DVector<f64>, v: &DVector<f64>, _xi: &LieAlgebraElement) -> DVector<f64> {
        v * self.mass
    }

    fn dq(&self, q: &DVector<f64>, _v: &DVector<f64>, xi: &LieAlgebraElement) -> DVector<f64> {
        -self.potential.dq(q, xi)
    }

    fn dxi(&self, q: &DVector<f64>, _v: &DVector<f64>, xi: &LieAlgebraElement) -> DualAlgebraElement {
        self.potential.dxi(q, xi).scale(-1.0)
    }

    fn dv_jacobian(&self, _q: &DVector<f64>, v: &DVector<f64>, _xi: &LieAlgebraElement) -> Option<DMatrix<f64>> {
        Some(DMatrix::identity(v.len(), v.len()) * self.mass)
    }
}

/// `H = |p|²/(2m) + V(q, ξ)`, the Legendre transform of
/// [`MechanicalLagrangian`] in closed form.
#[derive(Debug, Clone)]
pub struct MechanicalHamiltonian {
    pub mass: f64,
    pub potential: ModelPotential,
}

impl MechanicalHamiltonian {
    pub fn new(mass: f64, potential: ModelPotential) -> Self {
        Self { mass, potential }
    }
}

impl ClebschHamiltonian for MechanicalHamiltonian {
    fn value(&self, q: &DVector<f64>, p: &DVector<f64>, xi: &LieAlgebraElement) -> Result<f64> {
        Ok(0.5 * p.norm_squared() / self.mass + self.potential.value(q, xi))
    }

    fn dq(&self, q: &DVector<f64>, _p: &DVector<f64>, xi: &LieAlgebraElement) -> Result<DVector<f64>> {
        Ok(self.potential.dq(q, xi))
    }

    fn dp(&self, _q: &DVector<f64>, p: &DVector<f64>, _xi: &LieAlgebraElement) -> Result<DVector<f64>> {
        Ok(p / self.mass)
    }

    fn dxi(&self, q: &DVector<f64>, _p: &DVector<f64>, xi: &LieAlgebraElement) -> Result<DualAlgebraElement> {
        Ok(self.potential.dxi(q, xi))
    }

    /// Valid for orthogonal representations, which all the built-in
    /// [`LinearRepresentation`](super::LinearRepresentation)s are.
    fn symmetry(&self) -> Symmetry {
        Symmetry {
            g_invariant: true,
            phase_space_invariant: true,
            xi_independent: !self.potential.depends_on_xi(),
        }
    }
}

/// `L = ½m|v|² + ¼β|v|⁴ − V(q, ξ)`. Its fibre derivative is nonlinear, so the
/// Legendre transform needs Newton iterations.
#[derive(Debug, Clone)]
pub struct QuarticKineticLagrangian {
    pub mass: f64,
    pub beta: f64,
    pub potential: ModelPotential,
}

impl QuarticKineticLagrangian {
    pub fn new(mass: f64, beta: f64, potential: ModelPotential) -> Self {
        Self { mass, beta, potential }
    }
}

impl ClebschLagrangian for QuarticKineticLagrangian {
    fn value(&self, q: &DVector<f64>, v: &DVector<f64>, xi: &LieAlgebraElement) -> f64 {
        let v2 = v.norm_squared();
        0.5 * self.mass * v2 + 0.25 * self.beta * v2 * v2 - self.potential.value(q, xi)
    }

    fn dv(&self, _q: &DVector<f64>, v: &DVector<f64>, _xi: &LieAlgebraElement) -> DVector<f64> {
        v * (self.mass + self.beta * v.norm_squared())
    }

    fn dq(&self, q: &DVector<f64>, _v: &DVector<f64>, xi: &LieAlgebraElement) -> DVector<f64> {
        -self.potential.dq(q, xi)
    }

    fn dxi(&self, q: &DVector<f64>, _v: &DVector<f64>, xi: &LieAlgebraElement) -> DualAlgebraElement {
        self.potential.dxi(q, xi).scale(-1.0)
    }

    fn dv_jacobian(&self, _q: &DVector<f64>, v: &DVector<f64>, _xi: &LieAlgebraElement) -> Option<DMatrix<f64>> {
        let n = v.len();
        Some(DMatrix::identity(n, n) * (self.mass + self.beta * v.norm_squared()) + v * v.transpose() * (2.0 * self.beta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::Group;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fd_grad(f: impl Fn(&DVector<f64>) -> f64, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(x.len(), |i, _| {
            let h = 1e-6;
            let mut xp = x.clone();
            xp[i] += h;
            let mut xm = x.clone();
            xm[i] -= h;
            (f(&xp) - f(&xm)) / (2.0 * h)
        })
    }

    #[test]
    fn potential_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let pot = ModelPotential::new(1.1, 0.4, 0.7, 0.3);
        for _ in 0..10 {
            let q = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0));
            let xi = LieAlgebraElement::random(Group::So3, 1.0, &mut rng);
            let g = fd_grad(|x| pot.value(x, &xi), &q);
            assert!((g - pot.dq(&q, &xi)).norm() < 1e-8);
            let x = DVector::from_column_slice(xi.coords());
            let g = fd_grad(|x| pot.value(&q, &LieAlgebraElement::new(Group::So3, x.as_slice()).unwrap()), &x);
            let d = pot.dxi(&q, &xi);
            for a in 0..3 {
                assert!((g[a] - d.coords()[a]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn quartic_hessian_matches_finite_differences() {
        let l = QuarticKineticLagrangian::new(1.5, 0.8, ModelPotential::free());
        let q = DVector::zeros(3);
        let v = DVector::from_vec(vec![0.3, -0.7, 0.2]);
        let xi = LieAlgebraElement::zero(Group::So3);
        let jac = l.dv_jacobian(&q, &v, &xi).unwrap();
        for i in 0..3 {
            let g = fd_grad(|x| l.dv(&q, x, &xi)[i], &v);
            assert!((g - jac.row(i).transpose()).norm() < 1e-8);
        }
    }

    #[test]
    fn mechanical_hamiltonian_partials() {
        let h = MechanicalHamiltonian::new(2.0, ModelPotential::new(1.0, 0.5, 0.2, 0.1));
        let q = DVector::from_vec(vec![0.4, 0.1, -0.3]);
        let p = DVector::from_vec(vec![0.2, -0.6, 0.9]);
        let xi = LieAlgebraElement::new(Group::So3, &[0.3, 0.2, 0.1]).unwrap();
        let g = fd_grad(|x| h.value(x, &p, &xi).unwrap(), &q);
        assert!((g - h.dq(&q, &p, &xi).unwrap()).norm() < 1e-8);
        let g = fd_grad(|x| h.value(&q, x, &xi).unwrap(), &p);
        assert!((g - h.dp(&q, &p, &xi).unwrap()).norm() < 1e-8);
        assert!(!h.symmetry().xi_independent);
        assert!(MechanicalHamiltonian::new(1.0, ModelPotential::harmonic(1.0)).symmetry().xi_independent);
    }
}
