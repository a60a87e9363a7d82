//! Diagnostic residuals of the Clebsch equations on sampled trajectories.
//! Time derivatives are second-order central differences at interior
//! samples.

use nalgebra::DVector;

use super::{momentum_constraint_residual, momentum_map, verify_symmetry, ClebschHamiltonian, ClebschLagrangian, ClebschState, ConfigurationSpace};
use crate::error::{Error, Result};
use crate::lie::{coadjoint_star, pairing, LieAlgebraElement};

const SYMMETRY_SAMPLES: usize = 8;
const SYMMETRY_SEED: u64 = 0x5eed;

/// A sample `(q, q̇, ξ)` of a Lagrangian trajectory.
#[derive(Debug, Clone)]
pub struct LagrangianSample {
    pub q: DVector<f64>,
    pub qdot: DVector<f64>,
    pub xi: LieAlgebraElement,
}

/// Residuals of the Clebsch-Euler-Lagrange system at one sample.
#[derive(Debug, Clone)]
pub struct CelResidual {
    /// `D/dt(∂L/∂q̇) − ⟨∂L/∂q̇, ∇ξ_*⟩ − ∂L/∂q`.
    pub evolution: DVector<f64>,
    /// `⟨∂L/∂q̇, ζ_a·q⟩ + κ(∂L/∂ξ, ζ_a)` over the basis `ζ_a`.
    pub constraint: Vec<f64>,
}

impl CelResidual {
    pub fn evolution_norm(&self) -> f64 {
        self.evolution.norm()
    }

    pub fn constraint_norm(&self) -> f64 {
        self.constraint.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

fn fibre_momentum(space: &dyn ConfigurationSpace, l: &dyn ClebschLagrangian, s: &LagrangianSample) -> Result<DVector<f64>> {
    space.check_point("q", &s.q)?;
    space.check_point("qdot", &s.qdot)?;
    if s.xi.group() != space.group() {
        return Err(Error::GroupMismatch {
            expected: space.group(),
            found: s.xi.group(),
        });
    }
    let v = &s.qdot + space.algebra_action(&s.xi, &s.q);
    Ok(l.dv(&s.q, &v, &s.xi))
}

/// CEL residuals at the middle of three consecutive samples spaced `dt`
/// apart.
pub fn cel_residual(
    space: &dyn ConfigurationSpace,
    lagrangian: &dyn ClebschLagrangian,
    samples: &[LagrangianSample; 3],
    dt: f64,
) -> Result<CelResidual> {
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    let p_prev = fibre_momentum(space, lagrangian, &samples[0])?;
    let p = fibre_momentum(space, lagrangian, &samples[1])?;
    let p_next = fibre_momentum(space, lagrangian, &samples[2])?;
    let s = &samples[1];
    let v = &s.qdot + space.algebra_action(&s.xi, &s.q);
    let dpdt = (p_next - p_prev) / (2.0 * dt);
    let evolution = dpdt + space.cotangent_algebra_action(&s.xi, &s.q, &p) - lagrangian.dq(&s.q, &v, &s.xi);
    let dl_dxi = lagrangian.dxi(&s.q, &v, &s.xi);
    let group = space.group();
    let constraint = (0..group.dim())
        .map(|a| {
            let zeta = LieAlgebraElement::basis(group, a);
            Ok(p.dot(&space.algebra_action(&zeta, &s.q)) + pairing(&dl_dxi, &zeta)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CelResidual { evolution, constraint })
}

/// Maximum CEL residual norms `(evolution, constraint)` over the interior
/// samples of a uniformly sampled trajectory.
pub fn cel_residual_max(
    space: &dyn ConfigurationSpace,
    lagrangian: &dyn ClebschLagrangian,
    samples: &[LagrangianSample],
    dt: f64,
) -> Result<(f64, f64)> {
    if samples.len() < 3 {
        return Err(Error::InvalidInput("need at least three samples".into()));
    }
    let mut worst = (0.0f64, 0.0f64);
    for w in samples.windows(3) {
        let r = cel_residual(space, lagrangian, &[w[0].clone(), w[1].clone(), w[2].clone()], dt)?;
        worst.0 = worst.0.max(r.evolution_norm());
        worst.1 = worst.1.max(r.constraint_norm());
    }
    Ok(worst)
}

/// `S[q, ξ] = ∫ L(q, q̇ + ξ·q, ξ) dt` by the trapezoidal rule, with `q̇` from
/// second-order differences (one-sided at the ends).
pub fn action_functional(
    space: &dyn ConfigurationSpace,
    lagrangian: &dyn ClebschLagrangian,
    q: &[DVector<f64>],
    xi: &[LieAlgebraElement],
    dt: f64,
) -> Result<f64> {
    let n = q.len();
    if n < 3 {
        return Err(Error::InvalidInput(format!("action needs at least 3 samples, got {n}")));
    }
    if xi.len() != n {
        return Err(Error::DimensionMismatch {
            context: "xi samples",
            expected: n,
            found: xi.len(),
        });
    }
    for x in q {
        space.check_point("q", x)?;
    }
    let mut total = 0.0;
    for i in 0..n {
        let qdot = if i == 0 {
            (&q[1] * 4.0 - &q[0] * 3.0 - &q[2]) / (2.0 * dt)
        } else if i == n - 1 {
            (&q[n - 1] * 3.0 - &q[n - 2] * 4.0 + &q[n - 3]) / (2.0 * dt)
        } else {
            (&q[i + 1] - &q[i - 1]) / (2.0 * dt)
        };
        let v = qdot + space.algebra_action(&xi[i], &q[i]);
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        total += w * lagrangian.value(&q[i], &v, &xi[i]);
    }
    Ok(total * dt)
}

fn require_samples(trajectory: &[ClebschState]) -> Result<()> {
    if trajectory.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "residual needs at least 3 samples, got {}",
            trajectory.len()
        )));
    }
    Ok(())
}

/// `max ‖ΔJ/Δt − ad*_ξ J‖` over interior samples, i.e. the defect in
/// `dJ/dt = −Coad_ξ J`.
///
/// Requires a Hamiltonian invariant under the lifted action on `T*Q`
/// (or `G`-invariant and independent of `ξ`); the declared flags are checked
/// by sampling.
pub fn euler_poincare_residual(
    space: &dyn ConfigurationSpace,
    hamiltonian: &dyn ClebschHamiltonian,
    trajectory: &[ClebschState],
    dt: f64,
) -> Result<f64> {
    require_samples(trajectory)?;
    let sym = hamiltonian.symmetry();
    if !(sym.phase_space_invariant || (sym.g_invariant && sym.xi_independent)) {
        return Err(Error::Hypothesis("Euler-Poincaré residual needs a G-invariant Hamiltonian".into()));
    }
    verify_symmetry(space, hamiltonian, &trajectory[0], SYMMETRY_SAMPLES, SYMMETRY_SEED)?;
    let js = trajectory
        .iter()
        .map(|s| momentum_map(space, &s.q, &s.p))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for i in 1..trajectory.len() - 1 {
        let djdt = js[i + 1].sub(&js[i - 1])?.scale(1.0 / (2.0 * dt));
        let r = djdt.sub(&coadjoint_star(&trajectory[i].xi, &js[i])?)?;
        worst = worst.max(r.norm());
    }
    Ok(worst)
}

/// `max ‖ΔC/Δt − ad*_ξ C + Δ(∂H/∂ξ)/Δt‖` over interior samples, the defect
/// in `dC/dt = −Coad_ξ C − d/dt ∂H/∂ξ`. Requires `H(g·q, g·p, Ad_g ξ) = H`.
pub fn constraint_drift_residual(
    space: &dyn ConfigurationSpace,
    hamiltonian: &dyn ClebschHamiltonian,
    trajectory: &[ClebschState],
    dt: f64,
) -> Result<f64> {
    require_samples(trajectory)?;
    if !hamiltonian.symmetry().g_invariant {
        return Err(Error::Hypothesis("constraint drift residual needs a G-invariant Hamiltonian".into()));
    }
    verify_symmetry(space, hamiltonian, &trajectory[0], SYMMETRY_SAMPLES, SYMMETRY_SEED)?;
    let cs = trajectory
        .iter()
        .map(|s| momentum_constraint_residual(space, hamiltonian, s))
        .collect::<Result<Vec<_>>>()?;
    let hx = trajectory
        .iter()
        .map(|s| hamiltonian.dxi(&s.q, &s.p, &s.xi))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    let inv = 1.0 / (2.0 * dt);
    for i in 1..trajectory.len() - 1 {
        let dc = cs[i + 1].sub(&cs[i - 1])?.scale(inv);
        let dh = hx[i + 1].sub(&hx[i - 1])?.scale(inv);
        let r = dc.sub(&coadjoint_star(&trajectory[i].xi, &cs[i])?)?.add(&dh)?;
        worst = worst.max(r.norm());
    }
    Ok(worst)
}

/// Largest `‖C‖` along a trajectory.
pub fn max_constraint_norm(
    space: &dyn ConfigurationSpace,
    hamiltonian: &dyn ClebschHamiltonian,
    trajectory: &[ClebschState],
) -> Result<f64> {
    trajectory.iter().try_fold(0.0f64, |m, s| {
        Ok(m.max(momentum_constraint_residual(space, hamiltonian, s)?.norm()))
    })
}

#[cfg(test)]
mod tests {
    use super::super::systems::{MechanicalHamiltonian, MechanicalLagrangian, ModelPotential};
    use super::super::{integrate_clebsch_hamilton, LinearRepresentation, Symmetry, XiSchedule};
    use super::*;
    use crate::integrators::{loglog_slope, StepperSpec};
    use crate::lie::{DualAlgebraElement, Group};

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_vec(x.to_vec())
    }

    fn to_samples(space: &LinearRepresentation, h: &MechanicalHamiltonian, traj: &[ClebschState]) -> Vec<LagrangianSample> {
        traj.iter()
            .map(|s| LagrangianSample {
                q: s.q.clone(),
                qdot: h.dp(&s.q, &s.p, &s.xi).unwrap() - space.algebra_action(&s.xi, &s.q),
                xi: s.xi,
            })
            .collect()
    }

    #[test]
    fn free_particle_straight_line() {
        let s = LinearRepresentation::so3_vectors(1);
        let l = MechanicalLagrangian::new(1.0, ModelPotential::free());
        let dt = 0.1;
        let samples: Vec<_> = (0..5)
            .map(|i| LagrangianSample {
                q: v(&[1.0, 0.0, 0.0]) + v(&[0.0, 0.0, 0.0]) * (i as f64 * dt),
                qdot: DVector::zeros(3),
                xi: LieAlgebraElement::zero(Group::So3),
            })
            .collect();
        let (e, c) = cel_residual_max(&s, &l, &samples, dt).unwrap();
        assert_eq!(e, 0.0);
        assert_eq!(c, 0.0);
    }

    #[test]
    fn cel_residual_converges_and_detects_non_solutions() {
        let s = LinearRepresentation::so3_vectors(1);
        let pot = ModelPotential::anharmonic(1.0, 0.5);
        let h = MechanicalHamiltonian::new(1.0, pot.clone());
        let l = MechanicalLagrangian::new(1.0, pot);
        let q0 = v(&[1.0, 0.2, -0.3]);
        let p0 = v(&[0.1, 0.8, 0.4]);
        let xi = XiSchedule::Constant(LieAlgebraElement::new(Group::So3, &[0.2, -0.1, 0.5]).unwrap());
        let mut errs = Vec::new();
        let dts = [0.02, 0.01, 0.005];
        for dt in dts {
            let st = ClebschState::new(q0.clone(), p0.clone(), xi.at(0.0), 0.0);
            let traj = integrate_clebsch_hamilton(&s, &h, &st, &xi, 1.0, &StepperSpec::rk4(dt), 1).unwrap();
            let samples = to_samples(&s, &h, &traj);
            errs.push(cel_residual_max(&s, &l, &samples, dt).unwrap().0);
            let mut bad = samples.clone();
            for (i, b) in bad.iter_mut().enumerate() {
                b.q[0] += 0.05 * (i as f64 * dt * 7.0).sin();
            }
            assert!(cel_residual_max(&s, &l, &bad, dt).unwrap().0 > 0.1);
        }
        let slope = loglog_slope(&dts, &errs).unwrap();
        assert!((slope - 2.0).abs() < 0.2, "slope {slope}");
    }

    #[test]
    fn action_of_constant_lagrangian() {
        struct One;
        impl ClebschLagrangian for One {
            fn value(&self, _: &DVector<f64>, _: &DVector<f64>, _: &LieAlgebraElement) -> f64 {
                1.0
            }
            fn dv(&self, _: &DVector<f64>, v: &DVector<f64>, _: &LieAlgebraElement) -> DVector<f64> {
                DVector::zeros(v.len())
            }
            fn dq(&self, q: &DVector<f64>, _: &DVector<f64>, _: &LieAlgebraElement) -> DVector<f64> {
                DVector::zeros(q.len())
            }
            fn dxi(&self, _: &DVector<f64>, _: &DVector<f64>, xi: &LieAlgebraElement) -> DualAlgebraElement {
                DualAlgebraElement::zero(xi.group())
            }
        }
        let s = LinearRepresentation::u1_planes(1, 1.0);
        let n = 11;
        let q = vec![v(&[0.0, 1.0]); n];
        let xi = vec![LieAlgebraElement::zero(Group::U1); n];
        assert!((action_functional(&s, &One, &q, &xi, 0.1).unwrap() - 1.0).abs() < 1e-14);

        let l = MechanicalLagrangian::new(1.0, ModelPotential::harmonic(2.0));
        let q = vec![v(&[0.5, 1.0]); n];
        let expected = -0.5 * 2.0 * 1.25 * 1.0;
        assert!((action_functional(&s, &l, &q, &xi, 0.1).unwrap() - expected).abs() < 1e-14);

        assert!(action_functional(&s, &l, &q[..2], &xi[..2], 0.1).is_err());
    }

    #[test]
    fn action_is_stationary_on_solutions() {
        let s = LinearRepresentation::so3_vectors(1);
        let pot = ModelPotential::harmonic(1.0);
        let h = MechanicalHamiltonian::new(1.0, pot.clone());
        let l = MechanicalLagrangian::new(1.0, pot);
        let xi = XiSchedule::Constant(LieAlgebraElement::new(Group::So3, &[0.0, 0.3, 0.4]).unwrap());
        let horizon = 1.0;
        let mut grads = Vec::new();
        let dts = [0.02, 0.01];
        for dt in dts {
            let st = ClebschState::new(v(&[1.0, 0.0, 0.5]), v(&[0.0, 1.0, 0.2]), xi.at(0.0), 0.0);
            let traj = integrate_clebsch_hamilton(&s, &h, &st, &xi, horizon, &StepperSpec::rk4(dt), 1).unwrap();
            let q: Vec<_> = traj.iter().map(|s| s.q.clone()).collect();
            let x: Vec<_> = traj.iter().map(|s| s.xi).collect();
            let n = q.len();
            let mut worst = 0.0f64;
            for k in 0..10 {
                let dir = v(&[(k as f64).cos(), (k as f64 * 1.7).sin(), 1.0 / (1.0 + k as f64)]);
                let bump = |i: usize| ((k + 1) as f64 * std::f64::consts::PI * i as f64 / (n - 1) as f64).sin();
                let eps = 1e-4;
                let shifted = |sgn: f64| -> Vec<DVector<f64>> {
                    q.iter().enumerate().map(|(i, qi)| qi + &dir * (sgn * eps * bump(i))).collect()
                };
                let sp = action_functional(&s, &l, &shifted(1.0), &x, dt).unwrap();
                let sm = action_functional(&s, &l, &shifted(-1.0), &x, dt).unwrap();
                worst = worst.max(((sp - sm) / (2.0 * eps)).abs());
            }
            grads.push(worst);
        }
        assert!(grads[1] < 1e-2, "{grads:?}");
        let ratio = grads[0] / grads[1];
        assert!(ratio > 3.0, "{grads:?}");
    }

    #[test]
    fn abelian_momentum_is_conserved() {
        let s = LinearRepresentation::u1_planes(2, 1.0);
        let h = MechanicalHamiltonian::new(1.0, ModelPotential::anharmonic(1.0, 0.3));
        let xi = XiSchedule::Sinusoidal {
            offset: LieAlgebraElement::new(Group::U1, &[0.4]).unwrap(),
            amplitude: LieAlgebraElement::new(Group::U1, &[0.2]).unwrap(),
            omega: 3.0,
        };
        let st = ClebschState::new(v(&[1.0, 0.0, 0.3, 0.5]), v(&[0.0, 1.0, -0.2, 0.1]), xi.at(0.0), 0.0);
        let dt = 1e-3;
        let traj = integrate_clebsch_hamilton(&s, &h, &st, &xi, 1.0, &StepperSpec::rk4(dt), 1).unwrap();
        assert!(euler_poincare_residual(&s, &h, &traj, dt).unwrap() < 1e-10);
    }

    #[test]
    fn euler_poincare_converges_on_so3() {
        let s = LinearRepresentation::so3_vectors(1);
        let h = MechanicalHamiltonian::new(1.0, ModelPotential::anharmonic(1.0, 0.2));
        let xi = XiSchedule::Sinusoidal {
            offset: LieAlgebraElement::new(Group::So3, &[0.3, -0.2, 0.7]).unwrap(),
            amplitude: LieAlgebraElement::new(Group::So3, &[0.5, 0.4, -0.1]).unwrap(),
            omega: 2.0,
        };
        let dts = [0.02, 0.01, 0.005];
        let errs: Vec<f64> = dts
            .iter()
            .map(|&dt| {
                let st = ClebschState::new(v(&[1.0, 0.2, 0.0]), v(&[0.0, 0.5, 1.0]), xi.at(0.0), 0.0);
                let traj = integrate_clebsch_hamilton(&s, &h, &st, &xi, 1.0, &StepperSpec::rk4(dt), 1).unwrap();
                euler_poincare_residual(&s, &h, &traj, dt).unwrap()
            })
            .collect();
        let slope = loglog_slope(&dts, &errs).unwrap();
        assert!((slope - 2.0).abs() < 0.2, "slope {slope} {errs:?}");
    }

    #[test]
    fn constraint_drift_with_xi_dependence() {
        let s = LinearRepresentation::so3_vectors(1);
        let h = MechanicalHamiltonian::new(1.0, ModelPotential::new(1.0, 0.1, 0.5, 0.3));
        let xi = XiSchedule::Sinusoidal {
            offset: LieAlgebraElement::new(Group::So3, &[0.3, -0.2, 0.7]).unwrap(),
            amplitude: LieAlgebraElement::new(Group::So3, &[0.5, 0.4, -0.1]).unwrap(),
            omega: 2.0,
        };
        let dts = [0.02, 0.01, 0.005];
        let errs: Vec<f64> = dts
            .iter()
            .map(|&dt| {
                let st = ClebschState::new(v(&[1.0, 0.2, 0.0]), v(&[0.0, 0.5, 1.0]), xi.at(0.0), 0.0);
                let traj = integrate_clebsch_hamilton(&s, &h, &st, &xi, 1.0, &StepperSpec::rk4(dt), 1).unwrap();
                constraint_drift_residual(&s, &h, &traj, dt).unwrap()
            })
            .collect();
        let slope = loglog_slope(&dts, &errs).unwrap();
        assert!((slope - 2.0).abs() < 0.2, "slope {slope} {errs:?}");
    }

    #[test]
    fn constraint_is_preserved_from_zero() {
        let s = LinearRepresentation::so3_vectors(1);
        let h = MechanicalHamiltonian::new(1.0, ModelPotential::anharmonic(1.0, 0.5));
        let xi = XiSchedule::Constant(LieAlgebraElement::new(Group::So3, &[0.1, 0.4, -0.3]).unwrap());
        // q ∥ p gives J = 0 and the flow keeps them parallel.
        let st = ClebschState::new(v(&[1.0, 0.5, 0.2]), v(&[0.5, 0.25, 0.1]), xi.at(0.0), 0.0);
        let drift: Vec<f64> = [0.02, 0.01]
            .iter()
            .map(|&dt| {
                let traj = integrate_clebsch_hamilton(&s, &h, &st, &xi, 2.0, &StepperSpec::rk4(dt), 1).unwrap();
                max_constraint_norm(&s, &h, &traj).unwrap()
            })
            .collect();
        assert!(drift[1] < 1e-7, "{drift:?}");
        assert!(drift[0] / drift[1] > 12.0, "{drift:?}");
    }

    #[test]
    fn residuals_require_invariance_flag() {
        struct Tilted;
        impl ClebschHamiltonian for Tilted {
            fn value(&self, q: &DVector<f64>, p: &DVector<f64>, _: &LieAlgebraElement) -> Result<f64> {
                Ok(0.5 * p.norm_squared() + q[0])
            }
            fn dq(&self, q: &DVector<f64>, _: &DVector<f64>, _: &LieAlgebraElement) -> Result<DVector<f64>> {
                let mut g = DVector::zeros(q.len());
                g[0] = 1.0;
                Ok(g)
            }
            fn dp(&self, _: &DVector<f64>, p: &DVector<f64>, _: &LieAlgebraElement) -> Result<DVector<f64>> {
                Ok(p.clone())
            }
            fn dxi(&self, _: &DVector<f64>, _: &DVector<f64>, xi: &LieAlgebraElement) -> Result<DualAlgebraElement> {
                Ok(DualAlgebraElement::zero(xi.group()))
            }
        }
        struct Lying;
        impl ClebschHamiltonian for Lying {
            fn value(&self, q: &DVector<f64>, p: &DVector<f64>, xi: &LieAlgebraElement) -> Result<f64> {
                Tilted.value(q, p, xi)
            }
            fn dq(&self, q: &DVector<f64>, p: &DVector<f64>, xi: &LieAlgebraElement) -> Result<DVector<f64>> {
                Tilted.dq(q, p, xi)
            }
            fn dp(&self, q: &DVector<f64>, p: &DVector<f64>, xi: &LieAlgebraElement) -> Result<DVector<f64>> {
                Tilted.dp(q, p, xi)
            }
            fn dxi(&self, q: &DVector<f64>, p: &DVector<f64>, xi: &LieAlgebraElement) -> Result<DualAlgebraElement> {
                Tilted.dxi(q, p, xi)
            }
            fn symmetry(&self) -> Symmetry {
                Symmetry {
                    g_invariant: true,
                    phase_space_invariant: true,
                    xi_independent: true,
                }
            }
        }
        let s = LinearRepresentation::so3_vectors(1);
        let xi = LieAlgebraElement::zero(Group::So3);
        let traj = vec![ClebschState::new(v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0]), xi, 0.0); 3];
        assert!(matches!(euler_poincare_residual(&s, &Tilted, &traj, 0.1), Err(Error::Hypothesis(_))));
        assert!(matches!(constraint_drift_residual(&s, &Tilted, &traj, 0.1), Err(Error::Hypothesis(_))));
        assert!(matches!(euler_poincare_residual(&s, &Lying, &traj, 0.1), Err(Error::Hypothesis(_))));
    }
}
