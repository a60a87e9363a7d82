//! The extended phase space `T*Q × (g × g*)` with its tangent-group
//! symmetry, the extended Hamiltonian `H_ext = H − κ(J, ξ)` and the
//! two-stage constraint set `ν = 0`, `∂H_ext/∂ξ = 0`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use serde::Serialize;

use crate::clebsch::{
    clebsch_hamilton_rhs, momentum_map, split, stack, ClebschHamiltonian, ClebschState, ConfigurationSpace, Symmetry,
    XiSchedule,
};
use crate::error::{Error, Result};
use crate::integrators::{integrate, RecordOptions, StepperSpec};
use crate::lie::{adjoint, bracket, coad, coadjoint, pairing, DualAlgebraElement, GroupElement, LieAlgebraElement, TangentGroupElement};

/// A point `(q, p, ξ, ν)` of the extended phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedState {
    pub q: DVector<f64>,
    pub p: DVector<f64>,
    pub xi: LieAlgebraElement,
    pub nu: DualAlgebraElement,
    pub t: f64,
}

impl ExtendedState {
    pub fn new(q: DVector<f64>, p: DVector<f64>, xi: LieAlgebraElement, nu: DualAlgebraElement, t: f64) -> Self {
        Self { q, p, xi, nu, t }
    }

    /// Lifts a Clebsch state with `ν = 0`.
    pub fn from_clebsch(state: &ClebschState) -> Self {
        Self::new(
            state.q.clone(),
            state.p.clone(),
            state.xi,
            DualAlgebraElement::zero(state.xi.group()),
            state.t,
        )
    }

    pub fn clebsch(&self) -> ClebschState {
        ClebschState::new(self.q.clone(), self.p.clone(), self.xi, self.t)
    }

    pub fn check(&self, space: &dyn ConfigurationSpace) -> Result<()> {
        self.clebsch().check(space)?;
        if self.nu.group() != space.group() {
            return Err(Error::GroupMismatch {
                expected: space.group(),
                found: self.nu.group(),
            });
        }
        Ok(())
    }
}

/// `(ζ, g)·(q, p, ξ, ν) = (g·q, g·p, Ad_g ξ + ζ, CoAd_g ν)`.
pub fn tangent_group_act(
    space: &dyn ConfigurationSpace,
    elem: &TangentGroupElement,
    state: &ExtendedState,
) -> Result<ExtendedState> {
    state.check(space)?;
    if elem.group() != space.group() {
        return Err(Error::GroupMismatch {
            expected: space.group(),
            found: elem.group(),
        });
    }
    let g = &elem.g;
    Ok(ExtendedState::new(
        space.act(g, &state.q)?,
        space.act_covector(g, &state.q, &state.p)?,
        adjoint(g, &state.xi)?.add(&elem.xi)?,
        coadjoint(g, &state.nu)?,
        state.t,
    ))
}

/// An element of the tangent-group algebra `g × g`, written `(σ, ϱ)` with
/// `σ` the translation part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentAlgebraElement {
    pub sigma: LieAlgebraElement,
    pub rho: LieAlgebraElement,
}

/// A covector `(μ₁, μ₂)` on the tangent-group algebra, paired as
/// `κ(μ₁, σ) + κ(μ₂, ϱ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentDualElement {
    pub first: DualAlgebraElement,
    pub second: DualAlgebraElement,
}

impl TangentDualElement {
    pub fn pair(&self, x: &TangentAlgebraElement) -> Result<f64> {
        Ok(pairing(&self.first, &x.sigma)? + pairing(&self.second, &x.rho)?)
    }
}

/// Adjoint action of the tangent group on its algebra:
/// `Ad_(ζ,g)(σ, ϱ) = (Ad_g σ + [ζ, Ad_g ϱ], Ad_g ϱ)`.
pub fn tangent_group_adjoint(elem: &TangentGroupElement, x: &TangentAlgebraElement) -> Result<TangentAlgebraElement> {
    let rho = adjoint(&elem.g, &x.rho)?;
    let sigma = adjoint(&elem.g, &x.sigma)?.add(&bracket(&elem.xi, &rho)?)?;
    Ok(TangentAlgebraElement { sigma, rho })
}

/// `J_ext(q, p, ξ, ν) = (ν, Coad_ξ ν + J(q, p))`.
pub fn extended_momentum_map(space: &dyn ConfigurationSpace, state: &ExtendedState) -> Result<TangentDualElement> {
    state.check(space)?;
    let j = momentum_map(space, &state.q, &state.p)?;
    Ok(TangentDualElement {
        first: state.nu,
        second: coad(&state.xi, &state.nu)?.add(&j)?,
    })
}

/// `H_ext(q, p, ξ) = H(q, p, ξ) − κ(J(q, p), ξ)`.
pub struct ExtendedHamiltonian<'a> {
    space: &'a dyn ConfigurationSpace,
    inner: &'a dyn ClebschHamiltonian,
}

pub fn extended_hamiltonian<'a>(
    inner: &'a dyn ClebschHamiltonian,
    space: &'a dyn ConfigurationSpace,
) -> ExtendedHamiltonian<'a> {
    ExtendedHamiltonian { space, inner }
}

impl ClebschHamiltonian for ExtendedHamiltonian<'_> {
    fn value(&self, q: &DVector<f64>, p: &DVector<f64>, xi: &LieAlgebraElement) -> Result<f64> {
        let j = momentum_map(self.space, q, p)?;
        Ok(self.inner.value(q, p, xi)? - pairing(&j, xi)?)
    }

    fn dq(&self, q: &DVector<f64>, p: &DVector<f64>, xi: &LieAlgebraElement) -> Result<DVector<f64>> {
        Ok(self.inner.dq(q, p, xi)? + self.space.cotangent_algebra_action(xi, q, p))
    }

    fn dp(&self, q: &DVector<f64>, p: &DVector<f64>, xi: &LieAlgebraElement) -> Result<DVector<f64>> {
        Ok(self.inner.dp(q, p, xi)? - self.space.algebra_action(xi, q))
    }

    fn dxi(&self, q: &DVector<f64>, p: &DVector<f64>, xi: &LieAlgebraElement) -> Result<DualAlgebraElement> {
        self.inner.dxi(q, p, xi)?.sub(&momentum_map(self.space, q, p)?)
    }

    fn symmetry(&self) -> Symmetry {
        Symmetry {
            g_invariant: self.inner.symmetry().g_invariant,
            phase_space_invariant: false,
            xi_independent: false,
        }
    }
}

/// `q̇ = ∂H_ext/∂p`, `ṗ = −∂H_ext/∂q`; `ν` is carried unchanged.
pub fn extended_hamilton_rhs(
    space: &dyn ConfigurationSpace,
    hamiltonian: &dyn ClebschHamiltonian,
    state: &ExtendedState,
) -> Result<(DVector<f64>, DVector<f64>)> {
    state.check(space)?;
    let h = extended_hamiltonian(hamiltonian, space);
    let qdot = h.dp(&state.q, &state.p, &state.xi)?;
    let pdot = -h.dq(&state.q, &state.p, &state.xi)?;
    Ok((qdot, pdot))
}

/// Primary constraint `ν` and secondary constraint `∂H/∂ξ − J(q, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracConstraints {
    pub primary: DualAlgebraElement,
    pub secondary: DualAlgebraElement,
}

pub fn dirac_constraints(
    space: &dyn ConfigurationSpace,
    hamiltonian: &dyn ClebschHamiltonian,
    state: &ExtendedState,
) -> Result<DiracConstraints> {
    state.check(space)?;
    let secondary = extended_hamiltonian(hamiltonian, space).dxi(&state.q, &state.p, &state.xi)?;
    Ok(DiracConstraints {
        primary: state.nu,
        secondary,
    })
}

/// Integrates the extended system for a prescribed `ξ(t)` and returns the
/// sampled states.
pub fn integrate_extended(
    space: &dyn ConfigurationSpace,
    hamiltonian: &dyn ClebschHamiltonian,
    initial: &ExtendedState,
    schedule: &XiSchedule,
    horizon: f64,
    spec: &StepperSpec,
    cadence: usize,
) -> Result<Vec<ExtendedState>> {
    initial.check(space)?;
    if schedule.group() != space.group() {
        return Err(Error::GroupMismatch {
            expected: space.group(),
            found: schedule.group(),
        });
    }
    let nu = initial.nu;
    let rhs = |t: f64, y: &DVector<f64>| -> Result<DVector<f64>> {
        let (q, p) = split(y);
        let s = ExtendedState::new(q, p, schedule.at(t), nu, t);
        let (qd, pd) = extended_hamilton_rhs(space, hamiltonian, &s)?;
        Ok(stack(&qd, &pd))
    };
    let record = integrate(
        rhs,
        |_, _| Ok(Vec::new()),
        stack(&initial.q, &initial.p),
        initial.t,
        horizon,
        spec,
        &RecordOptions {
            cadence,
            columns: Vec::new(),
            keep_states: true,
        },
    )?;
    Ok(record
        .times
        .iter()
        .zip(&record.states)
        .map(|(&t, y)| {
            let (q, p) = split(y);
            ExtendedState::new(q, p, schedule.at(t), nu, t)
        })
        .collect())
}

/// A scalar function of `(q, p)`, expected to be `G`-invariant.
#[derive(Clone)]
pub struct Observable {
    pub name: String,
    pub eval: Arc<dyn Fn(&DVector<f64>, &DVector<f64>) -> f64 + Send + Sync>,
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Observable").field("name", &self.name).finish()
    }
}

impl Observable {
    pub fn new(name: impl Into<String>, eval: impl Fn(&DVector<f64>, &DVector<f64>) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
        }
    }

    /// `|q|²`, `|p|²` and `q·p`, invariant under any orthogonal action.
    pub fn euclidean_invariants() -> Vec<Observable> {
        vec![
            Observable::new("q.q", |q, _| q.norm_squared()),
            Observable::new("p.p", |_, p| p.norm_squared()),
            Observable::new("q.p", |q, p| q.dot(p)),
        ]
    }
}

/// A second run started from `(g·q₀, g·p₀)` with its own `ξ(t)`.
#[derive(Debug, Clone)]
pub struct GaugeShift {
    pub g: GroupElement,
    pub schedule: XiSchedule,
}

/// Outcome of [`equivalence_check`].
#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    /// Largest `(q, p)` difference between the Clebsch-Hamilton and the
    /// extended trajectories.
    pub max_phase_discrepancy: f64,
    /// Largest difference of each observable between the two trajectories.
    pub max_observable_discrepancy: f64,
    /// Largest observable difference between the reference run and the
    /// gauge-shifted run, if one was requested.
    pub gauge_observable_discrepancy: Option<f64>,
    pub max_primary: f64,
    pub max_secondary: f64,
    pub samples: usize,
}

/// Tolerance on the initial constraints for [`equivalence_check`].
pub const EQUIVALENCE_CONSTRAINT_TOLERANCE: f64 = 1e-10;

/// Integrates the Clebsch-Hamilton system and the extended system from the
/// same data and compares them, optionally also against a gauge-shifted run.
#[allow(clippy::too_many_arguments)]
pub fn equivalence_check(
    space: &dyn ConfigurationSpace,
    hamiltonian: &dyn ClebschHamiltonian,
    initial: &ExtendedState,
    schedule: &XiSchedule,
    horizon: f64,
    spec: &StepperSpec,
    observables: &[Observable],
    gauge: Option<&GaugeShift>,
) -> Result<EquivalenceReport> {
    initial.check(space)?;
    let sym = hamiltonian.symmetry();
    if !(sym.g_invariant && sym.xi_independent) {
        return Err(Error::Hypothesis(
            "equivalence check needs a ξ-independent, G-invariant Hamiltonian".into(),
        ));
    }
    crate::clebsch::verify_symmetry(space, hamiltonian, &initial.clebsch(), 8, 0x5eed)?;
    let c = dirac_constraints(space, hamiltonian, initial)?;
    for (name, value) in [("nu", c.primary.norm()), ("secondary", c.secondary.norm())] {
        if value > EQUIVALENCE_CONSTRAINT_TOLERANCE {
            return Err(Error::ConstraintViolation {
                name,
                value,
                tolerance: EQUIVALENCE_CONSTRAINT_TOLERANCE,
            });
        }
    }

    let reference = crate::clebsch::integrate_clebsch_hamilton(space, hamiltonian, &initial.clebsch(), schedule, horizon, spec, 1)?;
    let extended = integrate_extended(space, hamiltonian, initial, schedule, horizon, spec, 1)?;

    let mut report = EquivalenceReport {
        max_phase_discrepancy: 0.0,
        max_observable_discrepancy: 0.0,
        gauge_observable_discrepancy: None,
        max_primary: 0.0,
        max_secondary: 0.0,
        samples: reference.len(),
    };
    for (a, b) in reference.iter().zip(&extended) {
        let d = (&a.q - &b.q).amax().max((&a.p - &b.p).amax());
        report.max_phase_discrepancy = report.max_phase_discrepancy.max(d);
        for o in observables {
            let diff = ((o.eval)(&a.q, &a.p) - (o.eval)(&b.q, &b.p)).abs();
            report.max_observable_discrepancy = report.max_observable_discrepancy.max(diff);
        }
        let c = dirac_constraints(space, hamiltonian, b)?;
        report.max_primary = report.max_primary.max(c.primary.norm());
        report.max_secondary = report.max_secondary.max(c.secondary.norm());
    }

    if let Some(shift) = gauge {
        let q = space.act(&shift.g, &initial.q)?;
        let p = space.act_covector(&shift.g, &initial.q, &initial.p)?;
        let start = ClebschState::new(q, p, shift.schedule.at(initial.t), initial.t);
        let shifted = crate::clebsch::integrate_clebsch_hamilton(space, hamiltonian, &start, &shift.schedule, horizon, spec, 1)?;
        let mut worst = 0.0f64;
        for (a, b) in reference.iter().zip(&shifted) {
            for o in observables {
                worst = worst.max(((o.eval)(&a.q, &a.p) - (o.eval)(&b.q, &b.p)).abs());
            }
        }
        report.gauge_observable_discrepancy = Some(worst);
    }
    Ok(report)
}

/// Pointwise difference between [`extended_hamilton_rhs`] and
/// [`clebsch_hamilton_rhs`].
pub fn rhs_discrepancy(space: &dyn ConfigurationSpace, hamiltonian: &dyn ClebschHamiltonian, state: &ExtendedState) -> Result<f64> {
    let (q1, p1) = extended_hamilton_rhs(space, hamiltonian, state)?;
    let (q2, p2) = clebsch_hamilton_rhs(space, hamiltonian, &state.clebsch())?;
    Ok((q1 - q2).amax().max((p1 - p2).amax()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clebsch::systems::{MechanicalHamiltonian, ModelPotential};
    use crate::clebsch::LinearRepresentation;
    use crate::integrators::loglog_slope;
    use crate::lie::{tangent_group_multiply, Group};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(space: &LinearRepresentation, rng: &mut ChaCha8Rng) -> ExtendedState {
        let n = space.dim();
        let g = space.group();
        ExtendedState::new(
            DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)),
            DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)),
            LieAlgebraElement::random(g, 1.0, rng),
            DualAlgebraElement::random(g, 1.0, rng),
            0.0,
        )
    }

    fn max_diff(a: &ExtendedState, b: &ExtendedState) -> f64 {
        (&a.q - &b.q)
            .amax()
            .max((&a.p - &b.p).amax())
            .max(a.xi.sub(&b.xi).unwrap().norm())
            .max(a.nu.sub(&b.nu).unwrap().norm())
    }

    #[test]
    fn identity_and_translation() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let s = LinearRepresentation::so3_vectors(1);
        let st = random_state(&s, &mut rng);
        let id = TangentGroupElement::identity(Group::So3);
        assert_eq!(tangent_group_act(&s, &id, &st).unwrap(), st);
        let zeta = LieAlgebraElement::new(Group::So3, &[0.1, 0.2, 0.3]).unwrap();
        let tr = TangentGroupElement::new(zeta, GroupElement::identity(Group::So3)).unwrap();
        let out = tangent_group_act(&s, &tr, &st).unwrap();
        assert_eq!(out.q, st.q);
        assert_eq!(out.p, st.p);
        assert_eq!(out.nu, st.nu);
        assert!(out.xi.sub(&st.xi.add(&zeta).unwrap()).unwrap().norm() < 1e-16);
    }

    #[test]
    fn action_is_a_group_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for s in [LinearRepresentation::so3_vectors(2), LinearRepresentation::su2_fundamental()] {
            for _ in 0..20 {
                let st = random_state(&s, &mut rng);
                let a = TangentGroupElement::random(s.group(), 1.5, &mut rng);
                let b = TangentGroupElement::random(s.group(), 1.5, &mut rng);
                let lhs = tangent_group_act(&s, &a, &tangent_group_act(&s, &b, &st).unwrap()).unwrap();
                let rhs = tangent_group_act(&s, &tangent_group_multiply(&a, &b).unwrap(), &st).unwrap();
                assert!(max_diff(&lhs, &rhs) < 1e-10);
            }
        }
    }

    #[test]
    fn mismatched_group_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let s = LinearRepresentation::so3_vectors(1);
        let st = random_state(&s, &mut rng);
        let a = TangentGroupElement::identity(Group::Su2);
        assert!(matches!(tangent_group_act(&s, &a, &st), Err(Error::GroupMismatch { .. })));
    }

    #[test]
    fn momentum_map_special_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let s = LinearRepresentation::so3_vectors(1);
        let mut st = random_state(&s, &mut rng);
        st.nu = DualAlgebraElement::zero(Group::So3);
        let j = extended_momentum_map(&s, &st).unwrap();
        assert_eq!(j.first.norm(), 0.0);
        assert_eq!(j.second, momentum_map(&s, &st.q, &st.p).unwrap());

        let s = LinearRepresentation::u1_planes(1, 1.0);
        let st = random_state(&s, &mut rng);
        let j = extended_momentum_map(&s, &st).unwrap();
        assert_eq!(j.first, st.nu);
        assert_eq!(j.second, momentum_map(&s, &st.q, &st.p).unwrap());
    }

    #[test]
    fn momentum_map_is_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        for s in [LinearRepresentation::so3_vectors(1), LinearRepresentation::su2_fundamental()] {
            for _ in 0..20 {
                let st = random_state(&s, &mut rng);
                let a = TangentGroupElement::random(s.group(), 1.5, &mut rng);
                let x = TangentAlgebraElement {
                    sigma: LieAlgebraElement::random(s.group(), 1.0, &mut rng),
                    rho: LieAlgebraElement::random(s.group(), 1.0, &mut rng),
                };
                let moved = extended_momentum_map(&s, &tangent_group_act(&s, &a, &st).unwrap()).unwrap();
                let lhs = moved.pair(&tangent_group_adjoint(&a, &x).unwrap()).unwrap();
                let rhs = extended_momentum_map(&s, &st).unwrap().pair(&x).unwrap();
                assert!((lhs - rhs).abs() < 1e-9, "{lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn extended_hamiltonian_identity_and_partials() {
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        let s = LinearRepresentation::so3_vectors(1);
        let h = MechanicalHamiltonian::new(1.0, ModelPotential::new(0.7, 0.2, 0.4, 0.1));
        let hx = extended_hamiltonian(&h, &s);
        for _ in 0..20 {
            let st = random_state(&s, &mut rng);
            let (q, p, xi) = (&st.q, &st.p, &st.xi);
            let l = q.fixed_rows::<3>(0).cross(&p.fixed_rows::<3>(0));
            let expected = h.value(q, p, xi).unwrap() - l.dot(&xi.to_vector3());
            assert!((hx.value(q, p, xi).unwrap() - expected).abs() < 1e-14);
            let eps = 1e-6;
            for i in 0..3 {
                let mut qp = q.clone();
                qp[i] += eps;
                let mut qm = q.clone();
                qm[i] -= eps;
                let fd = (hx.value(&qp, p, xi).unwrap() - hx.value(&qm, p, xi).unwrap()) / (2.0 * eps);
                assert!((fd - hx.dq(q, p, xi).unwrap()[i]).abs() < 1e-7);
                let mut pp = p.clone();
                pp[i] += eps;
                let mut pm = p.clone();
                pm[i] -= eps;
                let fd = (hx.value(q, &pp, xi).unwrap() - hx.value(q, &pm, xi).unwrap()) / (2.0 * eps);
                assert!((fd - hx.dp(q, p, xi).unwrap()[i]).abs() < 1e-7);
                let e = LieAlgebraElement::basis(Group::So3, i).scale(eps);
                let fd = (hx.value(q, p, &xi.add(&e).unwrap()).unwrap() - hx.value(q, p, &xi.sub(&e).unwrap()).unwrap())
                    / (2.0 * eps);
                assert!((fd - hx.dxi(q, p, xi).unwrap().coords()[i]).abs() < 1e-7);
            }
        }
        let st = random_state(&s, &mut rng);
        let zero = LieAlgebraElement::zero(Group::So3);
        assert_eq!(hx.value(&st.q, &st.p, &zero).unwrap(), h.value(&st.q, &st.p, &zero).unwrap());
    }

    #[test]
    fn extended_rhs_matches_clebsch_rhs() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let h = MechanicalHamiltonian::new(1.3, ModelPotential::new(0.7, 0.2, 0.4, 0.1));
        for s in [
            LinearRepresentation::so3_vectors(2),
            LinearRepresentation::su2_fundamental(),
            LinearRepresentation::u1_planes(2, 1.0),
        ] {
            for _ in 0..20 {
                let st = random_state(&s, &mut rng);
                assert!(rhs_discrepancy(&s, &h, &st).unwrap() < 1e-10);
            }
        }
        let s = LinearRepresentation::so3_vectors(1);
        let free = MechanicalHamiltonian::new(1.0, ModelPotential::free());
        let st = ExtendedState::new(
            DVector::from_vec(vec![1.0, 0.0, 0.0]),
            DVector::from_vec(vec![0.0, 1.0, 0.0]),
            LieAlgebraElement::basis(Group::So3, 2),
            DualAlgebraElement::zero(Group::So3),
            0.0,
        );
        let (qd, pd) = extended_hamilton_rhs(&s, &free, &st).unwrap();
        assert_eq!(qd, DVector::zeros(3));
        assert_eq!(pd, DVector::from_vec(vec![1.0, 0.0, 0.0]));
    }

    #[test]
    fn secondary_is_minus_constraint_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(48);
        let s = LinearRepresentation::so3_vectors(1);
        let h = MechanicalHamiltonian::new(1.0, ModelPotential::new(0.7, 0.2, 0.4, 0.1));
        for _ in 0..10 {
            let st = random_state(&s, &mut rng);
            let c = crate::clebsch::momentum_constraint_residual(&s, &h, &st.clebsch()).unwrap();
            let d = dirac_constraints(&s, &h, &st).unwrap();
            assert_eq!(d.primary, st.nu);
            assert!(d.secondary.add(&c).unwrap().norm() < 1e-14);
        }
        let free = MechanicalHamiltonian::new(1.0, ModelPotential::harmonic(1.0));
        let st = ExtendedState::new(
            DVector::from_vec(vec![1.0, 2.0, 3.0]),
            DVector::zeros(3),
            LieAlgebraElement::basis(Group::So3, 0),
            DualAlgebraElement::zero(Group::So3),
            0.0,
        );
        let d = dirac_constraints(&s, &free, &st).unwrap();
        assert_eq!(d.primary.norm() + d.secondary.norm(), 0.0);
    }

    /// Two vectors in ℝ³ with `q₁×p₁ + q₂×p₂ = 0` but neither pair parallel.
    pub(crate) fn balanced_initial_data() -> ExtendedState {
        let q = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0, 0.7, 0.3]);
        let p = DVector::from_vec(vec![0.0, 0.7, 0.3, 1.0, 0.14, 0.06]);
        let xi = LieAlgebraElement::new(Group::So3, &[0.2, -0.4, 0.6]).unwrap();
        ExtendedState::new(q, p, xi, DualAlgebraElement::zero(Group::So3), 0.0)
    }

    #[test]
    fn balanced_data_is_on_the_constraint_set() {
        let s = LinearRepresentation::so3_vectors(2);
        let st = balanced_initial_data();
        assert!(momentum_map(&s, &st.q, &st.p).unwrap().norm() < 1e-15);
    }

    #[test]
    fn secondary_constraint_drift_is_fourth_order() {
        let s = LinearRepresentation::so3_vectors(2);
        let h = MechanicalHamiltonian::new(1.0, ModelPotential::anharmonic(1.0, 0.5));
        let init = balanced_initial_data();
        let sched = XiSchedule::Constant(init.xi);
        let dts = [1e-2, 5e-3, 2.5e-3];
        let drift: Vec<f64> = dts
            .iter()
            .map(|&dt| {
                let traj = integrate_extended(&s, &h, &init, &sched, 10.0, &StepperSpec::rk4(dt), 1).unwrap();
                traj.iter()
                    .map(|st| dirac_constraints(&s, &h, st).unwrap().secondary.norm())
                    .fold(0.0, f64::max)
            })
            .collect();
        let slope = loglog_slope(&dts, &drift).unwrap();
        assert!((slope - 4.0).abs() < 0.3, "slope {slope} {drift:?}");
    }

    #[test]
    fn equivalence_on_free_system() {
        let s = LinearRepresentation::so3_vectors(2);
        let h = MechanicalHamiltonian::new(1.0, ModelPotential::free());
        let init = balanced_initial_data();
        let sched = XiSchedule::Constant(init.xi);
        let r = equivalence_check(&s, &h, &init, &sched, 2.0, &StepperSpec::rk4(0.01), &Observable::euclidean_invariants(), None)
            .unwrap();
        assert!(r.max_phase_discrepancy < 1e-13, "{r:?}");
        assert!(r.max_observable_discrepancy < 1e-13);
    }

    #[test]
    fn gauge_shift_leaves_invariants_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(49);
        let s = LinearRepresentation::so3_vectors(2);
        let h = MechanicalHamiltonian::new(1.0, ModelPotential::anharmonic(1.0, 0.3));
        let init = balanced_initial_data();
        let sched = XiSchedule::Sinusoidal {
            offset: init.xi,
            amplitude: LieAlgebraElement::new(Group::So3, &[0.3, 0.1, 0.0]).unwrap(),
            omega: 1.5,
        };
        let g = GroupElement::random(Group::So3, 2.0, &mut rng);
        let shift = GaugeShift {
            g,
            schedule: sched.conjugated(&g),
        };
        let obs = Observable::euclidean_invariants();
        let r = equivalence_check(&s, &h, &init, &sched, 2.0, &StepperSpec::rk4(1e-3), &obs, Some(&shift)).unwrap();
        assert!(r.gauge_observable_discrepancy.unwrap() < 1e-8, "{r:?}");

        let other = GaugeShift {
            g: GroupElement::identity(Group::So3),
            schedule: XiSchedule::Constant(LieAlgebraElement::new(Group::So3, &[-0.5, 0.1, 0.2]).unwrap()),
        };
        let r = equivalence_check(&s, &h, &init, &sched, 2.0, &StepperSpec::rk4(1e-3), &obs, Some(&other)).unwrap();
        assert!(r.gauge_observable_discrepancy.unwrap() < 1e-8, "{r:?}");
    }

    #[test]
    fn equivalence_rejects_off_constraint_data() {
        let s = LinearRepresentation::so3_vectors(2);
        let h = MechanicalHamiltonian::new(1.0, ModelPotential::free());
        let mut init = balanced_initial_data();
        init.p[1] += 0.5;
        let sched = XiSchedule::Constant(init.xi);
        let err = equivalence_check(&s, &h, &init, &sched, 1.0, &StepperSpec::rk4(0.1), &[], None).unwrap_err();
        assert!(matches!(err, Error::ConstraintViolation { .. }));

        let h = MechanicalHamiltonian::new(1.0, ModelPotential::new(0.0, 0.0, 1.0, 0.0));
        let init = balanced_initial_data();
        let err = equivalence_check(&s, &h, &init, &sched, 1.0, &StepperSpec::rk4(0.1), &[], None).unwrap_err();
        assert!(matches!(err, Error::Hypothesis(_)));
    }
}
