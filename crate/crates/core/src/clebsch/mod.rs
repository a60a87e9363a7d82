//! Clebsch-Lagrange / Clebsch-Hamilton mechanics on a vector-space
//! configuration space with a linear group action.
//!
//! A Clebsch-Lagrangian `L(q, v, ξ)` is evaluated at the effective velocity
//! `v = q̇ + ξ·q`. Its Legendre transform `H(q, p, ξ)` generates the
//! evolution
//!
//! ```text
//! q̇ = ∂H/∂p − ξ·q,        ṗ = −∂H/∂q − K̄(ξ·p),
//! ```
//!
//! subject to the momentum-map constraint `J(q, p) = ∂H/∂ξ`. Along
//! trajectories `ξ(t)` is prescribed data ([`XiSchedule`]); the constraint is
//! exposed as a diagnostic rather than solved for.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::integrators::{integrate, RecordOptions, StepperSpec, TrajectoryRecord};
use crate::lie::{DualAlgebraElement, Group, GroupElement, LieAlgebraElement};

pub mod residuals;
pub mod space;
pub mod systems;

pub use residuals::{
    action_functional, cel_residual, cel_residual_max, constraint_drift_residual, euler_poincare_residual, max_constraint_norm,
    CelResidual, LagrangianSample,
};
pub use space::{ConfigurationSpace, LinearRepresentation};

/// A point `(q, p, ξ)` of `T*Q × g` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClebschState {
    pub q: DVector<f64>,
    pub p: DVector<f64>,
    pub xi: LieAlgebraElement,
    pub t: f64,
}

impl ClebschState {
    pub fn new(q: DVector<f64>, p: DVector<f64>, xi: LieAlgebraElement, t: f64) -> Self {
        Self { q, p, xi, t }
    }

    pub fn check(&self, space: &dyn ConfigurationSpace) -> Result<()> {
        space.check_point("q", &self.q)?;
        space.check_point("p", &self.p)?;
        if self.xi.group() != space.group() {
            return Err(Error::GroupMismatch {
                expected: space.group(),
                found: self.xi.group(),
            });
        }
        Ok(())
    }

    /// `(q, p)` stacked into one vector.
    pub fn phase_point(&self) -> DVector<f64> {
        stack(&self.q, &self.p)
    }
}

pub(crate) fn stack(q: &DVector<f64>, p: &DVector<f64>) -> DVector<f64> {
    let n = q.len();
    DVector::from_fn(2 * n, |i, _| if i < n { q[i] } else { p[i - n] })
}

pub(crate) fn split(y: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let n = y.len() / 2;
    (y.rows(0, n).into_owned(), y.rows(n, n).into_owned())
}

/// Symmetry hypotheses a Hamiltonian may declare.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Symmetry {
    /// `H(g·q, g·p, Ad_g ξ) = H(q, p, ξ)`.
    pub g_invariant: bool,
    /// `H(g·q, g·p, ξ) = H(q, p, ξ)`.
    pub phase_space_invariant: bool,
    /// `∂H/∂ξ ≡ 0`.
    pub xi_independent: bool,
}

/// A Clebsch-Hamiltonian `H(q, p, ξ)` with its partial derivatives.
pub trait ClebschHamiltonian: Send + Sync {
    fn value(&self, q: &DVector<f64>, p: &DVector<f64>, xi: &LieAlgebraElement) -> Result<f64>;
    /// `∂H/∂q` (a covector).
    fn dq(&self, q: &DVector<f64>, p: &DVector<f64>, xi: &LieAlgebraElement) -> Result<DVector<f64>>;
    /// `∂H/∂p` (a tangent vector).
    fn dp(&self, q: &DVector<f64>, p: &DVector<f64>, xi: &LieAlgebraElement) -> Result<DVector<f64>>;
    /// `∂H/∂ξ ∈ g*`.
    fn dxi(&self, q: &DVector<f64>, p: &DVector<f64>, xi: &LieAlgebraElement) -> Result<DualAlgebraElement>;

    fn symmetry(&self) -> Symmetry {
        Symmetry::default()
    }
}

/// A Clebsch-Lagrangian `L(q, v, ξ)` with its partial derivatives.
pub trait ClebschLagrangian: Send + Sync {
    fn value(&self, q: &DVector<f64>, v: &DVector<f64>, xi: &LieAlgebraElement) -> f64;
    /// Fibre derivative `∂L/∂q̇`.
    fn dv(&self, q: &DVector<f64>, v: &DVector<f64>, xi: &LieAlgebraElement) -> DVector<f64>;
    fn dq(&self, q: &DVector<f64>, v: &DVector<f64>, xi: &LieAlgebraElement) -> DVector<f64>;
    fn dxi(&self, q: &DVector<f64>, v: &DVector<f64>, xi: &LieAlgebraElement) -> DualAlgebraElement;

    /// Closed-form fibre Hessian `∂²L/∂q̇²`, if available.
    fn dv_jacobian(&self, _q: &DVector<f64>, _v: &DVector<f64>, _xi: &LieAlgebraElement) -> Option<DMatrix<f64>> {
        None
    }
}

/// The momentum map `J(q, p)`, with `κ(J, ξ_a) = ⟨p, ξ_a·q⟩` on the basis.
pub fn momentum_map(space: &dyn ConfigurationSpace, q: &DVector<f64>, p: &DVector<f64>) -> Result<DualAlgebraElement> {
    space.check_point("q", q)?;
    space.check_point("p", p)?;
    let group = space.group();
    let coords: Vec<f64> = (0..group.dim())
        .map(|a| p.dot(&space.algebra_action(&LieAlgebraElement::basis(group, a), q)))
        .collect();
    DualAlgebraElement::new(group, &coords)
}

/// Clebsch-Legendre transform `(q, q̇, ξ) ↦ (q, ∂L/∂q̇(q, q̇ + ξ·q, ξ), ξ)`.
pub fn clebsch_legendre(
    space: &dyn ConfigurationSpace,
    lagrangian: &dyn ClebschLagrangian,
    q: &DVector<f64>,
    qdot: &DVector<f64>,
    xi: &LieAlgebraElement,
    t: f64,
) -> Result<ClebschState> {
    space.check_point("q", q)?;
    space.check_point("qdot", qdot)?;
    let v = qdot + space.algebra_action(xi, q);
    let p = lagrangian.dv(q, &v, xi);
    Ok(ClebschState::new(q.clone(), p, *xi, t))
}

pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 50;

/// Effective velocity solving `∂L/∂q̇(q, v, ξ) = p`, with the number of
/// Newton iterations used.
#[derive(Debug, Clone)]
pub struct VelocitySolve {
    pub v: DVector<f64>,
    pub iterations: usize,
}

fn fibre_hessian(l: &dyn ClebschLagrangian, q: &DVector<f64>, v: &DVector<f64>, xi: &LieAlgebraElement) -> DMatrix<f64> {
    if let Some(j) = l.dv_jacobian(q, v, xi) {
        return j;
    }
    let n = v.len();
    let mut jac = DMatrix::zeros(n, n);
    for j in 0..n {
        let h = 1e-6 * (1.0 + v[j].abs());
        let mut vp = v.clone();
        vp[j] += h;
        let mut vm = v.clone();
        vm[j] -= h;
        jac.set_column(j, &((l.dv(q, &vp, xi) - l.dv(q, &vm, xi)) / (2.0 * h)));
    }
    jac
}

/// Damped Newton iteration from `v₀ = 0` for the inverse fibre derivative.
pub fn solve_effective_velocity(
    lagrangian: &dyn ClebschLagrangian,
    q: &DVector<f64>,
    p: &DVector<f64>,
    xi: &LieAlgebraElement,
) -> Result<VelocitySolve> {
    let n = q.len();
    let tol = NEWTON_TOL * (1.0 + p.amax());
    let mut v = DVector::zeros(n);
    let mut r = lagrangian.dv(q, &v, xi) - p;
    let mut rnorm = r.norm();
    for it in 0..NEWTON_MAX_ITER {
        if rnorm <= tol {
            return Ok(VelocitySolve { v, iterations: it });
        }
        let jac = fibre_hessian(lagrangian, q, &v, xi);
        let Some(delta) = jac.lu().solve(&r) else {
            return Err(Error::NonConvergence {
                iterations: it,
                residual: rnorm,
            });
        };
        if !delta.iter().all(|d| d.is_finite()) {
            return Err(Error::NonConvergence {
                iterations: it,
                residual: rnorm,
            });
        }
        // Backtrack until the residual decreases.
        let mut step = 1.0;
        loop {
            let trial = &v - &delta * step;
            let rt = lagrangian.dv(q, &trial, xi) - p;
            let nt = rt.norm();
            if nt < rnorm || step < 1e-6 {
                v = trial;
                r = rt;
                rnorm = nt;
                break;
            }
            step *= 0.5;
        }
    }
    if rnorm <= tol {
        Ok(VelocitySolve {
            v,
            iterations: NEWTON_MAX_ITER,
        })
    } else {
        Err(Error::NonConvergence {
            iterations: NEWTON_MAX_ITER,
            residual: rnorm,
        })
    }
}

/// Inverse Clebsch-Legendre transform, returning `(q, q̇, ξ)`.
pub fn inverse_clebsch_legendre(
    space: &dyn ConfigurationSpace,
    lagrangian: &dyn ClebschLagrangian,
    state: &ClebschState,
) -> Result<(DVector<f64>, DVector<f64>, LieAlgebraElement)> {
    state.check(space)?;
    let solve = solve_effective_velocity(lagrangian, &state.q, &state.p, &state.xi)?;
    let qdot = solve.v - space.algebra_action(&state.xi, &state.q);
    Ok((state.q.clone(), qdot, state.xi))
}

/// `H(q, p, ξ) = ⟨p, v⟩ − L(q, v, ξ)` with `v` from the inverse fibre
/// derivative. Partials follow from the envelope relations
/// `∂H/∂q = −∂L/∂q`, `∂H/∂p = v`, `∂H/∂ξ = −∂L/∂ξ`.
pub struct LegendreHamiltonian<L> {
    lagrangian: L,
    symmetry: Symmetry,
}

/// Builds the Clebsch-Hamiltonian of a regular Clebsch-Lagrangian.
pub fn hamiltonian_from_lagrangian<L: ClebschLagrangian>(lagrangian: L, symmetry: Symmetry) -> LegendreHamiltonian<L> {
    LegendreHamiltonian { lagrangian, symmetry }
}

impl<L: ClebschLagrangian> LegendreHamiltonian<L> {
    pub fn lagrangian(&self) -> &L {
        &self.lagrangian
    }

    fn velocity(&self, q: &DVector<f64>, p: &DVector<f64>, xi: &LieAlgebraElement) -> Result<DVector<f64>> {
        Ok(solve_effective_velocity(&self.lagrangian, q, p, xi)?.v)
    }
}

impl<L: ClebschLagrangian> ClebschHamiltonian for LegendreHamiltonian<L> {
    fn value(&self, q: &DVector<f64>, p: &DVector<f64>, xi: &LieAlgebraElement) -> Result<f64> {
        let v = self.velocity(q, p, xi)?;
        Ok(p.dot(&v) - self.lagrangian.value(q, &v, xi))
    }

    fn dq(&self, q: &DVector<f64>, p: &DVector<f64>, xi: &LieAlgebraElement) -> Result<DVector<f64>> {
        let v = self.velocity(q, p, xi)?;
        Ok(-self.lagrangian.dq(q, &v, xi))
    }

    fn dp(&self, q: &DVector<f64>, p: &DVector<f64>, xi: &LieAlgebraElement) -> Result<DVector<f64>> {
        self.velocity(q, p, xi)
    }

    fn dxi(&self, q: &DVector<f64>, p: &DVector<f64>, xi: &LieAlgebraElement) -> Result<DualAlgebraElement> {
        let v = self.velocity(q, p, xi)?;
        Ok(self.lagrangian.dxi(q, &v, xi).scale(-1.0))
    }

    fn symmetry(&self) -> Symmetry {
        self.symmetry
    }
}

/// Right-hand side of the Clebsch-Hamilton evolution equations:
/// `q̇ = ∂H/∂p − ξ·q`, `ṗ = −∂H/∂q − K̄(ξ·p)`.
pub fn clebsch_hamilton_rhs(
    space: &dyn ConfigurationSpace,
    hamiltonian: &dyn ClebschHamiltonian,
    state: &ClebschState,
) -> Result<(DVector<f64>, DVector<f64>)> {
    state.check(space)?;
    let (q, p, xi) = (&state.q, &state.p, &state.xi);
    let qdot = hamiltonian.dp(q, p, xi)? - space.algebra_action(xi, q);
    let pdot = -hamiltonian.dq(q, p, xi)? - space.cotangent_algebra_action(xi, q, p);
    Ok((qdot, pdot))
}

/// `C(q, p, ξ) = J(q, p) − ∂H/∂ξ`.
pub fn momentum_constraint_residual(
    space: &dyn ConfigurationSpace,
    hamiltonian: &dyn ClebschHamiltonian,
    state: &ClebschState,
) -> Result<DualAlgebraElement> {
    state.check(space)?;
    let j = momentum_map(space, &state.q, &state.p)?;
    j.sub(&hamiltonian.dxi(&state.q, &state.p, &state.xi)?)
}

/// Prescribed `ξ(t)`.
#[derive(Clone)]
pub enum XiSchedule {
    Constant(LieAlgebraElement),
    /// `offset + amplitude · sin(ω t)` component-wise.
    Sinusoidal {
        offset: LieAlgebraElement,
        amplitude: LieAlgebraElement,
        omega: f64,
    },
    Custom(Group, Arc<dyn Fn(f64) -> LieAlgebraElement + Send + Sync>),
}

impl fmt::Debug for XiSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            XiSchedule::Constant(x) => f.debug_tuple("Constant").field(x).finish(),
            XiSchedule::Sinusoidal { offset, amplitude, omega } => f
                .debug_struct("Sinusoidal")
                .field("offset", offset)
                .field("amplitude", amplitude)
                .field("omega", omega)
                .finish(),
            XiSchedule::Custom(g, _) => f.debug_tuple("Custom").field(g).finish(),
        }
    }
}

impl XiSchedule {
    pub fn group(&self) -> Group {
        match self {
            XiSchedule::Constant(x) => x.group(),
            XiSchedule::Sinusoidal { offset, .. } => offset.group(),
            XiSchedule::Custom(g, _) => *g,
        }
    }

    pub fn at(&self, t: f64) -> LieAlgebraElement {
        match self {
            XiSchedule::Constant(x) => *x,
            XiSchedule::Sinusoidal { offset, amplitude, omega } => {
                offset.add(&amplitude.scale((omega * t).sin())).expect("same group")
            }
            XiSchedule::Custom(_, f) => f(t),
        }
    }

    /// The schedule `t ↦ Ad_g ξ(t)`.
    pub fn conjugated(&self, g: &GroupElement) -> XiSchedule {
        let inner = self.clone();
        let g = *g;
        XiSchedule::Custom(
            self.group(),
            Arc::new(move |t| crate::lie::adjoint(&g, &inner.at(t)).expect("same group")),
        )
    }
}

/// Integrates the Clebsch-Hamilton equations for a prescribed `ξ(t)`.
///
/// States are recorded as [`ClebschState`]s; the diagnostics columns are
/// `H`, `C_norm` and the momentum-map components `J_1..J_k`.
pub fn integrate_clebsch_hamilton(
    space: &dyn ConfigurationSpace,
    hamiltonian: &dyn ClebschHamiltonian,
    initial: &ClebschState,
    schedule: &XiSchedule,
    horizon: f64,
    spec: &StepperSpec,
    cadence: usize,
) -> Result<Vec<ClebschState>> {
    Ok(integrate_clebsch_hamilton_record(space, hamiltonian, initial, schedule, horizon, spec, cadence)?.1)
}

/// Same as [`integrate_clebsch_hamilton`] but also returns the raw record
/// with its diagnostics.
pub fn integrate_clebsch_hamilton_record(
    space: &dyn ConfigurationSpace,
    hamiltonian: &dyn ClebschHamiltonian,
    initial: &ClebschState,
    schedule: &XiSchedule,
    horizon: f64,
    spec: &StepperSpec,
    cadence: usize,
) -> Result<(TrajectoryRecord<DVector<f64>>, Vec<ClebschState>)> {
    initial.check(space)?;
    if schedule.group() != space.group() {
        return Err(Error::GroupMismatch {
            expected: space.group(),
            found: schedule.group(),
        });
    }
    let rhs = |t: f64, y: &DVector<f64>| -> Result<DVector<f64>> {
        let (q, p) = split(y);
        let s = ClebschState::new(q, p, schedule.at(t), t);
        let (qd, pd) = clebsch_hamilton_rhs(space, hamiltonian, &s)?;
        Ok(stack(&qd, &pd))
    };
    let group = space.group();
    let mut columns = vec!["H".to_string(), "C_norm".to_string()];
    columns.extend((1..=group.dim()).map(|a| format!("J_{a}")));
    let diag = |t: f64, y: &DVector<f64>| -> Result<Vec<f64>> {
        let (q, p) = split(y);
        let s = ClebschState::new(q, p, schedule.at(t), t);
        let h = hamiltonian.value(&s.q, &s.p, &s.xi)?;
        let c = momentum_constraint_residual(space, hamiltonian, &s)?;
        let j = momentum_map(space, &s.q, &s.p)?;
        let mut row = vec![h, c.norm()];
        row.extend_from_slice(j.coords());
        Ok(row)
    };
    let record = integrate(
        rhs,
        diag,
        initial.phase_point(),
        initial.t,
        horizon,
        spec,
        &RecordOptions {
            cadence,
            columns,
            keep_states: true,
        },
    )?;
    let states = record
        .times
        .iter()
        .zip(&record.states)
        .map(|(&t, y)| {
            let (q, p) = split(y);
            ClebschState::new(q, p, schedule.at(t), t)
        })
        .collect();
    Ok((record, states))
}

/// Relative tolerance for the sampled symmetry check.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Checks the symmetry flags declared by `hamiltonian` by evaluating it at
/// randomly group-translated arguments around `state`.
pub fn verify_symmetry(
    space: &dyn ConfigurationSpace,
    hamiltonian: &dyn ClebschHamiltonian,
    state: &ClebschState,
    samples: usize,
    seed: u64,
) -> Result<()> {
    state.check(space)?;
    let sym = hamiltonian.symmetry();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let group = space.group();
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1.0);
    for _ in 0..samples {
        let g = GroupElement::random(group, 2.0, &mut rng);
        let (q, p, xi) = (&state.q, &state.p, &state.xi);
        let h = hamiltonian.value(q, p, xi)?;
        let gq = space.act(&g, q)?;
        let gp = space.act_covector(&g, q, p)?;
        if sym.g_invariant {
            let h2 = hamiltonian.value(&gq, &gp, &crate::lie::adjoint(&g, xi)?)?;
            if rel(h, h2) > SYMMETRY_TOLERANCE {
                return Err(Error::Hypothesis(format!(
                    "H(g·q, g·p, Ad_g ξ) differs from H(q, p, ξ) by {:.3e}",
                    rel(h, h2)
                )));
            }
        }
        if sym.phase_space_invariant {
            let h2 = hamiltonian.value(&gq, &gp, xi)?;
            if rel(h, h2) > SYMMETRY_TOLERANCE {
                return Err(Error::Hypothesis(format!(
                    "H(g·q, g·p, ξ) differs from H(q, p, ξ) by {:.3e}",
                    rel(h, h2)
                )));
            }
        }
        if sym.xi_independent {
            let zeta = LieAlgebraElement::random(group, 1.0, &mut rng);
            let d = hamiltonian.dxi(q, p, &zeta)?.norm();
            if d > SYMMETRY_TOLERANCE * (1.0 + h.abs()) {
                return Err(Error::Hypothesis(format!("∂H/∂ξ = {d:.3e} for a ξ-independent H")));
            }
        }
    }
    Ok(())
}
