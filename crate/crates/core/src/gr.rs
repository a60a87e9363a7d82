//! Spatially homogeneous vacuum ADM gravity on a flat 3-torus.
//!
//! With homogeneous data the scalar curvature of every slice vanishes, the
//! shift drops out, and the Clebsch-Hamilton system closes on the pair
//! `(g, π̄)` where `π = π̄ √det g` is the canonical momentum density. The
//! coordinate volume is 1.
//!
//! Matrix gradients follow `dH = tr(G dg)` for symmetric `dg`.

use std::sync::Arc;

use nalgebra::{DVector, Matrix3, SymmetricEigen, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrators::{integrate, RecordOptions, StepperSpec, TrajectoryRecord};

/// Homogeneous ADM data.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmState {
    /// Spatial metric, symmetric positive-definite.
    pub g: Matrix3<f64>,
    /// `π̄`, symmetric, with `π = π̄ vol_g`.
    pub pi_bar: Matrix3<f64>,
    pub lapse: f64,
    pub shift: Vector3<f64>,
    pub t: f64,
}

/// Extrinsic curvature `k` (symmetric).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtrinsicData {
    pub k: Matrix3<f64>,
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &Matrix3<f64>) -> f64 {
    SymmetricEigen::new(*m).eigenvalues.min()
}

impl AdmState {
    pub fn new(g: Matrix3<f64>, pi_bar: Matrix3<f64>, lapse: f64, t: f64) -> Self {
        Self {
            g,
            pi_bar,
            lapse,
            shift: Vector3::zeros(),
            t,
        }
    }

    pub fn check(&self) -> Result<()> {
        let asym = (self.g - self.g.transpose()).amax().max((self.pi_bar - self.pi_bar.transpose()).amax());
        if asym > 1e-12 * (1.0 + self.g.amax() + self.pi_bar.amax()) {
            return Err(Error::InvalidInput("g and π̄ must be symmetric".into()));
        }
        if !(self.lapse > 0.0) {
            return Err(Error::InvalidInput(format!("lapse must be positive, got {}", self.lapse)));
        }
        check_metric(&self.g, self.t)
    }

    pub fn sqrt_det(&self) -> f64 {
        self.g.determinant().sqrt()
    }
}

fn check_metric(g: &Matrix3<f64>, t: f64) -> Result<()> {
    let lmin = min_eigenvalue(g);
    if !(lmin > 0.0) || g.iter().any(|x| !x.is_finite()) {
        return Err(Error::SingularMetric { t, min_eigenvalue: lmin });
    }
    Ok(())
}

fn inverse(g: &Matrix3<f64>) -> Matrix3<f64> {
    g.try_inverse().unwrap_or_else(|| Matrix3::from_element(f64::NAN))
}

/// `k = ġ / (2ℓ)`.
pub fn gr_effective_velocity(state: &AdmState, gdot: &Matrix3<f64>) -> ExtrinsicData {
    ExtrinsicData {
        k: gdot / (2.0 * state.lapse),
    }
}

/// `‖k‖²_g = tr(g⁻¹ k g⁻¹ k)` and `tr_g k = tr(g⁻¹ k)`.
fn k_invariants(g: &Matrix3<f64>, k: &Matrix3<f64>) -> (f64, f64) {
    let m = inverse(g) * k;
    ((m * m).trace(), m.trace())
}

/// `L = ℓ (‖k‖²_g − (tr_g k)²) √det g`.
pub fn gr_lagrangian(state: &AdmState, k: &ExtrinsicData) -> f64 {
    let (sq, tr) = k_invariants(&state.g, &k.k);
    state.lapse * (sq - tr * tr) * state.sqrt_det()
}

/// Fibre derivative: `π̄ = g⁻¹ k g⁻¹ − (tr_g k) g⁻¹`.
pub fn gr_legendre(state: &AdmState, k: &ExtrinsicData) -> Matrix3<f64> {
    let gi = inverse(&state.g);
    let tr = (gi * k.k).trace();
    gi * k.k * gi - gi * tr
}

/// Inverse fibre derivative: `k = g π̄ g − ½ tr(g π̄) g`.
pub fn gr_inverse_legendre(g: &Matrix3<f64>, pi_bar: &Matrix3<f64>) -> ExtrinsicData {
    let tr = (g * pi_bar).trace();
    ExtrinsicData {
        k: g * pi_bar * g - g * (0.5 * tr),
    }
}

/// `J(g, π) = 2 (div_g π)♭`. Covariant derivatives of homogeneous fields
/// vanish on the flat torus, so this is zero.
pub fn gr_momentum_map(_state: &AdmState) -> Vector3<f64> {
    Vector3::zeros()
}

/// Diffeomorphism and Hamiltonian constraint residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrConstraints {
    /// `div_g k − grad_g(tr_g k)`.
    pub diffeo: [f64; 3],
    /// `(tr_g k)² − ‖k‖²_g` (the curvature term vanishes).
    pub hamiltonian: f64,
}

pub fn gr_constraints(state: &AdmState) -> GrConstraints {
    let k = gr_inverse_legendre(&state.g, &state.pi_bar);
    let (sq, tr) = k_invariants(&state.g, &k.k);
    let j = gr_momentum_map(state);
    GrConstraints {
        diffeo: [j[0], j[1], j[2]],
        hamiltonian: tr * tr - sq,
    }
}

/// `Q̄ = tr(g π̄ g π̄) − ½ tr(g π̄)²`.
fn q_bar(g: &Matrix3<f64>, pi_bar: &Matrix3<f64>) -> f64 {
    let m = g * pi_bar;
    (m * m).trace() - 0.5 * m.trace().powi(2)
}

/// `H = ℓ √det g (‖π̄‖²_g − ½ (tr_g π̄)²)`.
pub fn adm_hamiltonian(state: &AdmState) -> f64 {
    state.lapse * state.sqrt_det() * q_bar(&state.g, &state.pi_bar)
}

/// `H` as a function of the canonical pair `(g, π)`:
/// `ℓ (tr(gπgπ) − ½ tr(gπ)²) / √det g`.
pub fn adm_hamiltonian_canonical(g: &Matrix3<f64>, pi: &Matrix3<f64>, lapse: f64) -> f64 {
    lapse * q_bar(g, pi) / g.determinant().sqrt()
}

/// `∂H/∂π = ℓ (2 g π̄ g − tr(g π̄) g)`.
pub fn adm_dh_dpi(g: &Matrix3<f64>, pi_bar: &Matrix3<f64>, lapse: f64) -> Matrix3<f64> {
    let tr = (g * pi_bar).trace();
    (g * pi_bar * g * 2.0 - g * tr) * lapse
}

/// `∂H/∂g = ℓ √det g (2 π̄ g π̄ − tr(g π̄) π̄ − ½ Q̄ g⁻¹)` at fixed `π`.
pub fn adm_dh_dg(g: &Matrix3<f64>, pi_bar: &Matrix3<f64>, lapse: f64) -> Matrix3<f64> {
    let tr = (g * pi_bar).trace();
    let q = q_bar(g, pi_bar);
    (pi_bar * g * pi_bar * 2.0 - pi_bar * tr - inverse(g) * (0.5 * q)) * (lapse * g.determinant().sqrt())
}

/// `(ġ, π̄̇)` from `ġ = ∂H/∂π`, `π̇ = −∂H/∂g` and
/// `π̄̇ = π̇/√det g − ½ π̄ tr(g⁻¹ ġ)`.
pub fn adm_rhs(state: &AdmState) -> Result<(Matrix3<f64>, Matrix3<f64>)> {
    check_metric(&state.g, state.t)?;
    let (g, pb, l) = (&state.g, &state.pi_bar, state.lapse);
    let gdot = adm_dh_dpi(g, pb, l);
    let pidot = -adm_dh_dg(g, pb, l);
    let pbdot = pidot / state.sqrt_det() - pb * (0.5 * (inverse(g) * gdot).trace());
    Ok((symmetrize(&gdot), symmetrize(&pbdot)))
}

fn symmetrize(m: &Matrix3<f64>) -> Matrix3<f64> {
    (m + m.transpose()) * 0.5
}

/// Prescribed lapse `ℓ(t)`.
#[derive(Clone)]
pub enum Lapse {
    Constant(f64),
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for Lapse {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Lapse::Constant(l) => f.debug_tuple("Constant").field(l).finish(),
            Lapse::Function(_) => f.write_str("Function"),
        }
    }
}

impl Lapse {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            Lapse::Constant(l) => *l,
            Lapse::Function(f) => f(t),
        }
    }
}

fn pack(g: &Matrix3<f64>, pi_bar: &Matrix3<f64>) -> DVector<f64> {
    DVector::from_iterator(18, g.iter().chain(pi_bar.iter()).copied())
}

fn unpack(y: &DVector<f64>) -> (Matrix3<f64>, Matrix3<f64>) {
    (
        Matrix3::from_column_slice(&y.as_slice()[..9]),
        Matrix3::from_column_slice(&y.as_slice()[9..]),
    )
}

/// Diagnostics columns recorded by [`integrate_adm`].
pub const ADM_COLUMNS: [&str; 4] = ["H", "ham_constraint", "diffeo_norm", "min_eigenvalue"];

/// Sampled ADM trajectory.
#[derive(Debug, Clone)]
pub struct AdmTrajectory {
    pub states: Vec<AdmState>,
    pub record: TrajectoryRecord<DVector<f64>>,
}

/// Integrates the homogeneous ADM equations with `S = 0`.
pub fn integrate_adm(
    initial: &AdmState,
    lapse: &Lapse,
    horizon: f64,
    spec: &StepperSpec,
    cadence: usize,
) -> Result<AdmTrajectory> {
    initial.check()?;
    let state_at = |t: f64, y: &DVector<f64>| {
        let (g, pb) = unpack(y);
        AdmState::new(g, pb, lapse.at(t), t)
    };
    let rhs = |t: f64, y: &DVector<f64>| -> Result<DVector<f64>> {
        let s = state_at(t, y);
        if !(s.lapse > 0.0) {
            return Err(Error::InvalidInput(format!("lapse must be positive, got {} at t = {t}", s.lapse)));
        }
        let (gd, pd) = adm_rhs(&s)?;
        Ok(pack(&gd, &pd))
    };
    let diag = |t: f64, y: &DVector<f64>| -> Result<Vec<f64>> {
        let s = state_at(t, y);
        check_metric(&s.g, t)?;
        let c = gr_constraints(&s);
        let d = Vector3::from(c.diffeo).norm();
        Ok(vec![adm_hamiltonian(&s), c.hamiltonian, d, min_eigenvalue(&s.g)])
    };
    let record = integrate(
        rhs,
        diag,
        pack(&initial.g, &initial.pi_bar),
        initial.t,
        horizon,
        spec,
        &RecordOptions {
            cadence,
            columns: ADM_COLUMNS.iter().map(|s| s.to_string()).collect(),
            keep_states: true,
        },
    )?;
    let states = record.times.iter().zip(&record.states).map(|(&t, y)| state_at(t, y)).collect();
    Ok(AdmTrajectory { states, record })
}

/// `g = diag(t^{2p₁}, t^{2p₂}, t^{2p₃})`.
pub fn kasner_metric(p: [f64; 3], t: f64) -> Matrix3<f64> {
    Matrix3::from_diagonal(&Vector3::new(t.powf(2.0 * p[0]), t.powf(2.0 * p[1]), t.powf(2.0 * p[2])))
}

/// Kasner data at time `t` with unit lapse: `k = ġ/2 = diag(pᵢ t^{2pᵢ−1})`.
pub fn kasner_state(p: [f64; 3], t: f64) -> AdmState {
    let g = kasner_metric(p, t);
    let k = Matrix3::from_diagonal(&Vector3::new(
        p[0] * t.powf(2.0 * p[0] - 1.0),
        p[1] * t.powf(2.0 * p[1] - 1.0),
        p[2] * t.powf(2.0 * p[2] - 1.0),
    ));
    let mut s = AdmState::new(g, Matrix3::zeros(), 1.0, t);
    s.pi_bar = gr_legendre(&s, &ExtrinsicData { k });
    s
}

/// Exponents with `Σp = Σp² = 1`, parametrised by `u ≥ 1`.
pub fn kasner_exponents(u: f64) -> [f64; 3] {
    let d = 1.0 + u + u * u;
    [-u / d, (1.0 + u) / d, u * (1.0 + u) / d]
}

/// Least-squares slopes of `½ ln g_ii` against `ln t`.
pub fn fit_kasner_exponents(states: &[AdmState]) -> Result<[f64; 3]> {
    if states.len() < 2 {
        return Err(Error::InvalidInput("exponent fit needs at least two samples".into()));
    }
    let mut out = [0.0; 3];
    let x: Vec<f64> = states.iter().map(|s| s.t.ln()).collect();
    let n = x.len() as f64;
    let xm = x.iter().sum::<f64>() / n;
    for (i, o) in out.iter_mut().enumerate() {
        let y: Vec<f64> = states.iter().map(|s| 0.5 * s.g[(i, i)].ln()).collect();
        let ym = y.iter().sum::<f64>() / n;
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - xm) * (b - ym)).sum();
        let sxx: f64 = x.iter().map(|a| (a - xm).powi(2)).sum();
        *o = sxy / sxx;
    }
    Ok(out)
}

/// Test hook for the inhomogeneous momentum map: a momentum density
/// `π^{jk}(x)` on a periodic `n³` grid with constant metric `g`.
#[derive(Debug, Clone)]
pub struct MomentumGrid {
    pub n: usize,
    pub spacing: f64,
    pub g: Matrix3<f64>,
    /// Site-major, `x` fastest.
    pub pi: Vec<Matrix3<f64>>,
}

impl MomentumGrid {
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.n * (y + self.n * z)
    }

    fn shifted(&self, site: usize, dir: usize, step: isize) -> usize {
        let n = self.n as isize;
        let mut c = [
            (site % self.n) as isize,
            ((site / self.n) % self.n) as isize,
            (site / (self.n * self.n)) as isize,
        ];
        c[dir] = (c[dir] + step).rem_euclid(n);
        self.index(c[0] as usize, c[1] as usize, c[2] as usize)
    }
}

/// `J_i = 2 g_ij ∂_k π^{jk}` with central differences. For a constant metric
/// the covariant divergence reduces to the coordinate one.
pub fn gr_momentum_map_grid(grid: &MomentumGrid) -> Result<Vec<Vector3<f64>>> {
    if grid.pi.len() != grid.n.pow(3) {
        return Err(Error::DimensionMismatch {
            context: "momentum grid",
            expected: grid.n.pow(3),
            found: grid.pi.len(),
        });
    }
    let h = 2.0 * grid.spacing;
    Ok((0..grid.pi.len())
        .map(|s| {
            let mut div = Vector3::zeros();
            for k in 0..3 {
                let d = (grid.pi[grid.shifted(s, k, 1)] - grid.pi[grid.shifted(s, k, -1)]) / h;
                div += d.column(k);
            }
            grid.g * div * 2.0
        })
        .collect())
}
