//! Fixed-step time integration with trajectory recording.
//!
//! States are anything that can be viewed as a flat `[f64]` buffer
//! ([`FlatState`]); the right-hand side returns a state of the same shape
//! holding the time derivative.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A state living in a linear space, addressable as a flat buffer.
pub trait FlatState: Clone {
    fn as_slice(&self) -> &[f64];
    fn as_mut_slice(&mut self) -> &mut [f64];

    /// `self += alpha * x`.
    fn axpy(&mut self, alpha: f64, x: &Self) {
        for (s, v) in self.as_mut_slice().iter_mut().zip(x.as_slice()) {
            *s += alpha * v;
        }
    }
}

impl FlatState for Vec<f64> {
    fn as_slice(&self) -> &[f64] {
        self
    }
    fn as_mut_slice(&mut self) -> &mut [f64] {
        self
    }
}

impl FlatState for DVector<f64> {
    fn as_slice(&self) -> &[f64] {
        nalgebra::Matrix::as_slice(self)
    }
    fn as_mut_slice(&mut self) -> &mut [f64] {
        nalgebra::Matrix::as_mut_slice(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Rk4,
    ImplicitMidpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepperSpec {
    pub scheme: Scheme,
    pub dt: f64,
    #[serde(default = "default_newton_tol")]
    pub newton_tol: f64,
    #[serde(default = "default_max_newton")]
    pub max_newton: usize,
}

fn default_newton_tol() -> f64 {
    1e-12
}

fn default_max_newton() -> usize {
    50
}

impl StepperSpec {
    pub fn rk4(dt: f64) -> Self {
        Self {
            scheme: Scheme::Rk4,
            dt,
            newton_tol: default_newton_tol(),
            max_newton: default_max_newton(),
        }
    }

    pub fn implicit_midpoint(dt: f64) -> Self {
        Self {
            scheme: Scheme::ImplicitMidpoint,
            ..Self::rk4(dt)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidInput(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.newton_tol > 0.0) || self.max_newton == 0 {
            return Err(Error::InvalidInput(
                "newton_tol must be positive and max_newton at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// States this large skip the dense Newton fallback of the implicit midpoint
/// rule and rely on fixed-point iteration alone.
const DENSE_NEWTON_LIMIT: usize = 256;

/// Advances `state` at time `t` by one step of `spec`.
pub fn step<S, F>(rhs: &mut F, t: f64, state: &S, spec: &StepperSpec) -> Result<S>
where
    S: FlatState,
    F: FnMut(f64, &S) -> Result<S>,
{
    let h = spec.dt;
    match spec.scheme {
        Scheme::Rk4 => {
            let k1 = rhs(t, state)?;
            let mut y = state.clone();
            y.axpy(0.5 * h, &k1);
            let k2 = rhs(t + 0.5 * h, &y)?;
            let mut y = state.clone();
            y.axpy(0.5 * h, &k2);
            let k3 = rhs(t + 0.5 * h, &y)?;
            let mut y = state.clone();
            y.axpy(h, &k3);
            let k4 = rhs(t + h, &y)?;
            let mut out = state.clone();
            out.axpy(h / 6.0, &k1);
            out.axpy(h / 3.0, &k2);
            out.axpy(h / 3.0, &k3);
            out.axpy(h / 6.0, &k4);
            Ok(out)
        }
        Scheme::ImplicitMidpoint => implicit_midpoint(rhs, t, state, spec),
    }
}

fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Solves `y1 = y0 + h f(t + h/2, (y0 + y1)/2)` for the midpoint
/// `m = (y0 + y1)/2`, i.e. `m = y0 + (h/2) f(t + h/2, m)`.
fn implicit_midpoint<S, F>(rhs: &mut F, t: f64, y0: &S, spec: &StepperSpec) -> Result<S>
where
    S: FlatState,
    F: FnMut(f64, &S) -> Result<S>,
{
    let h = spec.dt;
    let tm = t + 0.5 * h;
    let scale = 1.0 + max_abs(y0.as_slice());
    let tol = spec.newton_tol * scale;

    // Fixed-point iteration first; it converges for h·Lip(f) < 2.
    let mut m = y0.clone();
    let mut last = f64::INFINITY;
    let mut converged = false;
    for _ in 0..spec.max_newton {
        let f = rhs(tm, &m)?;
        let mut next = y0.clone();
        next.axpy(0.5 * h, &f);
        let diff = next
            .as_slice()
            .iter()
            .zip(m.as_slice())
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        m = next;
        if diff <= tol {
            // One more sweep so the truncation error does not bias the step.
            let f = rhs(tm, &m)?;
            let mut next = y0.clone();
            next.axpy(0.5 * h, &f);
            m = next;
            converged = true;
            break;
        }
        if diff > 0.9 * last {
            break;
        }
        last = diff;
    }

    if !converged {
        let n = y0.as_slice().len();
        if n > DENSE_NEWTON_LIMIT {
            return Err(Error::NonConvergence {
                iterations: spec.max_newton,
                residual: last,
            });
        }
        m = midpoint_newton(rhs, tm, y0, m, spec, tol)?;
    }

    // y1 = 2m - y0
    let mut y1 = m;
    for (a, b) in y1.as_mut_slice().iter_mut().zip(y0.as_slice()) {
        *a = 2.0 * *a - b;
    }
    Ok(y1)
}

/// Newton iteration on `G(m) = m - y0 - (h/2) f(m)` with a finite-difference
/// Jacobian. For linear `f` the Jacobian is exact up to round-off and one
/// step solves the linear system.
fn midpoint_newton<S, F>(rhs: &mut F, tm: f64, y0: &S, mut m: S, spec: &StepperSpec, tol: f64) -> Result<S>
where
    S: FlatState,
    F: FnMut(f64, &S) -> Result<S>,
{
    let h = spec.dt;
    let n = y0.as_slice().len();
    let residual = |rhs: &mut F, m: &S| -> Result<DVector<f64>> {
        let f = rhs(tm, m)?;
        Ok(DVector::from_iterator(
            n,
            (0..n).map(|i| m.as_slice()[i] - y0.as_slice()[i] - 0.5 * h * f.as_slice()[i]),
        ))
    };
    let mut g = residual(rhs, &m)?;
    for _ in 0..spec.max_newton {
        if g.amax() <= tol {
            return Ok(m);
        }
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let eps = 1e-7 * (1.0 + m.as_slice()[j].abs());
            let mut mp = m.clone();
            mp.as_mut_slice()[j] += eps;
            let mut mm = m.clone();
            mm.as_mut_slice()[j] -= eps;
            let gp = residual(rhs, &mp)?;
            let gm = residual(rhs, &mm)?;
            jac.set_column(j, &((gp - gm) / (2.0 * eps)));
        }
        let delta = jac.lu().solve(&g).ok_or(Error::NonConvergence {
            iterations: 0,
            residual: g.amax(),
        })?;
        for (x, d) in m.as_mut_slice().iter_mut().zip(delta.iter()) {
            *x -= d;
        }
        g = residual(rhs, &m)?;
    }
    if g.amax() <= tol {
        Ok(m)
    } else {
        Err(Error::NonConvergence {
            iterations: spec.max_newton,
            residual: g.amax(),
        })
    }
}

/// Recording controls for [`integrate`].
#[derive(Debug, Clone)]
pub struct RecordOptions {
    /// Diagnostics (and states) are recorded every `cadence` steps, plus the
    /// final step.
    pub cadence: usize,
    /// Column names of the diagnostics vector.
    pub columns: Vec<String>,
    /// Keep the states alongside the diagnostics.
    pub keep_states: bool,
}

impl Default for RecordOptions {
    fn default() -> Self {
        Self {
            cadence: 1,
            columns: Vec::new(),
            keep_states: true,
        }
    }
}

/// Sampled trajectory. `times` is strictly increasing; `diagnostics` has
/// one row per entry of `times`, and so does `states` when states are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub columns: Vec<String>,
    pub diagnostics: Vec<Vec<f64>>,
    pub steps: usize,
    pub final_state: S,
}

impl<S> TrajectoryRecord<S> {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.diagnostics.iter().map(|row| row[idx]).collect())
    }
}

/// Number of fixed steps covering `horizon`.
pub fn step_count(horizon: f64, dt: f64) -> Result<usize> {
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidInput(format!("horizon must be non-negative, got {horizon}")));
    }
    let n = (horizon / dt).round();
    if (n * dt - horizon).abs() > 1e-9 * horizon.max(dt) {
        return Err(Error::InvalidInput(format!(
            "horizon {horizon} is not an integer multiple of dt {dt}"
        )));
    }
    Ok(n as usize)
}

/// Integrates from `t0` over `horizon` with fixed steps, evaluating
/// `diagnostics` at the recorded steps.
pub fn integrate<S, F, D>(
    mut rhs: F,
    mut diagnostics: D,
    initial: S,
    t0: f64,
    horizon: f64,
    spec: &StepperSpec,
    options: &RecordOptions,
) -> Result<TrajectoryRecord<S>>
where
    S: FlatState,
    F: FnMut(f64, &S) -> Result<S>,
    D: FnMut(f64, &S) -> Result<Vec<f64>>,
{
    spec.validate()?;
    if options.cadence == 0 {
        return Err(Error::InvalidInput("cadence must be at least 1".into()));
    }
    let steps = step_count(horizon, spec.dt)?;
    let mut record = TrajectoryRecord {
        times: Vec::new(),
        states: Vec::new(),
        columns: options.columns.clone(),
        diagnostics: Vec::new(),
        steps,
        final_state: initial.clone(),
    };
    let mut push = |record: &mut TrajectoryRecord<S>, t: f64, s: &S| -> Result<()> {
        let row = diagnostics(t, s)?;
        if !record.columns.is_empty() && row.len() != record.columns.len() {
            return Err(Error::DimensionMismatch {
                context: "diagnostics row",
                expected: record.columns.len(),
                found: row.len(),
            });
        }
        record.times.push(t);
        record.diagnostics.push(row);
        if options.keep_states {
            record.states.push(s.clone());
        }
        Ok(())
    };

    push(&mut record, t0, &initial)?;
    let mut state = initial;
    for k in 1..=steps {
        let t = t0 + (k - 1) as f64 * spec.dt;
        state = step(&mut rhs, t, &state, spec)?;
        if k % options.cadence == 0 || k == steps {
            push(&mut record, t0 + k as f64 * spec.dt, &state)?;
        }
    }
    record.final_state = state;
    Ok(record)
}

/// Least-squares slope of `log(y)` against `log(x)`. Returns `None` when
/// fewer than two strictly positive pairs are available.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0 && a.is_finite() && b.is_finite())
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 || pts.len() != x.len() {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}
