//! Smooth random initial data and projection onto the Gauss constraint.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::ops::{covariant_divergence, covariant_gradient, gauss_residual, FieldKind};
use super::{LatticeGeometry, LatticeState};
use crate::error::{Error, Result};
use crate::lie::Group;

/// Parameters of the smooth random initial data.
///
/// Every field component is a sum of the 27 lowest Fourier modes
/// `m ∈ {−1, 0, 1}³` with random amplitudes and phases. The Higgs field is
/// `φ = offset·ê + ε·(smooth)` and `π = s(x) φ` for a smooth scalar `s`,
/// so `φ ⋄ π` vanishes pointwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoothData {
    /// Amplitude of `A` and `D`.
    pub amplitude: f64,
    /// Whether to populate `φ` and `π`.
    pub higgs: bool,
    pub higgs_offset: f64,
    pub higgs_amplitude: f64,
    /// Amplitude of `s(x)` in `π = s φ`.
    pub momentum_ratio: f64,
}

impl Default for SmoothData {
    fn default() -> Self {
        Self {
            amplitude: 0.1,
            higgs: true,
            higgs_offset: 0.5,
            higgs_amplitude: 0.1,
            momentum_ratio: 0.1,
        }
    }
}

struct Mode {
    m: [f64; 3],
    amp: f64,
    phase: f64,
}

fn random_modes(rng: &mut ChaCha8Rng) -> Vec<Mode> {
    let mut modes = Vec::with_capacity(27);
    for mx in -1..=1 {
        for my in -1..=1 {
            for mz in -1..=1 {
                modes.push(Mode {
                    m: [mx as f64, my as f64, mz as f64],
                    amp: rng.gen_range(-1.0..1.0) / 27f64.sqrt(),
                    phase: rng.gen_range(0.0..2.0 * PI),
                });
            }
        }
    }
    modes
}

fn smooth_field(geom: &LatticeGeometry, rng: &mut ChaCha8Rng, scale: f64) -> Vec<f64> {
    let modes = random_modes(rng);
    (0..geom.sites())
        .map(|x| {
            let c = geom.coords(x);
            let k = 2.0 * PI / geom.n as f64;
            scale
                * modes
                    .iter()
                    .map(|md| {
                        let arg = k * (md.m[0] * c[0] as f64 + md.m[1] * c[1] as f64 + md.m[2] * c[2] as f64);
                        md.amp * (arg + md.phase).cos()
                    })
                    .sum::<f64>()
        })
        .collect()
}

/// Smooth random fields with `A₀ = 0`. Deterministic in `seed`; the result
/// does not yet satisfy the Gauss constraint (see [`project_gauss`]).
pub fn smooth_random_state(geom: LatticeGeometry, group: Group, data: &SmoothData, seed: u64) -> Result<LatticeState> {
    for (name, v) in [
        ("amplitude", data.amplitude),
        ("higgs_offset", data.higgs_offset),
        ("higgs_amplitude", data.higgs_amplitude),
        ("momentum_ratio", data.momentum_ratio),
    ] {
        if !v.is_finite() {
            return Err(Error::InvalidInput(format!("initial data {name} must be finite")));
        }
    }
    let mut s = LatticeState::zeros(geom, group)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (k, f) = (s.k(), s.f());
    let sites = geom.sites();
    {
        let (a, d, _, _, _) = s.sections_mut();
        for field in [a, d] {
            for dir in 0..3 {
                for comp in 0..k {
                    let v = smooth_field(&geom, &mut rng, data.amplitude);
                    for x in 0..sites {
                        field[(x * 3 + dir) * k + comp] = v[x];
                    }
                }
            }
        }
    }
    if data.higgs {
        let comps: Vec<Vec<f64>> = (0..f).map(|_| smooth_field(&geom, &mut rng, data.higgs_amplitude)).collect();
        let ratio = smooth_field(&geom, &mut rng, data.momentum_ratio);
        for x in 0..sites {
            let mut phi: Vec<f64> = comps.iter().map(|c| c[x]).collect();
            phi[f - 1] += data.higgs_offset;
            let pi: Vec<f64> = phi.iter().map(|p| ratio[x] * p).collect();
            s.set_phi(x, &phi);
            s.set_pi(x, &pi);
        }
    }
    Ok(s)
}

/// Outcome of [`project_gauss`].
#[derive(Debug, Clone)]
pub struct ProjectionReport {
    pub state: LatticeState,
    pub newton_iterations: usize,
    pub cg_iterations: usize,
    pub initial_linf: f64,
    pub final_linf: f64,
}

const MAX_NEWTON: usize = 20;
const MAX_CG: usize = 5000;

fn linf(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Corrects `D ↦ D + d_Ā ψ` so that the Gauss residual vanishes to `tol`
/// in the max norm, keeping `A`, `φ`, `π` and `A₀` unchanged.
///
/// The residual is affine in `D`, so each Newton step solves
/// `(d_Āᵀ d_Ā) ψ = G` exactly up to the conjugate-gradient tolerance; steps
/// are repeated (with halving on an increase) until the tolerance is met.
/// In the abelian case this is the discrete Poisson equation.
pub fn project_gauss(state: &LatticeState, tol: f64) -> Result<ProjectionReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("projection tolerance must be positive, got {tol}")));
    }
    let mut s = state.clone();
    let mut g = gauss_residual(&s);
    let initial_linf = linf(&g);
    let mut cg_total = 0;
    // op(ψ) = −G_D(d_Ā ψ), where G_D is the D-part of the Gauss residual.
    let op = |s: &LatticeState, psi: &[f64]| -> Vec<f64> {
        let grad = covariant_gradient(s, psi, FieldKind::Algebra);
        covariant_divergence(s, &grad).into_iter().map(|v| -v).collect()
    };
    for newton in 0..=MAX_NEWTON {
        let current = linf(&g);
        if current < tol {
            return Ok(ProjectionReport {
                state: s,
                newton_iterations: newton,
                cg_iterations: cg_total,
                initial_linf,
                final_linf: current,
            });
        }
        if newton == MAX_NEWTON {
            break;
        }
        // Conjugate gradients on the positive semidefinite normal operator.
        let mut psi = vec![0.0; g.len()];
        let mut r = g.clone();
        let mut p = r.clone();
        let mut rr = dot(&r, &r);
        let cg_tol = (0.01 * tol).powi(2) * g.len() as f64;
        for _ in 0..MAX_CG {
            if rr < cg_tol {
                break;
            }
            let ap = op(&s, &p);
            let pap = dot(&p, &ap);
            if pap <= 0.0 {
                break;
            }
            let alpha = rr / pap;
            for i in 0..psi.len() {
                psi[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let rr_new = dot(&r, &r);
            for i in 0..p.len() {
                p[i] = r[i] + rr_new / rr * p[i];
            }
            rr = rr_new;
            cg_total += 1;
        }
        let correction = covariant_gradient(&s, &psi, FieldKind::Algebra);
        let mut step = 1.0;
        loop {
            let mut trial = s.clone();
            for (d, c) in trial.sections_mut().1.iter_mut().zip(&correction) {
                *d += step * c;
            }
            let gt = gauss_residual(&trial);
            if linf(&gt) < current || step < 1e-3 {
                s = trial;
                g = gt;
                break;
            }
            step *= 0.5;
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_NEWTON,
        residual: linf(&g),
    })
}
