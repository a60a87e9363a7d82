//! Discrete covariant calculus, the evolution equations and diagnostics.

use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{LatticeGeometry, LatticeState, YmhParams};
use crate::error::{Error, Result};
use crate::integrators::{integrate, RecordOptions, StepperSpec, TrajectoryRecord};
use crate::lie::{group_exp, Group, GroupElement, LieAlgebraElement};

/// Plane ordering of the curvature field `B`: `(0,1)`, `(0,2)`, `(1,2)`.
pub const PLANES: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// `(plane, sign)` with `B_ij = sign · B[plane]`, or `None` for `i = j`.
fn plane_of(i: usize, j: usize) -> Option<(usize, f64)> {
    match (i, j) {
        (0, 1) => Some((0, 1.0)),
        (1, 0) => Some((0, -1.0)),
        (0, 2) => Some((1, 1.0)),
        (2, 0) => Some((1, -1.0)),
        (1, 2) => Some((2, 1.0)),
        (2, 1) => Some((2, -1.0)),
        _ => None,
    }
}

/// How a field transforms: as a Higgs fibre value or as an algebra value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Fiber,
    Algebra,
}

impl FieldKind {
    fn width(self, group: Group) -> usize {
        match self {
            FieldKind::Fiber => super::fiber_dim(group),
            FieldKind::Algebra => super::algebra_dim(group),
        }
    }
}

fn cross_add(x: &[f64], v: &[f64], out: &mut [f64], s: f64) {
    out[0] += s * (x[1] * v[2] - x[2] * v[1]);
    out[1] += s * (x[2] * v[0] - x[0] * v[2]);
    out[2] += s * (x[0] * v[1] - x[1] * v[0]);
}

/// `out += s · (ξ · v)`.
///
/// Both representations are orthogonal, so the same formula acts on the
/// dual fields `D` and `π`.
fn act_add(group: Group, kind: FieldKind, xi: &[f64], v: &[f64], out: &mut [f64], s: f64) {
    match (group, kind) {
        (Group::U1, FieldKind::Algebra) => {}
        (Group::U1, FieldKind::Fiber) => {
            out[0] -= s * xi[0] * v[1];
            out[1] += s * xi[0] * v[0];
        }
        _ => cross_add(xi, v, out, s),
    }
}

/// `φ ⋄ π`, defined by `κ(ξ, φ ⋄ π) = ⟨ξ·φ, π⟩`, evaluated over the basis.
pub fn diamond(group: Group, phi: &[f64], pi: &[f64]) -> Vec<f64> {
    let k = super::algebra_dim(group);
    let f = super::fiber_dim(group);
    (0..k)
        .map(|a| {
            let mut e = vec![0.0; k];
            e[a] = 1.0;
            let mut v = vec![0.0; f];
            act_add(group, FieldKind::Fiber, &e, phi, &mut v, 1.0);
            v.iter().zip(pi).map(|(x, y)| x * y).sum()
        })
        .collect()
}

fn diamond_add(group: Group, phi: &[f64], pi: &[f64], out: &mut [f64], s: f64) {
    match group {
        Group::U1 => out[0] += s * (phi[0] * pi[1] - phi[1] * pi[0]),
        _ => cross_add(phi, pi, out, s),
    }
}

/// Central difference of a `width`-component site field along `dir`,
/// added to `out` with weight `s`.
fn central_add(geom: &LatticeGeometry, field: &[f64], width: usize, site: usize, dir: usize, out: &mut [f64], s: f64) {
    let fwd = geom.neighbor(site, dir, true) * width;
    let bwd = geom.neighbor(site, dir, false) * width;
    let c = s / (2.0 * geom.a);
    for (m, o) in out.iter_mut().enumerate() {
        *o += c * (field[fwd + m] - field[bwd + m]);
    }
}

/// Central difference of a link field component `dir_field` (stored
/// site × direction × width) along `dir`, added to `out`.
fn central_link_add(
    geom: &LatticeGeometry,
    field: &[f64],
    width: usize,
    site: usize,
    dir: usize,
    dir_field: usize,
    out: &mut [f64],
    s: f64,
) {
    let fwd = (geom.neighbor(site, dir, true) * 3 + dir_field) * width;
    let bwd = (geom.neighbor(site, dir, false) * 3 + dir_field) * width;
    let c = s / (2.0 * geom.a);
    for (m, o) in out.iter_mut().enumerate() {
        *o += c * (field[fwd + m] - field[bwd + m]);
    }
}

/// `(D_i f)(x) = (f(x+î) − f(x−î))/(2a) + A_i(x)·f(x)`.
pub fn covariant_difference(state: &LatticeState, field: &[f64], kind: FieldKind, dir: usize) -> Result<Vec<f64>> {
    if dir > 2 {
        return Err(Error::InvalidInput(format!("direction {dir} out of range 0..3")));
    }
    let w = kind.width(state.group);
    let sites = state.geom.sites();
    if field.len() != sites * w {
        return Err(Error::DimensionMismatch {
            context: "covariant difference field",
            expected: sites * w,
            found: field.len(),
        });
    }
    let mut out = vec![0.0; sites * w];
    out.par_chunks_mut(w).enumerate().for_each(|(x, o)| {
        central_add(&state.geom, field, w, x, dir, o, 1.0);
        act_add(state.group, kind, state.a_at(x, dir), &field[x * w..(x + 1) * w], o, 1.0);
    });
    Ok(out)
}

/// Covariant differences in all three directions, stored site × direction
/// × width.
pub(crate) fn covariant_gradient(state: &LatticeState, field: &[f64], kind: FieldKind) -> Vec<f64> {
    let w = kind.width(state.group);
    let mut out = vec![0.0; state.geom.sites() * 3 * w];
    out.par_chunks_mut(3 * w).enumerate().for_each(|(x, o)| {
        for i in 0..3 {
            let oi = &mut o[i * w..(i + 1) * w];
            central_add(&state.geom, field, w, x, i, oi, 1.0);
            act_add(state.group, kind, state.a_at(x, i), &field[x * w..(x + 1) * w], oi, 1.0);
        }
    });
    out
}

/// `B_ij = Δ_i A_j − Δ_j A_i + [A_i, A_j]`, stored site × plane × component
/// in the order of [`PLANES`].
pub fn curvature_b(state: &LatticeState) -> Vec<f64> {
    let k = state.k();
    let a = state.a_field();
    let mut out = vec![0.0; state.geom.sites() * 3 * k];
    out.par_chunks_mut(3 * k).enumerate().for_each(|(x, o)| {
        for (p, &(i, j)) in PLANES.iter().enumerate() {
            let op = &mut o[p * k..(p + 1) * k];
            central_link_add(&state.geom, a, k, x, i, j, op, 1.0);
            central_link_add(&state.geom, a, k, x, j, i, op, -1.0);
            act_add(state.group, FieldKind::Algebra, state.a_at(x, i), state.a_at(x, j), op, 1.0);
        }
    });
    out
}

/// `Σ_i (Δ_i X_i + A_i × X_i)` for a dual-algebra link field `X`.
pub(crate) fn covariant_divergence(state: &LatticeState, x_field: &[f64]) -> Vec<f64> {
    let k = state.k();
    let mut out = vec![0.0; state.geom.sites() * k];
    out.par_chunks_mut(k).enumerate().for_each(|(x, o)| {
        for i in 0..3 {
            central_link_add(&state.geom, x_field, k, x, i, i, o, 1.0);
            let xi = &x_field[(x * 3 + i) * k..(x * 3 + i + 1) * k];
            act_add(state.group, FieldKind::Algebra, state.a_at(x, i), xi, o, 1.0);
        }
    });
    out
}

/// Gauss residual `d_Ā D + φ ⋄ π` per site (site × algebra component).
pub fn gauss_residual(state: &LatticeState) -> Vec<f64> {
    let k = state.k();
    let mut g = covariant_divergence(state, state.d_field());
    g.par_chunks_mut(k).enumerate().for_each(|(x, o)| {
        diamond_add(state.group, state.phi_at(x), state.pi_at(x), o, 1.0);
    });
    g
}

/// Norms of the Gauss residual.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussNorms {
    /// `(a³ Σ_x |G(x)|²)^½`.
    pub l2: f64,
    /// `max_x |G(x)|` over components.
    pub linf: f64,
    /// `a³ Σ_x G(x)`, the integrated momentum map.
    pub total: Vec<f64>,
}

pub fn gauss_norms(state: &LatticeState) -> GaussNorms {
    let g = gauss_residual(state);
    let k = state.k();
    let vol = state.geom.volume();
    let mut total = vec![0.0; k];
    for (i, v) in g.iter().enumerate() {
        total[i % k] += vol * v;
    }
    GaussNorms {
        l2: (vol * g.iter().map(|v| v * v).sum::<f64>()).sqrt(),
        linf: g.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        total,
    }
}

/// `V(φ) = μ (|φ|² − v²)²`.
pub fn potential(params: &YmhParams, phi: &[f64]) -> f64 {
    let r = phi.iter().map(|x| x * x).sum::<f64>() - params.v * params.v;
    params.mu * r * r
}

/// `V′(φ) = 4μ (|φ|² − v²) φ`.
pub fn potential_gradient(params: &YmhParams, phi: &[f64]) -> Vec<f64> {
    let r = phi.iter().map(|x| x * x).sum::<f64>() - params.v * params.v;
    phi.iter().map(|x| 4.0 * params.mu * r * x).collect()
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// `H = a³ Σ_x ½ (|D|² + |B|² + |π|² + |d_Ā φ|² + 2V(φ))`.
pub fn ymh_hamiltonian(state: &LatticeState, params: &YmhParams) -> f64 {
    let (k, f) = (state.k(), state.f());
    let b = curvature_b(state);
    let dphi = covariant_gradient(state, state.phi(), FieldKind::Fiber);
    let density: Vec<f64> = (0..state.geom.sites())
        .into_par_iter()
        .map(|x| {
            let d = &state.d_field()[x * 3 * k..(x + 1) * 3 * k];
            0.5 * (norm2(d)
                + norm2(&b[x * 3 * k..(x + 1) * 3 * k])
                + norm2(state.pi_at(x))
                + norm2(&dphi[x * 3 * f..(x + 1) * 3 * f])
                + 2.0 * potential(params, state.phi_at(x)))
        })
        .collect();
    // Sequential sum keeps the result independent of the thread count.
    state.geom.volume() * density.iter().sum::<f64>()
}

/// Time derivative of the state under the Clebsch-Hamilton equations:
///
/// ```text
/// Ȧ_k = D_k + Δ_k A₀ + [A_k, A₀]
/// Ḋ_k = −A₀·D_k + Σ_i (Δ_i B_ik + A_i·B_ik) − φ ⋄ D_kφ
/// φ̇  = π − A₀·φ
/// π̇  = −A₀·π + Σ_i (Δ_i D_iφ + A_i·D_iφ) − V′(φ)
/// ```
///
/// `A₀` is held fixed. Each output cell reads a fixed stencil of the input,
/// so sites are processed in parallel.
pub fn ymh_rhs(state: &LatticeState, params: &YmhParams) -> LatticeState {
    let (k, f) = (state.k(), state.f());
    let group = state.group;
    let geom = state.geom;
    let b = curvature_b(state);
    let dphi = covariant_gradient(state, state.phi(), FieldKind::Fiber);
    let a0 = state.a0();

    let mut out = LatticeState {
        geom,
        group,
        data: vec![0.0; state.data.len()],
        t: state.t,
    };
    let (oa, od, ophi, opi, _) = out.sections_mut();

    oa.par_chunks_mut(3 * k).enumerate().for_each(|(x, o)| {
        for i in 0..3 {
            let oi = &mut o[i * k..(i + 1) * k];
            oi.copy_from_slice(state.d_at(x, i));
            central_add(&geom, a0, k, x, i, oi, 1.0);
            act_add(group, FieldKind::Algebra, state.a_at(x, i), state.a0_at(x), oi, 1.0);
        }
    });

    od.par_chunks_mut(3 * k).enumerate().for_each(|(x, o)| {
        for kk in 0..3 {
            let ok = &mut o[kk * k..(kk + 1) * k];
            act_add(group, FieldKind::Algebra, state.a0_at(x), state.d_at(x, kk), ok, -1.0);
            for i in 0..3 {
                let Some((p, sign)) = plane_of(i, kk) else { continue };
                let fwd = (geom.neighbor(x, i, true) * 3 + p) * k;
                let bwd = (geom.neighbor(x, i, false) * 3 + p) * k;
                let c = sign / (2.0 * geom.a);
                for m in 0..k {
                    ok[m] += c * (b[fwd + m] - b[bwd + m]);
                }
                let bik: Vec<f64> = b[(x * 3 + p) * k..(x * 3 + p + 1) * k].iter().map(|v| sign * v).collect();
                act_add(group, FieldKind::Algebra, state.a_at(x, i), &bik, ok, 1.0);
            }
            diamond_add(group, state.phi_at(x), &dphi[(x * 3 + kk) * f..(x * 3 + kk + 1) * f], ok, -1.0);
        }
    });

    ophi.par_chunks_mut(f).enumerate().for_each(|(x, o)| {
        o.copy_from_slice(state.pi_at(x));
        act_add(group, FieldKind::Fiber, state.a0_at(x), state.phi_at(x), o, -1.0);
    });

    opi.par_chunks_mut(f).enumerate().for_each(|(x, o)| {
        act_add(group, FieldKind::Fiber, state.a0_at(x), state.pi_at(x), o, -1.0);
        for i in 0..3 {
            central_link_add(&geom, &dphi, f, x, i, i, o, 1.0);
            act_add(group, FieldKind::Fiber, state.a_at(x, i), &dphi[(x * 3 + i) * f..(x * 3 + i + 1) * f], o, 1.0);
        }
        for (m, g) in potential_gradient(params, state.phi_at(x)).iter().enumerate() {
            o[m] -= g;
        }
    });
    out
}

/// `E = d_Ā A₀ − Ȧ` from a state and its time derivative, stored like `A`.
/// Along solutions `D = −E`.
pub fn electric_field(state: &LatticeState, rate: &LatticeState) -> Result<Vec<f64>> {
    state.check_compatible(rate)?;
    let mut e = covariant_gradient(state, state.a0(), FieldKind::Algebra);
    for (v, r) in e.iter_mut().zip(rate.a_field()) {
        *v -= r;
    }
    Ok(e)
}

fn weighted_l2(geom: &LatticeGeometry, v: &[f64]) -> f64 {
    (geom.volume() * norm2(v)).sqrt()
}

/// `d_Ā B` in its single component per site:
/// `Σ_cyclic (Δ_i B_jk + [A_i, B_jk])` over `(i, j, k) = (0, 1, 2)`.
fn bianchi_field(state: &LatticeState, b: &[f64]) -> Vec<f64> {
    let k = state.k();
    let mut out = vec![0.0; state.geom.sites() * k];
    out.par_chunks_mut(k).enumerate().for_each(|(x, o)| {
        for (i, j, l) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            let (p, sign) = plane_of(j, l).expect("distinct directions");
            central_link_add(&state.geom, b, k, x, i, p, o, sign);
            let bjl: Vec<f64> = b[(x * 3 + p) * k..(x * 3 + p + 1) * k].iter().map(|v| sign * v).collect();
            act_add(state.group, FieldKind::Algebra, state.a_at(x, i), &bjl, o, 1.0);
        }
    });
    out
}

/// Weighted `L²` norm of `d_Ā B`.
pub fn bianchi_residual(state: &LatticeState) -> f64 {
    let b = curvature_b(state);
    weighted_l2(&state.geom, &bianchi_field(state, &b))
}

/// Weighted `L²` norm of `d_Ā E + ∂ₜB + [A₀, B]` at the middle of three
/// samples spaced `dt` apart, with `E = −D` and `∂ₜB` by central
/// differences.
pub fn faraday_residual(samples: [&LatticeState; 3], dt: f64) -> Result<f64> {
    let [prev, mid, next] = samples;
    mid.check_compatible(prev)?;
    mid.check_compatible(next)?;
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    let k = mid.k();
    let geom = mid.geom;
    let b_prev = curvature_b(prev);
    let b_mid = curvature_b(mid);
    let b_next = curvature_b(next);
    let e: Vec<f64> = mid.d_field().iter().map(|v| -v).collect();
    let mut r = vec![0.0; geom.sites() * 3 * k];
    r.par_chunks_mut(3 * k).enumerate().for_each(|(x, o)| {
        for (p, &(i, j)) in PLANES.iter().enumerate() {
            let op = &mut o[p * k..(p + 1) * k];
            central_link_add(&geom, &e, k, x, i, j, op, 1.0);
            central_link_add(&geom, &e, k, x, j, i, op, -1.0);
            act_add(mid.group, FieldKind::Algebra, mid.a_at(x, i), &e[(x * 3 + j) * k..(x * 3 + j + 1) * k], op, 1.0);
            act_add(mid.group, FieldKind::Algebra, mid.a_at(x, j), &e[(x * 3 + i) * k..(x * 3 + i + 1) * k], op, -1.0);
            let base = (x * 3 + p) * k;
            for m in 0..k {
                op[m] += (b_next[base + m] - b_prev[base + m]) / (2.0 * dt);
            }
            act_add(mid.group, FieldKind::Algebra, mid.a0_at(x), &b_mid[base..base + k], op, 1.0);
        }
    });
    Ok(weighted_l2(&geom, &r))
}

/// `(Faraday, Bianchi)` residual norms at the middle sample.
pub fn faraday_bianchi_residual(samples: [&LatticeState; 3], dt: f64) -> Result<(f64, f64)> {
    Ok((faraday_residual(samples, dt)?, bianchi_residual(samples[1])))
}

/// A gauge transformation `λ(x)` per site.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeTransformation {
    pub lambda: Vec<GroupElement>,
}

impl GaugeTransformation {
    pub fn new(geom: &LatticeGeometry, group: Group, lambda: Vec<GroupElement>) -> Result<Self> {
        if lambda.len() != geom.sites() {
            return Err(Error::DimensionMismatch {
                context: "gauge transformation",
                expected: geom.sites(),
                found: lambda.len(),
            });
        }
        for (x, l) in lambda.iter().enumerate() {
            if l.group() != group {
                return Err(Error::GroupMismatch {
                    expected: group,
                    found: l.group(),
                });
            }
            if !l.is_valid() {
                return Err(Error::InvalidInput(format!(
                    "gauge transformation at site {x} violates the group constraint by {:.3e}",
                    l.constraint_defect()
                )));
            }
        }
        Ok(Self { lambda })
    }

    pub fn identity(geom: &LatticeGeometry, group: Group) -> Self {
        Self {
            lambda: vec![GroupElement::identity(group); geom.sites()],
        }
    }

    pub fn constant(geom: &LatticeGeometry, g: GroupElement) -> Self {
        Self {
            lambda: vec![g; geom.sites()],
        }
    }

    /// `λ(x) = exp(χ(x))` for an algebra-valued site field `χ`.
    pub fn exp(geom: &LatticeGeometry, group: Group, chi: &[f64]) -> Result<Self> {
        let k = super::algebra_dim(group);
        if chi.len() != geom.sites() * k {
            return Err(Error::DimensionMismatch {
                context: "gauge parameter",
                expected: geom.sites() * k,
                found: chi.len(),
            });
        }
        let lambda = chi
            .chunks(k)
            .map(|c| Ok(group_exp(&LieAlgebraElement::new(group, c)?, 1.0)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { lambda })
    }
}

fn apply_adjoint(g: &GroupElement, v: &[f64], out: &mut [f64]) {
    match g {
        GroupElement::U1(_) => out.copy_from_slice(v),
        _ => {
            let r = g.adjoint_matrix() * Vector3::new(v[0], v[1], v[2]);
            out.copy_from_slice(r.as_slice());
        }
    }
}

fn apply_fiber(g: &GroupElement, v: &[f64], out: &mut [f64]) {
    match g {
        GroupElement::U1(z) => {
            let w = z * Complex64::new(v[0], v[1]);
            out[0] = w.re;
            out[1] = w.im;
        }
        _ => apply_adjoint(g, v, out),
    }
}

/// `A ↦ Ad_λ A − dλ λ⁻¹`, `D ↦ CoAd_λ D`, `φ ↦ λ·φ`, `π ↦ λ·π`,
/// `A₀ ↦ Ad_λ A₀` for a time-independent `λ`.
///
/// `(dλ λ⁻¹)_i(x)` is the central difference of `log(λ(y) λ(x)⁻¹)` over
/// `y = x ± î`; for `U(1)` with `λ = exp(iχ)` this is exactly `Δ_i χ`.
pub fn gauge_transform(state: &LatticeState, lam: &GaugeTransformation) -> Result<LatticeState> {
    let geom = state.geom;
    let group = state.group;
    GaugeTransformation::new(&geom, group, lam.lambda.clone())?;
    let (k, f) = (state.k(), state.f());
    let mut out = state.clone();
    let (oa, od, ophi, opi, oa0) = out.sections_mut();
    let a = state.a_field();
    let d = state.d_field();
    oa.par_chunks_mut(3 * k)
        .zip(od.par_chunks_mut(3 * k))
        .enumerate()
        .for_each(|(x, (oa, od))| {
            let l = &lam.lambda[x];
            let l_inv = l.inverse();
            for i in 0..3 {
                let r = (x * 3 + i) * k;
                apply_adjoint(l, &a[r..r + k], &mut oa[i * k..(i + 1) * k]);
                apply_adjoint(l, &d[r..r + k], &mut od[i * k..(i + 1) * k]);
                let fwd = lam.lambda[geom.neighbor(x, i, true)].multiply(&l_inv).expect("same group").log();
                let bwd = lam.lambda[geom.neighbor(x, i, false)].multiply(&l_inv).expect("same group").log();
                for m in 0..k {
                    oa[i * k + m] -= (fwd.coords()[m] - bwd.coords()[m]) / (2.0 * geom.a);
                }
            }
        });
    ophi.par_chunks_mut(f)
        .enumerate()
        .for_each(|(x, o)| apply_fiber(&lam.lambda[x], state.phi_at(x), o));
    opi.par_chunks_mut(f)
        .enumerate()
        .for_each(|(x, o)| apply_fiber(&lam.lambda[x], state.pi_at(x), o));
    oa0.par_chunks_mut(k)
        .enumerate()
        .for_each(|(x, o)| apply_adjoint(&lam.lambda[x], state.a0_at(x), o));
    Ok(out)
}

/// `⟨(D, π), ξ·(Ā, φ)⟩` with the infinitesimal gauge action
/// `ξ·Ā = −(Δξ + [Ā, ξ])`, `ξ·φ`, integrated with weight `a³`.
pub fn pair_fields(state: &LatticeState, xi: &[f64]) -> Result<f64> {
    let (k, f) = (state.k(), state.f());
    if xi.len() != state.geom.sites() * k {
        return Err(Error::DimensionMismatch {
            context: "gauge generator field",
            expected: state.geom.sites() * k,
            found: xi.len(),
        });
    }
    let mut total = 0.0;
    for x in 0..state.geom.sites() {
        let xs = &xi[x * k..(x + 1) * k];
        for i in 0..3 {
            let mut da = vec![0.0; k];
            central_add(&state.geom, xi, k, x, i, &mut da, -1.0);
            act_add(state.group, FieldKind::Algebra, state.a_at(x, i), xs, &mut da, -1.0);
            total += state.d_at(x, i).iter().zip(&da).map(|(a, b)| a * b).sum::<f64>();
        }
        let mut dphi = vec![0.0; f];
        act_add(state.group, FieldKind::Fiber, xs, state.phi_at(x), &mut dphi, 1.0);
        total += state.pi_at(x).iter().zip(&dphi).map(|(a, b)| a * b).sum::<f64>();
    }
    Ok(total * state.geom.volume())
}

/// Column names written by [`integrate_ymh`].
pub fn ymh_columns(group: Group) -> Vec<String> {
    let mut c = vec!["H".to_string(), "gauss_l2".to_string(), "gauss_linf".to_string()];
    c.extend((1..=group.dim()).map(|a| format!("J_{a}")));
    c
}

/// Integrates the lattice equations. Diagnostics are `H`, the Gauss
/// residual norms and the integrated momentum map.
pub fn integrate_ymh(
    initial: &LatticeState,
    params: &YmhParams,
    horizon: f64,
    spec: &StepperSpec,
    cadence: usize,
    keep_states: bool,
) -> Result<TrajectoryRecord<LatticeState>> {
    integrate(
        |t, s: &LatticeState| {
            let mut r = ymh_rhs(s, params);
            r.t = t;
            Ok(r)
        },
        |t, s: &LatticeState| {
            let _ = t;
            let g = gauss_norms(s);
            let mut row = vec![ymh_hamiltonian(s, params), g.l2, g.linf];
            row.extend(g.total);
            Ok(row)
        },
        initial.clone(),
        initial.t,
        horizon,
        spec,
        &RecordOptions {
            cadence,
            columns: ymh_columns(initial.group),
            keep_states,
        },
    )
    .map(|mut rec| {
        for (s, &t) in rec.states.iter_mut().zip(&rec.times) {
            s.t = t;
        }
        rec.final_state.t = initial.t + horizon;
        rec
    })
}
