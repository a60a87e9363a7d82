//! Yang-Mills-Higgs on a periodic `N³` lattice in the (1+3) Hamiltonian
//! form, with flat static metric and unit lapse.
//!
//! Fields are Lie-algebra valued per site (non-compact discretisation) and
//! all spatial derivatives are central differences
//! `Δ_i f(x) = (f(x+î) − f(x−î)) / 2a`. Two models are supported:
//!
//! * `U(1)` with a charge-1 complex Higgs field, stored as `(Re φ, Im φ)`;
//! * `SU(2)` with an adjoint (real triplet) Higgs field.
//!
//! The ξ-variable is the temporal component `A₀`; it is carried in the state
//! and held fixed during evolution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrators::FlatState;
use crate::lie::Group;

pub mod checkpoint;
pub mod init;
mod ops;

pub use init::{project_gauss, smooth_random_state, ProjectionReport, SmoothData};
pub use ops::{
    bianchi_residual, covariant_difference, curvature_b, diamond, electric_field, faraday_bianchi_residual,
    faraday_residual, gauge_transform, gauss_norms, gauss_residual, integrate_ymh, pair_fields, potential,
    potential_gradient, ymh_hamiltonian, ymh_rhs, FieldKind, GaugeTransformation, GaussNorms, PLANES,
};

/// Periodic cubic lattice with `n` sites per axis and spacing `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeGeometry {
    pub n: usize,
    pub a: f64,
}

impl LatticeGeometry {
    pub fn new(n: usize, a: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("lattice needs n >= 2, got {n}")));
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidInput(format!("lattice spacing must be positive, got {a}")));
        }
        Ok(Self { n, a })
    }

    pub fn sites(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Site index with `x` fastest.
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.n * (y + self.n * z)
    }

    pub fn coords(&self, site: usize) -> [usize; 3] {
        [site % self.n, (site / self.n) % self.n, site / (self.n * self.n)]
    }

    /// The site one step forward (`forward = true`) or backward along `dir`.
    pub fn neighbor(&self, site: usize, dir: usize, forward: bool) -> usize {
        let mut c = self.coords(site);
        c[dir] = if forward { (c[dir] + 1) % self.n } else { (c[dir] + self.n - 1) % self.n };
        self.index(c[0], c[1], c[2])
    }

    /// Cell volume `a³`.
    pub fn volume(&self) -> f64 {
        self.a.powi(3)
    }
}

/// Quartic Higgs potential `V(φ) = μ (|φ|² − v²)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YmhParams {
    pub mu: f64,
    pub v: f64,
}

impl Default for YmhParams {
    fn default() -> Self {
        Self { mu: 0.0, v: 0.0 }
    }
}

/// Dimension of the Lie algebra.
pub fn algebra_dim(group: Group) -> usize {
    group.dim()
}

/// Real dimension of the Higgs fibre.
pub fn fiber_dim(group: Group) -> usize {
    match group {
        Group::U1 => 2,
        _ => 3,
    }
}

/// Name of the Higgs representation used for `group`.
pub fn representation_name(group: Group) -> &'static str {
    match group {
        Group::U1 => "charge1",
        _ => "adjoint",
    }
}

fn check_group(group: Group) -> Result<()> {
    match group {
        Group::U1 | Group::Su2 => Ok(()),
        Group::So3 => Err(Error::InvalidInput(
            "the lattice backend supports u1 and su2 only".into(),
        )),
    }
}

/// Lattice fields `(A, D, φ, π, A₀)` at time `t`.
///
/// The buffer holds, in order, `A` and `D` (site-major, direction, then
/// algebra component), `φ` and `π` (site-major, fibre component) and `A₀`
/// (site-major, algebra component).
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    pub geom: LatticeGeometry,
    pub group: Group,
    pub data: Vec<f64>,
    pub t: f64,
}

impl LatticeState {
    pub fn zeros(geom: LatticeGeometry, group: Group) -> Result<Self> {
        check_group(group)?;
        let len = Self::buffer_len(geom, group);
        Ok(Self {
            geom,
            group,
            data: vec![0.0; len],
            t: 0.0,
        })
    }

    fn buffer_len(geom: LatticeGeometry, group: Group) -> usize {
        let (k, f) = (algebra_dim(group), fiber_dim(group));
        geom.sites() * (6 * k + 2 * f + k)
    }

    pub fn from_data(geom: LatticeGeometry, group: Group, data: Vec<f64>, t: f64) -> Result<Self> {
        check_group(group)?;
        let expected = Self::buffer_len(geom, group);
        if data.len() != expected {
            return Err(Error::DimensionMismatch {
                context: "lattice buffer",
                expected,
                found: data.len(),
            });
        }
        Ok(Self { geom, group, data, t })
    }

    pub fn k(&self) -> usize {
        algebra_dim(self.group)
    }

    pub fn f(&self) -> usize {
        fiber_dim(self.group)
    }

    fn link_len(&self) -> usize {
        self.geom.sites() * 3 * self.k()
    }

    fn site_len(&self) -> usize {
        self.geom.sites() * self.f()
    }

    /// Splits the buffer into `(A, D, φ, π, A₀)`.
    pub fn sections(&self) -> (&[f64], &[f64], &[f64], &[f64], &[f64]) {
        let (l, s) = (self.link_len(), self.site_len());
        let (a, rest) = self.data.split_at(l);
        let (d, rest) = rest.split_at(l);
        let (phi, rest) = rest.split_at(s);
        let (pi, a0) = rest.split_at(s);
        (a, d, phi, pi, a0)
    }

    #[allow(clippy::type_complexity)]
    pub fn sections_mut(&mut self) -> (&mut [f64], &mut [f64], &mut [f64], &mut [f64], &mut [f64]) {
        let (l, s) = (self.link_len(), self.site_len());
        let (a, rest) = self.data.split_at_mut(l);
        let (d, rest) = rest.split_at_mut(l);
        let (phi, rest) = rest.split_at_mut(s);
        let (pi, a0) = rest.split_at_mut(s);
        (a, d, phi, pi, a0)
    }

    pub fn a_field(&self) -> &[f64] {
        self.sections().0
    }

    pub fn d_field(&self) -> &[f64] {
        self.sections().1
    }

    pub fn phi(&self) -> &[f64] {
        self.sections().2
    }

    pub fn pi(&self) -> &[f64] {
        self.sections().3
    }

    pub fn a0(&self) -> &[f64] {
        self.sections().4
    }

    /// `A_dir(site)`.
    pub fn a_at(&self, site: usize, dir: usize) -> &[f64] {
        let k = self.k();
        &self.a_field()[(site * 3 + dir) * k..(site * 3 + dir + 1) * k]
    }

    pub fn d_at(&self, site: usize, dir: usize) -> &[f64] {
        let k = self.k();
        &self.d_field()[(site * 3 + dir) * k..(site * 3 + dir + 1) * k]
    }

    pub fn phi_at(&self, site: usize) -> &[f64] {
        let f = self.f();
        &self.phi()[site * f..(site + 1) * f]
    }

    pub fn pi_at(&self, site: usize) -> &[f64] {
        let f = self.f();
        &self.pi()[site * f..(site + 1) * f]
    }

    pub fn a0_at(&self, site: usize) -> &[f64] {
        let k = self.k();
        &self.a0()[site * k..(site + 1) * k]
    }

    pub fn set_a(&mut self, site: usize, dir: usize, v: &[f64]) {
        let k = self.k();
        self.sections_mut().0[(site * 3 + dir) * k..(site * 3 + dir + 1) * k].copy_from_slice(v);
    }

    pub fn set_d(&mut self, site: usize, dir: usize, v: &[f64]) {
        let k = self.k();
        self.sections_mut().1[(site * 3 + dir) * k..(site * 3 + dir + 1) * k].copy_from_slice(v);
    }

    pub fn set_phi(&mut self, site: usize, v: &[f64]) {
        let f = self.f();
        self.sections_mut().2[site * f..(site + 1) * f].copy_from_slice(v);
    }

    pub fn set_pi(&mut self, site: usize, v: &[f64]) {
        let f = self.f();
        self.sections_mut().3[site * f..(site + 1) * f].copy_from_slice(v);
    }

    pub fn set_a0(&mut self, site: usize, v: &[f64]) {
        let k = self.k();
        self.sections_mut().4[site * k..(site + 1) * k].copy_from_slice(v);
    }

    pub fn check_compatible(&self, other: &LatticeState) -> Result<()> {
        if self.group != other.group {
            return Err(Error::GroupMismatch {
                expected: self.group,
                found: other.group,
            });
        }
        if self.geom != other.geom {
            return Err(Error::InvalidInput("lattice geometries differ".into()));
        }
        Ok(())
    }
}

impl FlatState for LatticeState {
    fn as_slice(&self) -> &[f64] {
        &self.data
    }

    fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }
}
