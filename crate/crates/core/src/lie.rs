//! Concrete Lie groups and algebras: U(1), SO(3), SU(2) and the tangent
//! group `TG ≅ g ⋊_Ad G` in the right trivialization.
//!
//! Bases are fixed per group:
//!
//! * `u(1) = iℝ` with basis `e = i`; one coordinate.
//! * `so(3)` with the antisymmetric generators `(e_a)_{bc} = -ε_{abc}`, so
//!   that `e_a · q = e_a × q` and `[e1, e2] = e3` cyclically.
//! * `su(2)` with `e_a = -(i/2) σ_a` (Pauli matrices), which again gives
//!   `[e1, e2] = e3`. Adjoint computations go through the covering map
//!   `SU(2) → SO(3)` so all algebra data stays real.
//!
//! The pairing `κ` between `g*` and `g` is the coordinate dot product in
//! these (orthonormal) bases, i.e. the normalised negative trace form.

use std::fmt;

use nalgebra::{Matrix2, Matrix3, Vector3};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when validating the defining matrix constraint of a group
/// element.
pub const GROUP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    U1,
    So3,
    Su2,
}

impl Group {
    /// Dimension of the Lie algebra.
    pub fn dim(self) -> usize {
        match self {
            Group::U1 => 1,
            Group::So3 | Group::Su2 => 3,
        }
    }

    pub fn is_abelian(self) -> bool {
        matches!(self, Group::U1)
    }

    pub fn name(self) -> &'static str {
        match self {
            Group::U1 => "u1",
            Group::So3 => "so3",
            Group::Su2 => "su2",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn same_group(expected: Group, found: Group) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::GroupMismatch { expected, found })
    }
}

/// An element `ξ ∈ g` in the fixed basis of its group. Unused trailing
/// coordinates (for `u(1)`) are kept at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LieAlgebraElement {
    group: Group,
    coords: [f64; 3],
}

/// An element `μ ∈ g*` in the κ-dual basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualAlgebraElement {
    group: Group,
    coords: [f64; 3],
}

macro_rules! algebra_vector_impl {
    ($ty:ident) => {
        impl $ty {
            /// Builds an element from its coordinates; `coords.len()` must
            /// equal the algebra dimension and all entries must be finite.
            pub fn new(group: Group, coords: &[f64]) -> Result<Self> {
                if coords.len() != group.dim() {
                    return Err(Error::DimensionMismatch {
                        context: stringify!($ty),
                        expected: group.dim(),
                        found: coords.len(),
                    });
                }
                if coords.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidInput(format!(
                        "{} coordinates must be finite",
                        stringify!($ty)
                    )));
                }
                let mut c = [0.0; 3];
                c[..coords.len()].copy_from_slice(coords);
                Ok(Self { group, coords: c })
            }

            pub fn zero(group: Group) -> Self {
                Self {
                    group,
                    coords: [0.0; 3],
                }
            }

            /// The `a`-th basis vector.
            pub fn basis(group: Group, a: usize) -> Self {
                assert!(a < group.dim(), "basis index out of range");
                let mut coords = [0.0; 3];
                coords[a] = 1.0;
                Self { group, coords }
            }

            pub fn from_vector3(group: Group, v: Vector3<f64>) -> Self {
                let mut coords = [v.x, v.y, v.z];
                for c in coords.iter_mut().skip(group.dim()) {
                    *c = 0.0;
                }
                Self { group, coords }
            }

            /// Coordinates padded to three entries (zero-padded for `u(1)`).
            pub fn to_vector3(&self) -> Vector3<f64> {
                Vector3::new(self.coords[0], self.coords[1], self.coords[2])
            }

            pub fn group(&self) -> Group {
                self.group
            }

            pub fn dim(&self) -> usize {
                self.group.dim()
            }

            pub fn coords(&self) -> &[f64] {
                &self.coords[..self.group.dim()]
            }

            pub fn scale(&self, s: f64) -> Self {
                let mut out = *self;
                out.coords.iter_mut().for_each(|c| *c *= s);
                out
            }

            pub fn add(&self, other: &Self) -> Result<Self> {
                same_group(self.group, other.group)?;
                let mut out = *self;
                for (o, x) in out.coords.iter_mut().zip(other.coords) {
                    *o += x;
                }
                Ok(out)
            }

            pub fn sub(&self, other: &Self) -> Result<Self> {
                self.add(&other.scale(-1.0))
            }

            pub fn norm(&self) -> f64 {
                self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
            }

            /// Uniform random coordinates in `[-scale, scale]`.
            pub fn random<R: Rng + ?Sized>(group: Group, scale: f64, rng: &mut R) -> Self {
                let mut coords = [0.0; 3];
                for c in coords.iter_mut().take(group.dim()) {
                    *c = rng.gen_range(-scale..=scale);
                }
                Self { group, coords }
            }
        }
    };
}

algebra_vector_impl!(LieAlgebraElement);
algebra_vector_impl!(DualAlgebraElement);

/// `κ(μ, ξ)`: the coordinate dot product.
pub fn pairing(mu: &DualAlgebraElement, xi: &LieAlgebraElement) -> Result<f64> {
    same_group(mu.group, xi.group)?;
    Ok(mu.coords.iter().zip(xi.coords).map(|(a, b)| a * b).sum())
}

impl LieAlgebraElement {
    /// `κ♭`: the dual element with the same coordinates.
    pub fn flat(&self) -> DualAlgebraElement {
        DualAlgebraElement {
            group: self.group,
            coords: self.coords,
        }
    }
}

impl DualAlgebraElement {
    /// `κ♯`: the algebra element with the same coordinates.
    pub fn sharp(&self) -> LieAlgebraElement {
        LieAlgebraElement {
            group: self.group,
            coords: self.coords,
        }
    }
}

/// `[ξ, ζ]`.
pub fn bracket(xi: &LieAlgebraElement, zeta: &LieAlgebraElement) -> Result<LieAlgebraElement> {
    same_group(xi.group, zeta.group)?;
    Ok(match xi.group {
        Group::U1 => LieAlgebraElement::zero(Group::U1),
        g => LieAlgebraElement::from_vector3(g, xi.to_vector3().cross(&zeta.to_vector3())),
    })
}

/// `ad*_ξ μ`, defined without a sign by `κ(ad*_ξ μ, ζ) = κ(μ, [ξ, ζ])`.
///
/// For `so(3)* ≅ ℝ³` this is `μ × ξ`.
pub fn coadjoint_star(xi: &LieAlgebraElement, mu: &DualAlgebraElement) -> Result<DualAlgebraElement> {
    same_group(xi.group, mu.group)?;
    Ok(match xi.group {
        Group::U1 => DualAlgebraElement::zero(Group::U1),
        g => DualAlgebraElement::from_vector3(g, mu.to_vector3().cross(&xi.to_vector3())),
    })
}

/// Infinitesimal coadjoint action `Coad_ξ μ = -ad*_ξ μ`, i.e.
/// `κ(Coad_ξ μ, ζ) = -κ(μ, [ξ, ζ])`.
pub fn coad(xi: &LieAlgebraElement, mu: &DualAlgebraElement) -> Result<DualAlgebraElement> {
    Ok(coadjoint_star(xi, mu)?.scale(-1.0))
}

/// A group element in its defining representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GroupElement {
    /// Unit complex number.
    U1(Complex64),
    /// Rotation matrix.
    So3(Matrix3<f64>),
    /// Special unitary 2×2 matrix.
    Su2(Matrix2<Complex64>),
}

fn pauli() -> [Matrix2<Complex64>; 3] {
    let o = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    [
        Matrix2::new(o, one, one, o),
        Matrix2::new(o, -i, i, o),
        Matrix2::new(one, o, o, -one),
    ]
}

/// The `su(2)` basis `e_a = -(i/2) σ_a` as 2×2 complex matrices.
pub fn su2_generators() -> [Matrix2<Complex64>; 3] {
    let s = pauli();
    let f = Complex64::new(0.0, -0.5);
    [s[0] * f, s[1] * f, s[2] * f]
}

/// The `so(3)` basis as antisymmetric matrices, `e_a q = e_a × q`.
pub fn so3_generators() -> [Matrix3<f64>; 3] {
    [
        hat(&Vector3::new(1.0, 0.0, 0.0)),
        hat(&Vector3::new(0.0, 1.0, 0.0)),
        hat(&Vector3::new(0.0, 0.0, 1.0)),
    ]
}

/// Hat map `ℝ³ → so(3)`, `hat(w) q = w × q`.
pub fn hat(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

impl GroupElement {
    pub fn identity(group: Group) -> Self {
        match group {
            Group::U1 => GroupElement::U1(Complex64::new(1.0, 0.0)),
            Group::So3 => GroupElement::So3(Matrix3::identity()),
            Group::Su2 => GroupElement::Su2(Matrix2::identity()),
        }
    }

    pub fn group(&self) -> Group {
        match self {
            GroupElement::U1(_) => Group::U1,
            GroupElement::So3(_) => Group::So3,
            GroupElement::Su2(_) => Group::Su2,
        }
    }

    /// Deviation from the defining constraint (`|z| = 1`, `RᵀR = I` with
    /// `det R = 1`, `U†U = I` with `det U = 1`), in max-norm.
    pub fn constraint_defect(&self) -> f64 {
        match self {
            GroupElement::U1(z) => (z.norm() - 1.0).abs(),
            GroupElement::So3(r) => {
                let d = r.transpose() * r - Matrix3::identity();
                d.amax().max((r.determinant() - 1.0).abs())
            }
            GroupElement::Su2(u) => {
                let d = u.adjoint() * u - Matrix2::identity();
                let m = d.iter().map(|c| c.norm()).fold(0.0, f64::max);
                m.max((u.determinant() - Complex64::new(1.0, 0.0)).norm())
            }
        }
    }

    pub fn is_valid(&self) -> bool {
        self.constraint_defect() <= GROUP_TOLERANCE
    }

    pub fn multiply(&self, other: &GroupElement) -> Result<GroupElement> {
        match (self, other) {
            (GroupElement::U1(a), GroupElement::U1(b)) => Ok(GroupElement::U1(a * b)),
            (GroupElement::So3(a), GroupElement::So3(b)) => Ok(GroupElement::So3(a * b)),
            (GroupElement::Su2(a), GroupElement::Su2(b)) => Ok(GroupElement::Su2(a * b)),
            _ => Err(Error::GroupMismatch {
                expected: self.group(),
                found: other.group(),
            }),
        }
    }

    pub fn inverse(&self) -> GroupElement {
        match self {
            GroupElement::U1(z) => GroupElement::U1(z.conj()),
            GroupElement::So3(r) => GroupElement::So3(r.transpose()),
            GroupElement::Su2(u) => GroupElement::Su2(u.adjoint()),
        }
    }

    /// Matrix of `Ad_g` in the algebra basis (orthogonal for all supported
    /// groups). For SU(2) this is the image under the covering map.
    pub fn adjoint_matrix(&self) -> Matrix3<f64> {
        match self {
            GroupElement::U1(_) => {
                let mut m = Matrix3::zeros();
                m[(0, 0)] = 1.0;
                m
            }
            GroupElement::So3(r) => *r,
            GroupElement::Su2(u) => su2_to_so3(u),
        }
    }

    /// Random element `exp(ξ)` with `ξ` uniform in `[-scale, scale]^dim`.
    pub fn random<R: Rng + ?Sized>(group: Group, scale: f64, rng: &mut R) -> Self {
        group_exp(&LieAlgebraElement::random(group, scale, rng), 1.0)
    }

    /// Principal logarithm. For U(1) the angle lies in `(-π, π]`; for SU(2)
    /// the rotation angle lies in `[0, 2π]`.
    pub fn log(&self) -> LieAlgebraElement {
        match self {
            GroupElement::U1(z) => LieAlgebraElement {
                group: Group::U1,
                coords: [z.arg(), 0.0, 0.0],
            },
            GroupElement::So3(r) => {
                let cos = ((r.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
                let theta = cos.acos();
                let axis = Vector3::new(
                    r[(2, 1)] - r[(1, 2)],
                    r[(0, 2)] - r[(2, 0)],
                    r[(1, 0)] - r[(0, 1)],
                );
                let w = if theta < 1e-8 {
                    axis * 0.5
                } else {
                    axis * (theta / (2.0 * theta.sin()))
                };
                LieAlgebraElement::from_vector3(Group::So3, w)
            }
            GroupElement::Su2(u) => {
                // u = w I - i (x σ1 + y σ2 + z σ3)
                let w = u[(0, 0)].re;
                let z = -u[(0, 0)].im;
                let y = -u[(0, 1)].re;
                let x = -u[(0, 1)].im;
                let v = Vector3::new(x, y, z);
                let s = v.norm();
                let half = s.atan2(w);
                let w = if s < 1e-300 {
                    Vector3::zeros()
                } else {
                    v * (2.0 * half / s)
                };
                LieAlgebraElement::from_vector3(Group::Su2, w)
            }
        }
    }
}

/// Covering map: `R_ab = ½ tr(σ_a U σ_b U†)`.
fn su2_to_so3(u: &Matrix2<Complex64>) -> Matrix3<f64> {
    let s = pauli();
    let ud = u.adjoint();
    Matrix3::from_fn(|a, b| 0.5 * (s[a] * u * s[b] * ud).trace().re)
}

/// `Ad_g ζ`.
pub fn adjoint(g: &GroupElement, zeta: &LieAlgebraElement) -> Result<LieAlgebraElement> {
    same_group(g.group(), zeta.group)?;
    Ok(match g {
        GroupElement::U1(_) => *zeta,
        _ => LieAlgebraElement::from_vector3(zeta.group, g.adjoint_matrix() * zeta.to_vector3()),
    })
}

/// `CoAd_g μ`, the coadjoint action: `κ(CoAd_g μ, Ad_g ζ) = κ(μ, ζ)`.
pub fn coadjoint(g: &GroupElement, mu: &DualAlgebraElement) -> Result<DualAlgebraElement> {
    same_group(g.group(), mu.group)?;
    Ok(match g {
        GroupElement::U1(_) => *mu,
        // Ad is orthogonal in the chosen bases, so (Ad_{g⁻¹})ᵀ = Ad_g.
        _ => DualAlgebraElement::from_vector3(mu.group, g.adjoint_matrix() * mu.to_vector3()),
    })
}

/// `exp(t ξ)`.
pub fn group_exp(xi: &LieAlgebraElement, t: f64) -> GroupElement {
    match xi.group {
        Group::U1 => GroupElement::U1(Complex64::from_polar(1.0, t * xi.coords[0])),
        Group::So3 => {
            let w = xi.to_vector3() * t;
            let theta = w.norm();
            let k = hat(&w);
            // Rodrigues, with Taylor coefficients near the identity.
            let (a, b) = if theta < 1e-6 {
                (1.0 - theta * theta / 6.0, 0.5 - theta * theta / 24.0)
            } else {
                (theta.sin() / theta, (1.0 - theta.cos()) / (theta * theta))
            };
            GroupElement::So3(Matrix3::identity() + k * a + k * k * b)
        }
        Group::Su2 => {
            let w = xi.to_vector3() * t;
            let theta = w.norm();
            let c = (theta / 2.0).cos();
            let s = if theta < 1e-12 {
                0.5 - theta * theta / 48.0
            } else {
                (theta / 2.0).sin() / theta
            };
            let sg = pauli();
            let i = Complex64::new(0.0, 1.0);
            let n_sigma = sg[0] * Complex64::from(w.x) + sg[1] * Complex64::from(w.y) + sg[2] * Complex64::from(w.z);
            GroupElement::Su2(Matrix2::identity() * Complex64::from(c) - n_sigma * (i * s))
        }
    }
}

/// `(ξ, g)` in the right trivialization of `TG`, multiplied by
/// `(ξ, a)·(ζ, b) = (ξ + Ad_a ζ, ab)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentGroupElement {
    pub xi: LieAlgebraElement,
    pub g: GroupElement,
}

impl TangentGroupElement {
    pub fn new(xi: LieAlgebraElement, g: GroupElement) -> Result<Self> {
        same_group(g.group(), xi.group)?;
        Ok(Self { xi, g })
    }

    pub fn identity(group: Group) -> Self {
        Self {
            xi: LieAlgebraElement::zero(group),
            g: GroupElement::identity(group),
        }
    }

    pub fn group(&self) -> Group {
        self.g.group()
    }

    pub fn inverse(&self) -> Self {
        let g_inv = self.g.inverse();
        let xi = adjoint(&g_inv, &self.xi).expect("same group").scale(-1.0);
        Self { xi, g: g_inv }
    }

    pub fn random<R: Rng + ?Sized>(group: Group, scale: f64, rng: &mut R) -> Self {
        Self {
            xi: LieAlgebraElement::random(group, scale, rng),
            g: GroupElement::random(group, scale, rng),
        }
    }
}

pub fn tangent_group_multiply(
    a: &TangentGroupElement,
    b: &TangentGroupElement,
) -> Result<TangentGroupElement> {
    same_group(a.group(), b.group())?;
    Ok(TangentGroupElement {
        xi: a.xi.add(&adjoint(&a.g, &b.xi)?)?,
        g: a.g.multiply(&b.g)?,
    })
}
