//! Configuration spaces: open subsets of `ℝⁿ` with the flat connection and a
//! linear group action.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lie::{su2_generators, Group, GroupElement, LieAlgebraElement};

/// A configuration space `Q ⊆ ℝⁿ` with a smooth `G`-action.
///
/// With the flat connection, `∇_v ξ_*` is the Jacobian of `q ↦ ξ·q` applied
/// to `v`, and the fibre part `K̄(ξ·p)` of the lifted action on covectors is
/// fixed by `⟨K̄(ξ·p), v⟩ = -⟨p, ∇_v ξ_*⟩`.
pub trait ConfigurationSpace: Send + Sync {
    fn dim(&self) -> usize;

    fn group(&self) -> Group;

    /// `g · q`.
    fn act(&self, g: &GroupElement, q: &DVector<f64>) -> Result<DVector<f64>>;

    /// Cotangent lift `g · p`, defined by `⟨g·p, v⟩ = ⟨p, g⁻¹·v⟩`.
    fn act_covector(&self, g: &GroupElement, q: &DVector<f64>, p: &DVector<f64>) -> Result<DVector<f64>>;

    /// Fundamental vector field `ξ · q`.
    fn algebra_action(&self, xi: &LieAlgebraElement, q: &DVector<f64>) -> DVector<f64>;

    /// `∇_v ξ_*`: derivative of `q ↦ ξ·q` in direction `v`.
    fn algebra_action_derivative(&self, xi: &LieAlgebraElement, q: &DVector<f64>, v: &DVector<f64>) -> DVector<f64>;

    /// `K̄(ξ · p)`.
    fn cotangent_algebra_action(&self, xi: &LieAlgebraElement, q: &DVector<f64>, p: &DVector<f64>) -> DVector<f64>;

    fn check_point(&self, context: &'static str, x: &DVector<f64>) -> Result<()> {
        if x.len() == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                context,
                expected: self.dim(),
                found: x.len(),
            })
        }
    }
}

/// A linear representation `ρ: G → GL(n)` with generators `M_a = dρ(e_a)`,
/// so `ξ·q = Σ ξ_a M_a q`.
#[derive(Debug, Clone)]
pub struct LinearRepresentation {
    group: Group,
    kind: RepresentationKind,
    generators: Vec<DMatrix<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum RepresentationKind {
    /// `copies` vectors in ℝ³ rotated together.
    So3Vectors { copies: usize },
    /// `copies` planes ℝ² ≅ ℂ, each rotated by `charge · θ`.
    U1Planes { copies: usize, charge: f64 },
    /// Fundamental representation on ℂ² ≅ ℝ⁴, ordered `(Re z1, Im z1, Re z2, Im z2)`.
    Su2Fundamental,
    /// SU(2) acting on `copies` vectors in ℝ³ through SO(3).
    Su2Adjoint { copies: usize },
}

fn block_diag(block: &DMatrix<f64>, copies: usize) -> DMatrix<f64> {
    let b = block.nrows();
    let mut m = DMatrix::zeros(b * copies, b * copies);
    for c in 0..copies {
        m.view_mut((c * b, c * b), (b, b)).copy_from(block);
    }
    m
}

/// Real 2n×2n form of a complex n×n matrix acting on `(Re z1, Im z1, ...)`.
fn realify(c: &nalgebra::Matrix2<Complex64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            let z = c[(i, j)];
            m[(2 * i, 2 * j)] = z.re;
            m[(2 * i, 2 * j + 1)] = -z.im;
            m[(2 * i + 1, 2 * j)] = z.im;
            m[(2 * i + 1, 2 * j + 1)] = z.re;
        }
    }
    m
}

fn so3_block(r: &nalgebra::Matrix3<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(3, 3, |i, j| r[(i, j)])
}

impl LinearRepresentation {
    /// SO(3) rotating `copies` vectors of ℝ³ simultaneously.
    pub fn so3_vectors(copies: usize) -> Self {
        let gens = crate::lie::so3_generators()
            .iter()
            .map(|g| block_diag(&so3_block(g), copies))
            .collect();
        Self {
            group: Group::So3,
            kind: RepresentationKind::So3Vectors { copies },
            generators: gens,
        }
    }

    /// U(1) rotating `copies` planes with the given charge.
    pub fn u1_planes(copies: usize, charge: f64) -> Self {
        let j = DMatrix::from_row_slice(2, 2, &[0.0, -charge, charge, 0.0]);
        Self {
            group: Group::U1,
            kind: RepresentationKind::U1Planes { copies, charge },
            generators: vec![block_diag(&j, copies)],
        }
    }

    /// SU(2) on ℂ².
    pub fn su2_fundamental() -> Self {
        let gens = su2_generators().iter().map(realify).collect();
        Self {
            group: Group::Su2,
            kind: RepresentationKind::Su2Fundamental,
            generators: gens,
        }
    }

    /// SU(2) on `copies` vectors of ℝ³ via the covering map.
    pub fn su2_adjoint(copies: usize) -> Self {
        let gens = crate::lie::so3_generators()
            .iter()
            .map(|g| block_diag(&so3_block(g), copies))
            .collect();
        Self {
            group: Group::Su2,
            kind: RepresentationKind::Su2Adjoint { copies },
            generators: gens,
        }
    }

    pub fn generators(&self) -> &[DMatrix<f64>] {
        &self.generators
    }

    /// `M_ξ = Σ ξ_a M_a`.
    pub fn generator(&self, xi: &LieAlgebraElement) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (c, g) in xi.coords().iter().zip(&self.generators) {
            m += g * *c;
        }
        m
    }

    /// `ρ(g)`.
    pub fn matrix(&self, g: &GroupElement) -> Result<DMatrix<f64>> {
        if g.group() != self.group {
            return Err(Error::GroupMismatch {
                expected: self.group,
                found: g.group(),
            });
        }
        Ok(match (self.kind, g) {
            (RepresentationKind::So3Vectors { copies }, GroupElement::So3(r)) => {
                block_diag(&so3_block(r), copies)
            }
            (RepresentationKind::U1Planes { copies, charge }, GroupElement::U1(z)) => {
                let th = charge * z.arg();
                let (s, c) = th.sin_cos();
                // For integer charge use z^charge directly to avoid the branch cut.
                let (c, s) = if charge.fract() == 0.0 {
                    let w = z.powi(charge as i32);
                    (w.re, w.im)
                } else {
                    (c, s)
                };
                block_diag(&DMatrix::from_row_slice(2, 2, &[c, -s, s, c]), copies)
            }
            (RepresentationKind::Su2Fundamental, GroupElement::Su2(u)) => realify(u),
            (RepresentationKind::Su2Adjoint { copies }, GroupElement::Su2(_)) => {
                block_diag(&so3_block(&g.adjoint_matrix()), copies)
            }
            _ => unreachable!("group checked above"),
        })
    }
}

impl ConfigurationSpace for LinearRepresentation {
    fn dim(&self) -> usize {
        self.generators[0].nrows()
    }

    fn group(&self) -> Group {
        self.group
    }

    fn act(&self, g: &GroupElement, q: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_point("configuration", q)?;
        Ok(self.matrix(g)? * q)
    }

    fn act_covector(&self, g: &GroupElement, q: &DVector<f64>, p: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_point("configuration", q)?;
        self.check_point("momentum", p)?;
        // g·p = ρ(g⁻¹)ᵀ p
        Ok(self.matrix(&g.inverse())?.transpose() * p)
    }

    fn algebra_action(&self, xi: &LieAlgebraElement, q: &DVector<f64>) -> DVector<f64> {
        self.generator(xi) * q
    }

    fn algebra_action_derivative(&self, xi: &LieAlgebraElement, _q: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        self.generator(xi) * v
    }

    fn cotangent_algebra_action(&self, xi: &LieAlgebraElement, _q: &DVector<f64>, p: &DVector<f64>) -> DVector<f64> {
        -(self.generator(xi).transpose() * p)
    }
}
