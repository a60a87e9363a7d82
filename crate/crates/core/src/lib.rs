//! Numerical engine for Clebsch-type variational systems with a Lie-group
//! symmetry.
//!
//! The crate is organised by backend:
//!
//! * [`lie`]: the concrete groups U(1), SO(3), SU(2), the tangent group
//!   `g ⋊ G` and the fixed pairing between `g` and `g*`.
//! * [`clebsch`]: Clebsch-Lagrange / Clebsch-Hamilton mechanics on a
//!   vector-space configuration space with a linear group action, momentum
//!   maps and the residual diagnostics (Clebsch-Euler-Lagrange, momentum-map
//!   constraint, Euler-Poincaré, constraint drift).
//! * [`extended`]: the extended phase space `T*Q × (g × g*)`, its
//!   tangent-group momentum map and the two-stage Dirac-Bergmann constraints.
//! * [`ymh`]: a periodic 3-torus lattice Yang-Mills-Higgs system in the
//!   (1+3) Hamiltonian form, with the Gauss constraint as momentum map.
//! * [`gr`]: homogeneous ADM gravity on a flat 3-torus (Kasner class).
//! * [`integrators`]: fixed-step RK4 and implicit midpoint with trajectory
//!   recording.

pub mod clebsch;
pub mod error;
pub mod extended;
pub mod gr;
pub mod integrators;
pub mod lie;
pub mod ymh;

pub use error::{Error, Result};
