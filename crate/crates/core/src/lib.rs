//! Secular dynamics of the spatial lunar three-body problem.
//!
//! The crate covers the whole chain from the full Newtonian problem down to
//! the integrable quadrupolar system and its action-angle structure:
//!
//! * [`kepler`]: Delaunay elements, Kepler's equation, exact two-body drifts.
//! * [`threebody`]: Jacobi coordinates, the exact and Legendre-expanded
//!   perturbing function, angular momenta and a symplectic integrator.
//! * [`secular`]: numerical double averaging over the mean anomalies and the
//!   closed quadrupolar term.
//! * [`quadrupolar`]: the normalized Lidov–Ziglin Hamiltonian `W`, region
//!   classification, singularities, phase portraits and the reduced flow.
//! * [`actionangle`]: actions, frequency maps and torsion determinants.
//! * [`kozai`]: end-to-end Kozai–Lidov demonstration runs of the full problem.
//!
//! Units follow the usual celestial-mechanics normalization with the
//! gravitational constant set to one.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod actionangle;
pub mod error;
pub mod kepler;
pub mod kozai;
pub mod numerics;
pub mod quadrupolar;
pub mod secular;
pub mod threebody;

pub use error::{Error, Result};
pub use kepler::{CartesianPair, DelaunayElements, GravParams};
pub use quadrupolar::{LZParams, LZPoint, RegionClass, SingularityKind, SingularityReport};
pub use threebody::{JacobiState, MassSystem};

/// Three-vectors used throughout.
pub type Vec3 = nalgebra::Vector3<f64>;
