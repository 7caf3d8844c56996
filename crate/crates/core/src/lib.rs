//! Numerical laboratory for Dirichlet eigenfunctions and quasimodes of the
//! Bunimovich stadium: P1 finite elements, shift-invert Lanczos in spectral
//! windows, commutator (Rellich) identities, and the wing-mass / boundary-flux
//! observables that bound the total mass from below.

pub mod eigensolve;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod linalg;
pub mod mesh;
pub mod observables;
pub mod operators;
pub mod par;
pub mod quadrature;
pub mod quasimode;
pub mod verify;

pub use error::{LabError, Result};
pub use geometry::{Point, RegionTag, StadiumGeometry, WingZone};
pub use mesh::{BoundaryTag, Domain, TriMesh};
