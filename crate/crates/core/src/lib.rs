//! Cameron–Liebler line classes of PG(3,q), q odd, with parameter (q²+1)/2.
//!
//! The crate builds PG(3,q) with full incidence, the pencil of elliptic quadrics
//! through U3, the Bruen–Drudge class, its perturbation and the classes obtained
//! from them by swapping external lines for secant lines, and verifies them
//! exhaustively: line-meet counts, the tight-set condition on the Klein quadric,
//! character spectra, and invariance under an explicit collineation group.

pub mod classes;
pub mod field;
pub mod geometry;
pub mod idset;
pub mod klein;
pub mod lemmas;
pub mod spectra;
pub mod symmetry;

pub use field::{Fe, Field, FieldError, QuadraticCharacter};
pub use geometry::{Geometry, GeometryError, LineId, PlaneId, PointId};
pub use idset::IdSet;
