//! Grid laboratory for fractional Dirichlet eigenproblems.
//!
//! The crate discretizes the fractional Laplacian with an exterior
//! Dirichlet condition on bounded grid domains, computes principal
//! eigenpairs and eigenfunction maximizers, simulates isotropic
//! alpha-stable paths, and bundles both routes into experiment runners
//! that measure the constants in the classical eigenvalue inequalities
//! (Faber-Krahn, Barta, reverse Holder, obstacle placement) at desk scale.

pub mod eigen;
pub mod error;
pub mod experiments;
pub mod exec;
pub mod fraclap;
pub mod geometry;
pub mod grid;
pub mod linalg;
pub mod quad;
pub mod reference;
pub mod special;
pub mod stablemc;

pub use error::{Error, Result};
pub use geometry::{BetaCertificate, Domain, DomainKind};
pub use grid::{Grid, Point};
