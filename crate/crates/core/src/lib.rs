//! Numerical laboratory for the Dirichlet spectrum of planar (and spatial)
//! open sets near the two-ball minimizer of the second eigenvalue.
//!
//! The crate rasterizes analytic shapes on uniform grids, solves the
//! Dirichlet eigenvalue and torsion problems with a masked finite-difference
//! Laplacian, extrapolates to the continuum, and evaluates both sides of the
//! classical inequalities relating eigenvalues, torsional rigidity and
//! Fraenkel asymmetries.

pub mod asymmetry;
pub mod dirichlet;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod nodal;
pub mod plot;
pub mod reference;
pub mod report;
pub mod sharpness;
pub mod sparse;

pub use error::{Error, Result};
pub use geometry::{make_ball, make_theta, domain_family, Family, GridDomain, GridFrame, Shape, TwoBallConfig};
