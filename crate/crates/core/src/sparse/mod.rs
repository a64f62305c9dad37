//! Sparse symmetric linear algebra used by the Dirichlet solvers.

mod cg;
mod eigen;
mod ldl;
mod matrix;

pub use cg::{cg_solve, cg_solve_from, CgSolution};
pub use eigen::{smallest_eigenpairs, smallest_eigenpairs_factored, smallest_eigenpairs_with, EigenOptions, Eigenpair};
pub use ldl::{nested_dissection, LdlFactor};
pub use matrix::SparseSymMatrix;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
