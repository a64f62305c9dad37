use super::{axpy, dot, norm, SparseSymMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final `‖Ax − b‖`.
    pub residual: f64,
}

/// Conjugate gradients from a zero start; stops once `‖Ax − b‖ ≤ tol·‖b‖`.
pub fn cg_solve(a: &SparseSymMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<CgSolution> {
    cg_solve_from(a, b, vec![0.0; b.len()], tol, max_iter)
}

pub fn cg_solve_from(a: &SparseSymMatrix, b: &[f64], x0: Vec<f64>, tol: f64, max_iter: usize) -> Result<CgSolution> {
    if !(tol > 0.0) {
        return Err(Error::Argument(format!("tolerance must be positive, got {tol}")));
    }
    if b.len() != a.n() || x0.len() != a.n() {
        return Err(Error::Argument("dimension mismatch in cg_solve".into()));
    }
    let target = tol * norm(b);
    let mut x = x0;
    let mut r = b.to_vec();
    let ax = a.apply(&x);
    axpy(-1.0, &ax, &mut r);
    let mut rr = dot(&r, &r);
    if rr.sqrt() <= target {
        return Ok(CgSolution {
            x,
            iterations: 0,
            residual: rr.sqrt(),
        });
    }
    let mut p = r.clone();
    let mut ap = vec![0.0; b.len()];
    for it in 1..=max_iter {
        a.mul_vec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NotPositiveDefinite { pivot: it, value: pap });
        }
        let alpha = rr / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= target {
            // Recompute the true residual to guard against drift.
            let mut res = b.to_vec();
            axpy(-1.0, &a.apply(&x), &mut res);
            let true_res = norm(&res);
            if true_res <= target {
                return Ok(CgSolution {
                    x,
                    iterations: it,
                    residual: true_res,
                });
            }
            r = res;
            rr = dot(&r, &r);
            p.copy_from_slice(&r);
            continue;
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
    }
    Err(Error::IterationLimit {
        solver: "conjugate gradients",
        iterations: max_iter,
        residual: rr.sqrt(),
    })
}
