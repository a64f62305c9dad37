//! Smallest eigenpairs of a sparse SPD matrix by blocked inverse subspace
//! iteration with Rayleigh-Ritz projection.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{dot, norm, LdlFactor, SparseSymMatrix};
use crate::error::{Error, Result};

/// Below this size the problem is solved densely.
const DENSE_LIMIT: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Relative residual target `‖Av - θv‖ ≤ tol·θ`.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Subspace dimension; `None` picks `max(2k, k + 8)`.
    pub block: Option<usize>,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: 1e-8,
            max_iter: 1000,
            seed: 0x5eed_1a7e,
            block: None,
        }
    }
}

/// Eigenvalue with a unit Euclidean-norm eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
}

pub fn smallest_eigenpairs(a: &SparseSymMatrix, k: usize, tol: f64) -> Result<Vec<Eigenpair>> {
    smallest_eigenpairs_with(
        a,
        k,
        &EigenOptions {
            tol,
            ..EigenOptions::default()
        },
    )
}

pub fn smallest_eigenpairs_with(a: &SparseSymMatrix, k: usize, opts: &EigenOptions) -> Result<Vec<Eigenpair>> {
    validate(a, k, opts)?;
    if a.n() <= DENSE_LIMIT {
        return Ok(dense_smallest(a, k));
    }
    let factor = LdlFactor::new(a)?;
    subspace_iteration(a, &factor, k, opts)
}

/// As [`smallest_eigenpairs_with`] but reusing an existing factorization of `a`.
pub fn smallest_eigenpairs_factored(
    a: &SparseSymMatrix,
    factor: &LdlFactor,
    k: usize,
    opts: &EigenOptions,
) -> Result<Vec<Eigenpair>> {
    validate(a, k, opts)?;
    if factor.n() != a.n() {
        return Err(Error::Argument("factorization does not match the matrix".into()));
    }
    if a.n() <= DENSE_LIMIT {
        return Ok(dense_smallest(a, k));
    }
    subspace_iteration(a, factor, k, opts)
}

fn validate(a: &SparseSymMatrix, k: usize, opts: &EigenOptions) -> Result<()> {
    let n = a.n();
    if k == 0 {
        return Err(Error::Argument("k must be at least 1".into()));
    }
    if k >= n {
        return Err(Error::Argument(format!("k = {k} requires more than {n} unknowns")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Argument("tolerance must be positive".into()));
    }
    Ok(())
}

fn dense_smallest(a: &SparseSymMatrix, k: usize) -> Vec<Eigenpair> {
    let n = a.n();
    let m = DMatrix::from_row_slice(n, n, &a.to_dense().concat());
    let eig = SymmetricEigen::new(m);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    idx.into_iter()
        .take(k)
        .map(|i| Eigenpair {
            value: eig.eigenvalues[i],
            vector: fix_sign(eig.eigenvectors.column(i).iter().copied().collect()),
        })
        .collect()
}

/// Make the largest-magnitude entry positive so output is reproducible.
fn fix_sign(mut v: Vec<f64>) -> Vec<f64> {
    let mut best = 0.0f64;
    for &x in &v {
        if x.abs() > best.abs() + 1e-12 {
            best = x;
        }
    }
    if best < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v
}

/// Modified Gram-Schmidt, applied twice. Columns that collapse are replaced
/// by fresh random vectors.
fn orthonormalize(cols: &mut [Vec<f64>], rng: &mut ChaCha8Rng) {
    for j in 0..cols.len() {
        for _attempt in 0..4 {
            let original = norm(&cols[j]);
            for _pass in 0..2 {
                for i in 0..j {
                    let (head, tail) = cols.split_at_mut(j);
                    let c = dot(&head[i], &tail[0]);
                    for (t, h) in tail[0].iter_mut().zip(&head[i]) {
                        *t -= c * h;
                    }
                }
            }
            let nv = norm(&cols[j]);
            if nv > 1e-10 * original.max(f64::MIN_POSITIVE) && nv > 0.0 {
                cols[j].iter_mut().for_each(|x| *x /= nv);
                break;
            }
            cols[j].iter_mut().for_each(|x| *x = rng.random::<f64>() - 0.5);
        }
    }
}

fn subspace_iteration(a: &SparseSymMatrix, factor: &LdlFactor, k: usize, opts: &EigenOptions) -> Result<Vec<Eigenpair>> {
    let n = a.n();
    let p = opts.block.unwrap_or((2 * k).max(k + 8)).max(k).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..n).map(|_| rng.random::<f64>() - 0.5).collect())
        .collect();
    orthonormalize(&mut x, &mut rng);
    let mut worst = f64::INFINITY;
    for _iter in 0..opts.max_iter {
        let mut y: Vec<Vec<f64>> = x.par_iter().map(|col| factor.solve(col)).collect();
        orthonormalize(&mut y, &mut rng);
        let ay: Vec<Vec<f64>> = y.par_iter().map(|col| a.apply(col)).collect();
        let mut hm = DMatrix::zeros(p, p);
        for i in 0..p {
            for j in i..p {
                let v = 0.5 * (dot(&y[i], &ay[j]) + dot(&y[j], &ay[i]));
                hm[(i, j)] = v;
                hm[(j, i)] = v;
            }
        }
        let eig = SymmetricEigen::new(hm);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let combine = |basis: &[Vec<f64>], c: usize| -> Vec<f64> {
            let mut out = vec![0.0; n];
            for (i, b) in basis.iter().enumerate() {
                let w = eig.eigenvectors[(i, c)];
                if w != 0.0 {
                    for (o, bi) in out.iter_mut().zip(b) {
                        *o += w * bi;
                    }
                }
            }
            out
        };
        let ritz: Vec<(f64, Vec<f64>, Vec<f64>)> = order
            .par_iter()
            .map(|&c| (eig.eigenvalues[c], combine(&y, c), combine(&ay, c)))
            .collect();
        worst = 0.0;
        for (theta, v, av) in ritz.iter().take(k) {
            let r: f64 = av.iter().zip(v).map(|(s, t)| (s - theta * t).powi(2)).sum::<f64>().sqrt();
            worst = worst.max(r / theta.abs().max(f64::MIN_POSITIVE));
        }
        if worst <= opts.tol {
            return Ok(ritz
                .into_iter()
                .take(k)
                .map(|(value, vector, _)| Eigenpair {
                    value,
                    vector: fix_sign(vector),
                })
                .collect());
        }
        x = ritz.into_iter().map(|(_, v, _)| v).collect();
    }
    Err(Error::IterationLimit {
        solver: "subspace iteration",
        iterations: opts.max_iter,
        residual: worst,
    })
}
