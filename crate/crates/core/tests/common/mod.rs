#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use speclab::sparse::SparseSymMatrix;

/// `J_n(x)` by its power series; accurate to ~1e-15 for `x < 12`.
pub fn bessel_series(n: u32, x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = half.powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
    let mut sum = term;
    for m in 1..200 {
        term *= -half * half / (m as f64 * (m as f64 + n as f64));
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// Root of `f` in `[a, b]` by plain bisection.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    assert!(fa * f(b) < 0.0, "no sign change on [{a}, {b}]");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// First positive zero of `J_0`.
pub fn j01() -> f64 {
    bisect(|x| bessel_series(0, x), 2.0, 3.0)
}

/// First positive zero of `J_1`.
pub fn j11() -> f64 {
    bisect(|x| bessel_series(1, x), 3.0, 4.5)
}

/// Second positive zero of `J_0`.
pub fn j02() -> f64 {
    bisect(|x| bessel_series(0, x), 5.0, 6.0)
}

/// First positive zero of `J_2`.
pub fn j21() -> f64 {
    bisect(|x| bessel_series(2, x), 4.5, 5.5)
}

/// Cyclic Jacobi rotations; returns ascending eigenvalues and the matching
/// eigenvectors as columns of `v` (`v[row][col]`).
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut a: Vec<Vec<f64>> = a.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = (0..n).map(|r| order.iter().map(|&c| v[r][c]).collect()).collect();
    (values, vectors)
}

/// Random sparse SPD matrix: a random symmetric pattern made strictly
/// diagonally dominant, plus a random positive shift.
pub fn random_spd(n: usize, seed: u64) -> SparseSymMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trip = Vec::new();
    let mut row_sum = vec![0.0; n];
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < 0.3 {
                let v: f64 = rng.random_range(-1.0..1.0);
                trip.push((i, j, v));
                trip.push((j, i, v));
                row_sum[i] += v.abs();
                row_sum[j] += v.abs();
            }
        }
    }
    for (i, s) in row_sum.iter().enumerate() {
        trip.push((i, i, s + rng.random_range(0.1..3.0)));
    }
    SparseSymMatrix::from_triplets(n, &trip).unwrap()
}

/// 1D Dirichlet Laplacian with unit spacing.
pub fn laplacian_1d(n: usize) -> SparseSymMatrix {
    let mut trip = Vec::new();
    for i in 0..n {
        trip.push((i, i, 2.0));
        if i + 1 < n {
            trip.push((i, i + 1, -1.0));
            trip.push((i + 1, i, -1.0));
        }
    }
    SparseSymMatrix::from_triplets(n, &trip).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
