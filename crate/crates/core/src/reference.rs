//! Closed-form Dirichlet data for balls and unions of balls.
//!
//! Eigenvalues of a ball of radius `r` are `z²/r²` where `z` runs over the
//! positive zeros of `J_n` in the plane and of the spherical Bessel functions
//! `j_l` in space. Unions of disjoint balls have the merged spectrum.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::unit_ball_volume;

/// First positive zero of `J_0`.
pub const J01: f64 = 2.404_825_557_695_773;
/// First positive zero of `J_1`.
pub const J11: f64 = 3.831_705_970_207_512;

/// Bessel function of the first kind of integer order, from the periodic
/// trapezoid rule applied to `(1/2π)∫cos(nτ − x sin τ) dτ` over a full period.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let nodes = 64 + 2 * (x.abs() as usize + n as usize);
    let step = 2.0 * PI / nodes as f64;
    let nf = n as f64;
    let sum: f64 = (0..nodes)
        .map(|i| {
            let tau = i as f64 * step;
            (nf * tau - x * tau.sin()).cos()
        })
        .sum();
    sum / nodes as f64
}

/// Spherical Bessel function `j_l`. Upward recurrence is stable for `x ≥ l`,
/// which covers every zero.
pub fn spherical_j(l: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    let j0 = x.sin() / x;
    if l == 0 {
        return j0;
    }
    let mut prev = j0;
    let mut cur = x.sin() / (x * x) - x.cos() / x;
    for m in 1..l {
        let next = (2 * m + 1) as f64 / x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fa < 0.0) == (fm < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
        if b - a <= 4.0 * f64::EPSILON * b {
            break;
        }
    }
    0.5 * (a + b)
}

/// The first `count` positive zeros of `f`, scanning upward from `start`.
fn zeros(f: impl Fn(f64) -> f64, start: f64, count: usize) -> Vec<f64> {
    let step = 0.05;
    let mut out = Vec::with_capacity(count);
    let mut a = start;
    let mut fa = f(a);
    while out.len() < count {
        let b = a + step;
        let fb = f(b);
        if fa == 0.0 {
            out.push(a);
        } else if (fa < 0.0) != (fb < 0.0) {
            out.push(bisect(&f, a, b));
        }
        a = b;
        fa = fb;
    }
    out
}

/// The `m`-th positive zero (`m ≥ 1`) of `J_n`.
pub fn bessel_zero(n: u32, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::Argument("zero index starts at 1".into()));
    }
    Ok(zeros(|x| bessel_j(n, x), (n as f64).max(0.5), m)[m - 1])
}

/// The `m`-th positive zero (`m ≥ 1`) of `j_l`.
pub fn spherical_zero(l: u32, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::Argument("zero index starts at 1".into()));
    }
    Ok(zeros(|x| spherical_j(l, x), (l as f64).max(0.5), m)[m - 1])
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(Error::Argument(format!("dimension {dim} is not supported")))
    }
}

/// Radius of the ball with the given volume.
pub fn ball_radius(dim: usize, volume: f64) -> f64 {
    (volume / unit_ball_volume(dim)).powf(1.0 / dim as f64)
}

/// First `k` eigenvalues (with multiplicity) of the unit ball.
fn unit_ball_spectrum(dim: usize, k: usize) -> Result<Vec<f64>> {
    check_dim(dim)?;
    let mut vals = Vec::new();
    for n in 0..=k as u32 {
        let mult = if dim == 2 {
            if n == 0 {
                1
            } else {
                2
            }
        } else {
            2 * n as usize + 1
        };
        let z = if dim == 2 {
            zeros(|x| bessel_j(n, x), (n as f64).max(0.5), k)
        } else {
            zeros(|x| spherical_j(n, x), (n as f64).max(0.5), k)
        };
        for zm in z {
            vals.extend(std::iter::repeat(zm * zm).take(mult));
        }
    }
    vals.sort_by(f64::total_cmp);
    vals.truncate(k);
    Ok(vals)
}

/// First `k` Dirichlet eigenvalues of a ball of the given volume.
pub fn ball_spectrum(dim: usize, volume: f64, k: usize) -> Result<Vec<f64>> {
    let r = ball_radius(dim, volume);
    Ok(unit_ball_spectrum(dim, k)?.into_iter().map(|v| v / (r * r)).collect())
}

/// First `k` eigenvalues of a disjoint union of balls with the given volumes.
pub fn union_spectrum(dim: usize, volumes: &[f64], k: usize) -> Result<Vec<f64>> {
    let unit = unit_ball_spectrum(dim, k)?;
    let mut vals: Vec<f64> = volumes
        .iter()
        .flat_map(|&v| {
            let r = ball_radius(dim, v);
            unit.iter().map(move |u| u / (r * r))
        })
        .collect();
    vals.sort_by(f64::total_cmp);
    vals.truncate(k);
    Ok(vals)
}

/// Θ of total volume `volume`: two disjoint balls of half the volume each.
pub fn theta_spectrum(dim: usize, volume: f64, k: usize) -> Result<Vec<f64>> {
    union_spectrum(dim, &[volume / 2.0, volume / 2.0], k)
}

/// Two disjoint balls carrying fractions `fraction` and `1 - fraction` of `volume`.
pub fn two_ball_spectrum(dim: usize, volume: f64, fraction: f64, k: usize) -> Result<Vec<f64>> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::OutOfRange(format!("volume fraction {fraction} not in (0, 1)")));
    }
    union_spectrum(dim, &[fraction * volume, (1.0 - fraction) * volume], k)
}

/// Torsional rigidity of a ball, `ω_d r^{d+2} / (d(d+2))`.
pub fn ball_torsion(dim: usize, volume: f64) -> f64 {
    let d = dim as f64;
    let r = ball_radius(dim, volume);
    unit_ball_volume(dim) * r.powf(d + 2.0) / (d * (d + 2.0))
}

/// Maximum of the torsion function of a ball, `r²/(2d)`.
pub fn ball_torsion_sup(dim: usize, volume: f64) -> f64 {
    let r = ball_radius(dim, volume);
    r * r / (2.0 * dim as f64)
}

/// `|∇w|` on the sphere, `r/d`.
pub fn ball_boundary_gradient(dim: usize, volume: f64) -> f64 {
    ball_radius(dim, volume) / dim as f64
}

pub fn theta_torsion(dim: usize, volume: f64) -> f64 {
    2.0 * ball_torsion(dim, volume / 2.0)
}

/// Analytic reference data for the ball `B` and the set Θ of common volume.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Reference {
    pub dim: usize,
    pub volume: f64,
    pub ball_eigenvalues: Vec<f64>,
    pub theta_eigenvalues: Vec<f64>,
    pub ball_torsion: f64,
    pub ball_sup_w: f64,
    pub theta_torsion: f64,
    pub theta_sup_w: f64,
    pub theta_boundary_gradient: f64,
}

impl Reference {
    /// Reference data at volume `ω_d`, eigenvalues up to `k`.
    pub fn new(dim: usize, k: usize) -> Result<Self> {
        Self::with_volume(dim, unit_ball_volume(dim), k)
    }

    pub fn with_volume(dim: usize, volume: f64, k: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Reference {
            dim,
            volume,
            ball_eigenvalues: ball_spectrum(dim, volume, k)?,
            theta_eigenvalues: theta_spectrum(dim, volume, k)?,
            ball_torsion: ball_torsion(dim, volume),
            ball_sup_w: ball_torsion_sup(dim, volume),
            theta_torsion: theta_torsion(dim, volume),
            theta_sup_w: ball_torsion_sup(dim, volume / 2.0),
            theta_boundary_gradient: ball_boundary_gradient(dim, volume / 2.0),
        })
    }

    /// `λ_k(B)` with `k` starting at 1.
    pub fn ball(&self, k: usize) -> f64 {
        self.ball_eigenvalues[k - 1]
    }

    /// `λ_k(Θ)` with `k` starting at 1.
    pub fn theta(&self, k: usize) -> f64 {
        self.theta_eigenvalues[k - 1]
    }
}
