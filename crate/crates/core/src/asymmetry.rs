//! Fraenkel asymmetries: distance of a domain to the best ball and to the
//! best pair of disjoint half-measure balls, in normalized symmetric-difference
//! measure.
//!
//! Ball measures are counted on the infinite lattice of the domain's spacing,
//! so a witness ball never has to fit inside the domain's frame.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{unit_ball_volume, GridDomain, Point, TwoBallConfig};

/// A single ball of the domain's measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallWitness {
    pub center: Point,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    Ball(BallWitness),
    TwoBalls(TwoBallConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iterate: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryResult {
    pub value: f64,
    pub witness: Witness,
    pub trace: Vec<TraceEntry>,
    /// Set when an iterate was clamped to the search box (twice the domain's extent).
    pub hit_bounds: bool,
}

impl AsymmetryResult {
    pub fn two_balls(&self) -> Option<&TwoBallConfig> {
        match &self.witness {
            Witness::TwoBalls(c) => Some(c),
            Witness::Ball(_) => None,
        }
    }
}

/// Lattice view of a domain used by the objectives.
struct Lattice<'a> {
    omega: &'a GridDomain,
    dim: usize,
    h: f64,
    measure: f64,
}

impl<'a> Lattice<'a> {
    fn new(omega: &'a GridDomain) -> Self {
        Lattice {
            omega,
            dim: omega.dim(),
            h: omega.h(),
            measure: omega.measure(),
        }
    }

    /// Whether global lattice cell `g` is an interior cell of the domain.
    fn inside(&self, g: [i64; 3]) -> bool {
        let f = self.omega.frame();
        let mut c = [0usize; 3];
        for a in 0..self.dim {
            let l = g[a] - f.offset[a];
            if l < 0 || l >= f.extent[a] as i64 {
                return false;
            }
            c[a] = l as usize;
        }
        self.omega.mask()[f.index(c)]
    }

    /// Calls `visit(cell, center)` for every lattice cell whose center lies
    /// within `reach` of `center`.
    fn for_cells_near(&self, center: &Point, reach: f64, mut visit: impl FnMut([i64; 3], f64)) {
        let h = self.h;
        let mut lo = [0i64; 3];
        let mut hi = [0i64; 3];
        for a in 0..self.dim {
            lo[a] = ((center[a] - reach) / h - 0.5).floor() as i64;
            hi[a] = ((center[a] + reach) / h - 0.5).ceil() as i64;
        }
        let zr = if self.dim == 3 { lo[2]..=hi[2] } else { 0..=0 };
        for k in zr {
            let dz = if self.dim == 3 { (k as f64 + 0.5) * h - center[2] } else { 0.0 };
            for j in lo[1]..=hi[1] {
                let dy = (j as f64 + 0.5) * h - center[1];
                let base = dy * dy + dz * dz;
                if base > reach * reach {
                    continue;
                }
                for i in lo[0]..=hi[0] {
                    let dx = (i as f64 + 0.5) * h - center[0];
                    let d2 = base + dx * dx;
                    if d2 <= reach * reach {
                        visit([i, j, k], d2.sqrt());
                    }
                }
            }
        }
    }

    /// Antialiased overlap `Σ_Ω coverage` of a ball with the domain.
    fn smooth_overlap(&self, center: &Point, r: f64) -> f64 {
        let mut s = 0.0;
        let h = self.h;
        self.for_cells_near(center, r + 0.5 * h, |g, d| {
            if self.inside(g) {
                s += ((r - d) / h + 0.5).clamp(0.0, 1.0);
            }
        });
        s * h.powi(self.dim as i32)
    }

    /// `(|Ω ∩ U|, |U|)` for the union `U` of balls of radius `r` (cell-center rule).
    fn exact_counts(&self, centers: &[Point], r: f64) -> (usize, usize) {
        let mut inter = 0;
        let mut total = 0;
        for (i, c) in centers.iter().enumerate() {
            self.for_cells_near(c, r, |g, _| {
                let p = [
                    (g[0] as f64 + 0.5) * self.h,
                    (g[1] as f64 + 0.5) * self.h,
                    (g[2] as f64 + 0.5) * self.h,
                ];
                let earlier = centers[..i].iter().any(|e| dist(&p, e, self.dim) <= r);
                if !earlier {
                    total += 1;
                    if self.inside(g) {
                        inter += 1;
                    }
                }
            });
        }
        (inter, total)
    }

    /// `|Ω Δ U| / |Ω|` on the lattice.
    fn exact_value(&self, centers: &[Point], r: f64) -> f64 {
        let (inter, total) = self.exact_counts(centers, r);
        let n = self.omega.cell_count();
        (n + total - 2 * inter) as f64 / n as f64
    }
}

fn dist(a: &Point, b: &Point, dim: usize) -> f64 {
    (0..dim).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt()
}

/// Axis-aligned search box: the domain's bounding box doubled about its center.
#[derive(Debug, Clone)]
struct SearchBox {
    lo: Point,
    hi: Point,
}

impl SearchBox {
    fn new(omega: &GridDomain) -> Self {
        let f = omega.frame();
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for idx in omega.interior() {
            let p = f.center(idx);
            for a in 0..f.dim {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        for a in 0..3 {
            if a >= f.dim {
                lo[a] = 0.0;
                hi[a] = 0.0;
                continue;
            }
            let c = 0.5 * (lo[a] + hi[a]);
            let half = (hi[a] - lo[a]).max(f.h);
            lo[a] = c - half;
            hi[a] = c + half;
        }
        SearchBox { lo, hi }
    }

    /// Clamp a point; returns true if it moved.
    fn clamp(&self, p: &mut Point, dim: usize) -> bool {
        let mut hit = false;
        for a in 0..dim {
            if p[a] < self.lo[a] {
                p[a] = self.lo[a];
                hit = true;
            } else if p[a] > self.hi[a] {
                p[a] = self.hi[a];
                hit = true;
            }
        }
        hit
    }
}

/// Nelder-Mead minimization; stops when the simplex diameter drops below `xtol`.
fn nelder_mead(f: &mut dyn FnMut(&[f64]) -> f64, x0: &[f64], step: f64, xtol: f64, max_iter: usize) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = f(&x);
        simplex.push((x, v));
    }
    let order = |s: &mut Vec<(Vec<f64>, f64)>| {
        s.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal)))
    };
    for _ in 0..max_iter {
        order(&mut simplex);
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        if diameter < xtol {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect() };
        let xr = along(1.0);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let x = along(0.5);
                let v = f(&x);
                (x, v)
            } else {
                let x = along(-0.5);
                let v = f(&x);
                (x, v)
            };
            if fc < worst.1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for s in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = s.0.iter().zip(&best).map(|(a, b)| b + 0.5 * (a - b)).collect();
                    let v = f(&x);
                    *s = (x, v);
                }
            }
        }
    }
    order(&mut simplex);
    simplex.swap_remove(0)
}

fn to_point(x: &[f64]) -> Point {
    let mut p = [0.0; 3];
    p[..x.len()].copy_from_slice(x);
    p
}

/// Compass search on the exact objective with steps `h/2, h/4, h/8`.
fn polish(f: &mut dyn FnMut(&[f64]) -> Option<f64>, x: &mut Vec<f64>, value: &mut f64, h: f64) {
    let mut step = h / 2.0;
    while step >= h / 8.0 {
        let mut improved = true;
        while improved {
            improved = false;
            for i in 0..x.len() {
                for s in [step, -step] {
                    let mut y = x.clone();
                    y[i] += s;
                    if let Some(v) = f(&y) {
                        if v < *value - 1e-15 {
                            *x = y;
                            *value = v;
                            improved = true;
                        }
                    }
                }
            }
        }
        step /= 2.0;
    }
}

fn lexi_better(a: &(f64, Vec<f64>), b: &(f64, Vec<f64>)) -> bool {
    match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => a.1.partial_cmp(&b.1) == Some(std::cmp::Ordering::Less),
    }
}

/// Normalized symmetric difference between `omega` and the ball `B(center, r)`.
pub fn asymmetry1_at(omega: &GridDomain, center: &Point, radius: f64) -> f64 {
    Lattice::new(omega).exact_value(&[*center], radius)
}

/// Normalized symmetric difference between `omega` and the two balls of `config`.
pub fn asymmetry2_at(omega: &GridDomain, config: &TwoBallConfig) -> f64 {
    Lattice::new(omega).exact_value(&[config.center1, config.center2], config.radius)
}

/// Lattice of candidate centers covering the domain's bounding box.
fn scan_points(omega: &GridDomain, per_axis: usize) -> Vec<Point> {
    let b = SearchBox::new(omega);
    let dim = omega.dim();
    // The search box is twice the bounding box; scan the inner half.
    let mut lo = [0.0; 3];
    let mut hi = [0.0; 3];
    for a in 0..dim {
        let c = 0.5 * (b.lo[a] + b.hi[a]);
        let half = 0.25 * (b.hi[a] - b.lo[a]);
        lo[a] = c - half;
        hi[a] = c + half;
    }
    let m = per_axis;
    let coord = |a: usize, i: usize| lo[a] + (hi[a] - lo[a]) * (i as f64 + 0.5) / m as f64;
    let mut pts = Vec::new();
    let zn = if dim == 3 { m } else { 1 };
    for k in 0..zn {
        for j in 0..m {
            for i in 0..m {
                let mut p = [coord(0, i), coord(1, j), 0.0];
                if dim == 3 {
                    p[2] = coord(2, k);
                }
                pts.push(p);
            }
        }
    }
    pts
}

/// Fraenkel asymmetry: best ball of measure `|Ω|`.
pub fn fraenkel1(omega: &GridDomain) -> Result<AsymmetryResult> {
    omega.ensure_nonempty()?;
    let lat = Lattice::new(omega);
    let dim = lat.dim;
    let h = lat.h;
    let r = (lat.measure / unit_ball_volume(dim)).powf(1.0 / dim as f64);
    let bx = SearchBox::new(omega);
    let ball_vol = unit_ball_volume(dim) * r.powi(dim as i32);
    let mut hit = false;
    let mut trace = Vec::new();

    let mut seeds: Vec<Point> = vec![omega.centroid()];
    let per_axis = if dim == 2 { 12 } else { 6 };
    let mut scored: Vec<(f64, Point)> = scan_points(omega, per_axis)
        .into_iter()
        .map(|p| (-lat.smooth_overlap(&p, r), p))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.partial_cmp(&b.1).unwrap()));
    seeds.extend(scored.iter().take(3).map(|s| s.1));

    let mut best: Option<(f64, Vec<f64>)> = None;
    for seed in seeds {
        let mut smooth = |x: &[f64]| {
            let mut p = to_point(x);
            if bx.clamp(&mut p, dim) {
                hit = true;
            }
            (lat.measure + ball_vol - 2.0 * lat.smooth_overlap(&p, r)) / lat.measure
        };
        let (x, _) = nelder_mead(&mut smooth, &seed[..dim], 0.5 * r, h / 4.0, 500);
        let mut p = to_point(&x);
        bx.clamp(&mut p, dim);
        let mut x = p[..dim].to_vec();
        let mut value = lat.exact_value(&[p], r);
        let mut exact = |y: &[f64]| {
            let mut q = to_point(y);
            if bx.clamp(&mut q, dim) {
                return None;
            }
            Some(lat.exact_value(&[q], r))
        };
        polish(&mut exact, &mut x, &mut value, h);
        trace.push(TraceEntry {
            iterate: x.clone(),
            value,
        });
        let cand = (value, x);
        if best.as_ref().map_or(true, |b| lexi_better(&cand, b)) {
            best = Some(cand);
        }
    }
    let (value, x) = best.expect("at least one start");
    Ok(AsymmetryResult {
        value,
        witness: Witness::Ball(BallWitness {
            center: to_point(&x),
            radius: r,
        }),
        trace,
        hit_bounds: hit,
    })
}

/// Push two centers apart along their axis until the balls are disjoint.
fn separate(c1: &mut Point, c2: &mut Point, r: f64, dim: usize) {
    let d = dist(c1, c2, dim);
    let need = 2.0 * r * (1.0 + 1e-12);
    if d >= need {
        return;
    }
    let mut axis = [1.0, 0.0, 0.0];
    if d > 1e-14 {
        for a in 0..dim {
            axis[a] = (c2[a] - c1[a]) / d;
        }
    }
    let shift = 0.5 * (need - d);
    for a in 0..dim {
        c1[a] -= shift * axis[a];
        c2[a] += shift * axis[a];
    }
}

/// Fraenkel 2-asymmetry: best pair of disjoint balls of measure `|Ω|/2` each.
pub fn fraenkel2(omega: &GridDomain) -> Result<AsymmetryResult> {
    omega.ensure_nonempty()?;
    let lat = Lattice::new(omega);
    let dim = lat.dim;
    let h = lat.h;
    let r = (lat.measure / 2.0 / unit_ball_volume(dim)).powf(1.0 / dim as f64);
    let bx = SearchBox::new(omega);
    let ball_vol = unit_ball_volume(dim) * r.powi(dim as i32);
    let mut hit = false;
    let mut trace = Vec::new();

    // Seeds from the principal-axis split.
    let c = omega.centroid();
    let axis = omega.principal_axis();
    let mut seeds: Vec<(Point, Point)> = Vec::new();
    let (mut s1, mut s2, mut n1, mut n2) = ([0.0; 3], [0.0; 3], 0usize, 0usize);
    let f = omega.frame();
    for idx in omega.interior() {
        let p = f.center(idx);
        let t: f64 = (0..dim).map(|a| (p[a] - c[a]) * axis[a]).sum();
        let (s, n) = if t < 0.0 { (&mut s1, &mut n1) } else { (&mut s2, &mut n2) };
        for a in 0..dim {
            s[a] += p[a];
        }
        *n += 1;
    }
    if n1 > 0 && n2 > 0 {
        for a in 0..dim {
            s1[a] /= n1 as f64;
            s2[a] /= n2 as f64;
        }
        seeds.push((s1, s2));
    }
    let along = |t: f64| {
        let mut p = c;
        for a in 0..dim {
            p[a] += t * axis[a];
        }
        p
    };
    seeds.push((along(-r), along(r)));

    // Exact seeds from a lattice scan: the objective separates over disjoint balls.
    let per_axis = if dim == 2 { 16 } else { 7 };
    let pts = scan_points(omega, per_axis);
    let gains: Vec<f64> = pts.iter().map(|p| lat.smooth_overlap(p, r)).collect();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if dist(&pts[i], &pts[j], dim) >= 2.0 * r {
                pairs.push((-(gains[i] + gains[j]), i, j));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    for &(_, i, j) in pairs.iter().take(3) {
        seeds.push((pts[i], pts[j]));
    }

    let penalty_weight = 10.0 / (r * r);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for (a, b) in seeds {
        let mut x0 = a[..dim].to_vec();
        x0.extend_from_slice(&b[..dim]);
        let mut smooth = |x: &[f64]| {
            let mut p = to_point(&x[..dim]);
            let mut q = to_point(&x[dim..]);
            if bx.clamp(&mut p, dim) | bx.clamp(&mut q, dim) {
                hit = true;
            }
            let overlap = (2.0 * r - dist(&p, &q, dim)).max(0.0);
            (lat.measure + 2.0 * ball_vol - 2.0 * (lat.smooth_overlap(&p, r) + lat.smooth_overlap(&q, r))) / lat.measure
                + penalty_weight * overlap * overlap
        };
        let (x, _) = nelder_mead(&mut smooth, &x0, 0.5 * r, h / 4.0, 1500);
        let mut p = to_point(&x[..dim]);
        let mut q = to_point(&x[dim..]);
        bx.clamp(&mut p, dim);
        bx.clamp(&mut q, dim);
        separate(&mut p, &mut q, r, dim);
        let mut x = p[..dim].to_vec();
        x.extend_from_slice(&q[..dim]);
        let mut value = lat.exact_value(&[p, q], r);
        let mut exact = |y: &[f64]| {
            let mut p = to_point(&y[..dim]);
            let mut q = to_point(&y[dim..]);
            if bx.clamp(&mut p, dim) | bx.clamp(&mut q, dim) {
                return None;
            }
            if dist(&p, &q, dim) < 2.0 * r {
                return None;
            }
            Some(lat.exact_value(&[p, q], r))
        };
        polish(&mut exact, &mut x, &mut value, h);
        // Canonical order of the two centers.
        if x[dim..] < x[..dim] {
            let (l, rr) = x.split_at(dim);
            x = [rr, l].concat();
        }
        trace.push(TraceEntry {
            iterate: x.clone(),
            value,
        });
        let cand = (value, x);
        if best.as_ref().map_or(true, |b| lexi_better(&cand, b)) {
            best = Some(cand);
        }
    }
    let (value, x) = best.expect("at least one start");
    let witness = TwoBallConfig {
        dim,
        center1: to_point(&x[..dim]),
        center2: to_point(&x[dim..]),
        radius: r,
    };
    Ok(AsymmetryResult {
        value,
        witness: Witness::TwoBalls(witness),
        trace,
        hit_bounds: hit,
    })
}
