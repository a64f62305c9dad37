use serde::{Deserialize, Serialize};

use super::shape::{Point, Shape};
use crate::error::{Error, Result};

/// Placement of a finite box of cells on the global lattice of spacing `h`.
///
/// Cell `(i, j, l)` of the frame has its center at
/// `((offset + (i, j, l)) + 1/2) · h`, so frames with equal `h` share cell
/// centers and can be re-indexed into each other exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFrame {
    pub dim: usize,
    pub h: f64,
    pub offset: [i64; 3],
    pub extent: [usize; 3],
}

impl GridFrame {
    /// Smallest frame whose cell centers cover `[lo, hi]` plus `pad` cells on each side.
    pub fn covering(dim: usize, h: f64, lo: &Point, hi: &Point, pad: usize) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Argument(format!("grid spacing must be positive, got {h}")));
        }
        if dim != 2 && dim != 3 {
            return Err(Error::Argument(format!("dimension must be 2 or 3, got {dim}")));
        }
        let mut offset = [0i64; 3];
        let mut extent = [1usize; 3];
        for a in 0..dim {
            let first = (lo[a] / h - 0.5).floor() as i64 - pad as i64;
            let last = (hi[a] / h - 0.5).ceil() as i64 + pad as i64;
            offset[a] = first;
            extent[a] = (last - first + 1) as usize;
        }
        Ok(GridFrame {
            dim,
            h,
            offset,
            extent,
        })
    }

    pub fn len(&self) -> usize {
        self.extent.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn strides(&self) -> [usize; 3] {
        [1, self.extent[0], self.extent[0] * self.extent[1]]
    }

    pub fn index(&self, c: [usize; 3]) -> usize {
        c[0] + self.extent[0] * (c[1] + self.extent[1] * c[2])
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.extent[0];
        let r = idx / self.extent[0];
        [i, r % self.extent[1], r / self.extent[1]]
    }

    pub fn center(&self, idx: usize) -> Point {
        let c = self.coords(idx);
        let mut p = [0.0; 3];
        for a in 0..self.dim {
            p[a] = ((self.offset[a] + c[a] as i64) as f64 + 0.5) * self.h;
        }
        p
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    /// True when `idx` touches the outer layer of the frame.
    pub fn on_rim(&self, idx: usize) -> bool {
        let c = self.coords(idx);
        (0..self.dim).any(|a| c[a] == 0 || c[a] + 1 == self.extent[a])
    }

    /// Lattice neighbors along the 2·dim axis directions (`None` outside the frame).
    pub fn neighbors(&self, idx: usize) -> impl Iterator<Item = Option<usize>> + '_ {
        let c = self.coords(idx);
        let s = self.strides();
        (0..2 * self.dim).map(move |d| {
            let a = d / 2;
            if d % 2 == 0 {
                (c[a] + 1 < self.extent[a]).then(|| idx + s[a])
            } else {
                (c[a] > 0).then(|| idx - s[a])
            }
        })
    }

    pub fn compatible(&self, other: &GridFrame) -> bool {
        self.dim == other.dim && self.h == other.h
    }

    /// Smallest frame containing both.
    pub fn union(&self, other: &GridFrame) -> Result<GridFrame> {
        if !self.compatible(other) {
            return Err(Error::GridMismatch(format!(
                "spacing/dimension differ: ({}, h={}) vs ({}, h={})",
                self.dim, self.h, other.dim, other.h
            )));
        }
        let mut offset = [0i64; 3];
        let mut extent = [1usize; 3];
        for a in 0..self.dim {
            let lo = self.offset[a].min(other.offset[a]);
            let hi = (self.offset[a] + self.extent[a] as i64).max(other.offset[a] + other.extent[a] as i64);
            offset[a] = lo;
            extent[a] = (hi - lo) as usize;
        }
        Ok(GridFrame {
            dim: self.dim,
            h: self.h,
            offset,
            extent,
        })
    }
}

/// An open set represented by the cells of a frame whose centers lie inside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDomain {
    frame: GridFrame,
    mask: Vec<bool>,
    label: String,
}

impl GridDomain {
    /// Cell-center rasterization on a frame fitted to the shape plus two cells.
    pub fn rasterize(shape: &Shape, dim: usize, h: f64, label: impl Into<String>) -> Result<Self> {
        let (lo, hi) = shape.bounding_box(dim);
        let frame = GridFrame::covering(dim, h, &lo, &hi, 2)?;
        let d = Self::rasterize_in(shape, &frame, label);
        if d.is_empty() {
            return Err(Error::DegenerateDomain(format!(
                "`{}` has no interior cell at h = {h}",
                d.label
            )));
        }
        Ok(d)
    }

    /// Rasterize on a prescribed frame. Cells on the frame rim are never interior.
    pub fn rasterize_in(shape: &Shape, frame: &GridFrame, label: impl Into<String>) -> Self {
        let dim = frame.dim;
        let mask = (0..frame.len())
            .map(|i| !frame.on_rim(i) && shape.contains(&frame.center(i), dim))
            .collect();
        GridDomain {
            frame: frame.clone(),
            mask,
            label: label.into(),
        }
    }

    pub fn from_mask(frame: GridFrame, mask: Vec<bool>, label: impl Into<String>) -> Result<Self> {
        if mask.len() != frame.len() {
            return Err(Error::Argument(format!(
                "mask has {} cells, frame has {}",
                mask.len(),
                frame.len()
            )));
        }
        if mask.iter().enumerate().any(|(i, &m)| m && frame.on_rim(i)) {
            return Err(Error::Argument("interior cells must not touch the frame rim".into()));
        }
        Ok(GridDomain {
            frame,
            mask,
            label: label.into(),
        })
    }

    pub fn frame(&self) -> &GridFrame {
        &self.frame
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.frame.dim
    }

    pub fn h(&self) -> f64 {
        self.frame.h
    }

    pub fn cell_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&m| m)
    }

    pub fn measure(&self) -> f64 {
        self.cell_count() as f64 * self.frame.cell_volume()
    }

    /// Frame indices of interior cells, in lattice order.
    pub fn interior(&self) -> Vec<usize> {
        (0..self.mask.len()).filter(|&i| self.mask[i]).collect()
    }

    pub fn ensure_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::DegenerateDomain(format!("`{}` is empty", self.label)))
        } else {
            Ok(())
        }
    }

    fn check_same_frame(&self, other: &GridDomain) -> Result<()> {
        if self.frame != other.frame {
            return Err(Error::GridMismatch(format!(
                "`{}` and `{}` live on different frames; embed them on a common frame first",
                self.label, other.label
            )));
        }
        Ok(())
    }

    fn combine(&self, other: &GridDomain, op: impl Fn(bool, bool) -> bool, sym: &str) -> Result<GridDomain> {
        self.check_same_frame(other)?;
        let mask = self.mask.iter().zip(&other.mask).map(|(&a, &b)| op(a, b)).collect();
        Ok(GridDomain {
            frame: self.frame.clone(),
            mask,
            label: format!("({} {sym} {})", self.label, other.label),
        })
    }

    pub fn intersect(&self, other: &GridDomain) -> Result<GridDomain> {
        self.combine(other, |a, b| a && b, "∩")
    }

    pub fn union(&self, other: &GridDomain) -> Result<GridDomain> {
        self.combine(other, |a, b| a || b, "∪")
    }

    pub fn set_minus(&self, other: &GridDomain) -> Result<GridDomain> {
        self.combine(other, |a, b| a && !b, "∖")
    }

    pub fn symm_diff_measure(&self, other: &GridDomain) -> Result<f64> {
        self.check_same_frame(other)?;
        let n = self.mask.iter().zip(&other.mask).filter(|(a, b)| a != b).count();
        Ok(n as f64 * self.frame.cell_volume())
    }

    /// Re-index onto `frame` (same spacing). Fails if an interior cell would
    /// land outside the frame or on its rim.
    pub fn embed(&self, frame: &GridFrame) -> Result<GridDomain> {
        if !self.frame.compatible(frame) {
            return Err(Error::GridMismatch(format!(
                "cannot embed `{}` (h={}) into frame with h={}",
                self.label, self.frame.h, frame.h
            )));
        }
        let mut mask = vec![false; frame.len()];
        for idx in self.interior() {
            let c = self.frame.coords(idx);
            let mut t = [0usize; 3];
            for a in 0..frame.dim {
                let g = self.frame.offset[a] + c[a] as i64 - frame.offset[a];
                if g < 1 || g + 1 >= frame.extent[a] as i64 {
                    return Err(Error::GridMismatch(format!(
                        "`{}` does not fit in the target frame",
                        self.label
                    )));
                }
                t[a] = g as usize;
            }
            mask[frame.index(t)] = true;
        }
        Ok(GridDomain {
            frame: frame.clone(),
            mask,
            label: self.label.clone(),
        })
    }

    /// Both domains re-indexed onto the union of their frames.
    pub fn align(a: &GridDomain, b: &GridDomain) -> Result<(GridDomain, GridDomain)> {
        let f = a.frame.union(&b.frame)?;
        Ok((a.embed(&f)?, b.embed(&f)?))
    }

    /// Centroid of the interior cells.
    pub fn centroid(&self) -> Point {
        let mut s = [0.0; 3];
        let mut n = 0usize;
        for idx in self.interior() {
            let p = self.frame.center(idx);
            for a in 0..3 {
                s[a] += p[a];
            }
            n += 1;
        }
        if n > 0 {
            for v in &mut s {
                *v /= n as f64;
            }
        }
        s
    }

    /// Direction of largest spread of the interior cells.
    pub fn principal_axis(&self) -> Point {
        let c = self.centroid();
        let dim = self.dim();
        let mut cov = nalgebra::DMatrix::<f64>::zeros(dim, dim);
        for idx in self.interior() {
            let p = self.frame.center(idx);
            for a in 0..dim {
                for b in 0..dim {
                    cov[(a, b)] += (p[a] - c[a]) * (p[b] - c[b]);
                }
            }
        }
        let eig = nalgebra::SymmetricEigen::new(cov);
        let (imax, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let mut axis = [0.0; 3];
        for a in 0..dim {
            axis[a] = eig.eigenvectors[(a, imax)];
        }
        // Fix the sign so the result is deterministic.
        let lead = (0..dim).find(|&a| axis[a].abs() > 1e-12).unwrap_or(0);
        if axis[lead] < 0.0 {
            for v in &mut axis {
                *v = -*v;
            }
        }
        axis
    }

    /// Binary greymap (P5). 3D masks are written as the stack of z-slices.
    pub fn to_pgm(&self) -> Vec<u8> {
        let [nx, ny, nz] = self.frame.extent;
        let mut out = format!("P5\n{} {}\n255\n", nx, ny * nz).into_bytes();
        for l in 0..nz {
            // Top row of the image is the largest y.
            for j in (0..ny).rev() {
                for i in 0..nx {
                    let m = self.mask[self.frame.index([i, j, l])];
                    out.push(if m { 255 } else { 0 });
                }
            }
        }
        out
    }
}
