//! Analytic shapes with closed-form measures.
//!
//! Shapes are rasterized onto grids by [`GridDomain::rasterize`](super::GridDomain::rasterize).
//! Every variant knows its exact measure so that volume normalization is
//! done on the parameters, never on the masks.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 3];

/// Measure of the unit ball in dimension `dim`.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => panic!("unsupported dimension {dim}"),
    }
}

pub(crate) mod point_serde {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    use super::Point;

    pub fn serialize<S: Serializer>(p: &Point, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(p.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Point, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        match v.len() {
            2 => Ok([v[0], v[1], 0.0]),
            3 => Ok([v[0], v[1], v[2]]),
            n => Err(D::Error::custom(format!("expected 2 or 3 coordinates, got {n}"))),
        }
    }
}

fn zero() -> Point {
    [0.0; 3]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Shape {
    Ball {
        #[serde(with = "point_serde", default = "zero")]
        center: Point,
        radius: f64,
    },
    /// Ellipse (2D) or ellipsoid (3D), rotated by `angle` radians in the xy-plane.
    Ellipsoid {
        #[serde(with = "point_serde", default = "zero")]
        center: Point,
        #[serde(with = "point_serde")]
        semi_axes: Point,
        #[serde(default)]
        angle: f64,
    },
    /// Axis-aligned rectangle or box.
    Cuboid {
        #[serde(with = "point_serde")]
        min: Point,
        #[serde(with = "point_serde")]
        max: Point,
    },
    /// Simple polygon, 2D only.
    Polygon { vertices: Vec<[f64; 2]> },
    /// Segment `[-half_length, half_length]` on the x axis thickened by `radius`.
    Stadium {
        #[serde(with = "point_serde", default = "zero")]
        center: Point,
        half_length: f64,
        radius: f64,
    },
    Annulus {
        #[serde(with = "point_serde", default = "zero")]
        center: Point,
        inner: f64,
        outer: f64,
    },
    /// Two equal balls centered at `(±separation/2, 0)` joined by a
    /// rectangular neck `|y| ≤ neck_width/2` between the centers. 2D only.
    Dumbbell {
        separation: f64,
        radius: f64,
        neck_width: f64,
    },
    /// Union of two overlapping equal balls at `(±separation/2, 0)`.
    OverlappingBalls { separation: f64, radius: f64 },
    /// Union of pairwise disjoint shapes.
    Union { parts: Vec<Shape> },
    Translated {
        #[serde(with = "point_serde")]
        offset: Point,
        inner: Box<Shape>,
    },
}

impl Shape {
    pub fn ball(center: Point, radius: f64) -> Self {
        Shape::Ball { center, radius }
    }

    pub fn contains(&self, p: &Point, dim: usize) -> bool {
        match self {
            Shape::Ball { center, radius } => dist2(p, center, dim) < radius * radius,
            Shape::Ellipsoid {
                center,
                semi_axes,
                angle,
            } => {
                let (s, c) = angle.sin_cos();
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                let u = c * dx + s * dy;
                let v = -s * dx + c * dy;
                let mut q = (u / semi_axes[0]).powi(2) + (v / semi_axes[1]).powi(2);
                if dim == 3 {
                    q += ((p[2] - center[2]) / semi_axes[2]).powi(2);
                }
                q < 1.0
            }
            Shape::Cuboid { min, max } => (0..dim).all(|i| p[i] > min[i] && p[i] < max[i]),
            Shape::Polygon { vertices } => point_in_polygon(vertices, p[0], p[1]),
            Shape::Stadium {
                center,
                half_length,
                radius,
            } => {
                let mut q = *p;
                for i in 0..3 {
                    q[i] -= center[i];
                }
                q[0] = (q[0].abs() - half_length).max(0.0);
                dist2(&q, &zero(), dim) < radius * radius
            }
            Shape::Annulus {
                center,
                inner,
                outer,
            } => {
                let r2 = dist2(p, center, dim);
                r2 < outer * outer && r2 > inner * inner
            }
            Shape::Dumbbell {
                separation,
                radius,
                neck_width,
            } => {
                let c = separation / 2.0;
                let r2 = radius * radius;
                let left = (p[0] + c).powi(2) + p[1] * p[1] < r2;
                let right = (p[0] - c).powi(2) + p[1] * p[1] < r2;
                let neck = p[0].abs() < c && p[1].abs() < neck_width / 2.0;
                left || right || neck
            }
            Shape::OverlappingBalls { separation, radius } => {
                let c = separation / 2.0;
                let r2 = radius * radius;
                let a = [p[0] + c, p[1], p[2]];
                let b = [p[0] - c, p[1], p[2]];
                dist2(&a, &zero(), dim) < r2 || dist2(&b, &zero(), dim) < r2
            }
            Shape::Union { parts } => parts.iter().any(|s| s.contains(p, dim)),
            Shape::Translated { offset, inner } => {
                let q = [p[0] - offset[0], p[1] - offset[1], p[2] - offset[2]];
                inner.contains(&q, dim)
            }
        }
    }

    /// Exact measure in dimension `dim`.
    pub fn volume(&self, dim: usize) -> Result<f64> {
        check_dim(dim)?;
        let v = match self {
            Shape::Ball { radius, .. } => unit_ball_volume(dim) * radius.powi(dim as i32),
            Shape::Ellipsoid { semi_axes, .. } => {
                unit_ball_volume(dim) * semi_axes[..dim].iter().product::<f64>()
            }
            Shape::Cuboid { min, max } => (0..dim).map(|i| (max[i] - min[i]).max(0.0)).product(),
            Shape::Polygon { vertices } => {
                if dim != 2 {
                    return Err(Error::Argument("polygons are two-dimensional".into()));
                }
                polygon_area(vertices)
            }
            Shape::Stadium {
                half_length,
                radius,
                ..
            } => match dim {
                2 => 4.0 * half_length * radius + PI * radius * radius,
                _ => 2.0 * half_length * PI * radius * radius + 4.0 / 3.0 * PI * radius.powi(3),
            },
            Shape::Annulus { inner, outer, .. } => {
                unit_ball_volume(dim) * (outer.powi(dim as i32) - inner.powi(dim as i32))
            }
            Shape::Dumbbell {
                separation,
                radius,
                neck_width,
            } => {
                if dim != 2 {
                    return Err(Error::Argument("dumbbell is two-dimensional".into()));
                }
                let a = neck_width / 2.0;
                let c = separation / 2.0;
                // Neck area outside the two disks: ∫_{-a}^{a} 2(c - sqrt(r² - y²)) dy.
                let r = *radius;
                let chord = a * (r * r - a * a).sqrt() + r * r * (a / r).asin();
                2.0 * PI * r * r + 4.0 * c * a - 2.0 * chord
            }
            Shape::OverlappingBalls { separation, radius } => {
                let r = *radius;
                let d = separation.min(2.0 * r);
                let lens = match dim {
                    2 => 2.0 * r * r * (d / (2.0 * r)).acos() - 0.5 * d * (4.0 * r * r - d * d).sqrt(),
                    _ => PI * (4.0 * r + d) * (2.0 * r - d).powi(2) / 12.0,
                };
                2.0 * unit_ball_volume(dim) * r.powi(dim as i32) - lens
            }
            Shape::Union { parts } => {
                let mut total = 0.0;
                for s in parts {
                    total += s.volume(dim)?;
                }
                total
            }
            Shape::Translated { inner, .. } => inner.volume(dim)?,
        };
        Ok(v)
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self, dim: usize) -> (Point, Point) {
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        match self {
            Shape::Ball { center, radius } => {
                for i in 0..dim {
                    lo[i] = center[i] - radius;
                    hi[i] = center[i] + radius;
                }
            }
            Shape::Ellipsoid {
                center, semi_axes, ..
            } => {
                // Rotation-agnostic bound.
                let r = semi_axes[..dim].iter().cloned().fold(0.0, f64::max);
                for i in 0..dim {
                    lo[i] = center[i] - r;
                    hi[i] = center[i] + r;
                }
            }
            Shape::Cuboid { min, max } => {
                lo[..dim].copy_from_slice(&min[..dim]);
                hi[..dim].copy_from_slice(&max[..dim]);
            }
            Shape::Polygon { vertices } => {
                lo = [f64::INFINITY, f64::INFINITY, 0.0];
                hi = [f64::NEG_INFINITY, f64::NEG_INFINITY, 0.0];
                for v in vertices {
                    for i in 0..2 {
                        lo[i] = lo[i].min(v[i]);
                        hi[i] = hi[i].max(v[i]);
                    }
                }
            }
            Shape::Stadium {
                center,
                half_length,
                radius,
            } => {
                for i in 0..dim {
                    let ext = if i == 0 { half_length + radius } else { *radius };
                    lo[i] = center[i] - ext;
                    hi[i] = center[i] + ext;
                }
            }
            Shape::Annulus { center, outer, .. } => {
                for i in 0..dim {
                    lo[i] = center[i] - outer;
                    hi[i] = center[i] + outer;
                }
            }
            Shape::Dumbbell {
                separation, radius, ..
            }
            | Shape::OverlappingBalls { separation, radius } => {
                lo[0] = -separation / 2.0 - radius;
                hi[0] = separation / 2.0 + radius;
                for i in 1..dim {
                    lo[i] = -radius;
                    hi[i] = *radius;
                }
            }
            Shape::Union { parts } => {
                lo = [f64::INFINITY; 3];
                hi = [f64::NEG_INFINITY; 3];
                for s in parts {
                    let (a, b) = s.bounding_box(dim);
                    for i in 0..dim {
                        lo[i] = lo[i].min(a[i]);
                        hi[i] = hi[i].max(b[i]);
                    }
                }
                for i in dim..3 {
                    lo[i] = 0.0;
                    hi[i] = 0.0;
                }
            }
            Shape::Translated { offset, inner } => {
                let (a, b) = inner.bounding_box(dim);
                for i in 0..dim {
                    lo[i] = a[i] + offset[i];
                    hi[i] = b[i] + offset[i];
                }
            }
        }
        (lo, hi)
    }

    /// Homothety about the origin.
    pub fn scaled(&self, f: f64) -> Shape {
        let sp = |p: &Point| [p[0] * f, p[1] * f, p[2] * f];
        match self {
            Shape::Ball { center, radius } => Shape::Ball {
                center: sp(center),
                radius: radius * f,
            },
            Shape::Ellipsoid {
                center,
                semi_axes,
                angle,
            } => Shape::Ellipsoid {
                center: sp(center),
                semi_axes: sp(semi_axes),
                angle: *angle,
            },
            Shape::Cuboid { min, max } => Shape::Cuboid {
                min: sp(min),
                max: sp(max),
            },
            Shape::Polygon { vertices } => Shape::Polygon {
                vertices: vertices.iter().map(|v| [v[0] * f, v[1] * f]).collect(),
            },
            Shape::Stadium {
                center,
                half_length,
                radius,
            } => Shape::Stadium {
                center: sp(center),
                half_length: half_length * f,
                radius: radius * f,
            },
            Shape::Annulus {
                center,
                inner,
                outer,
            } => Shape::Annulus {
                center: sp(center),
                inner: inner * f,
                outer: outer * f,
            },
            Shape::Dumbbell {
                separation,
                radius,
                neck_width,
            } => Shape::Dumbbell {
                separation: separation * f,
                radius: radius * f,
                neck_width: neck_width * f,
            },
            Shape::OverlappingBalls { separation, radius } => Shape::OverlappingBalls {
                separation: separation * f,
                radius: radius * f,
            },
            Shape::Union { parts } => Shape::Union {
                parts: parts.iter().map(|s| s.scaled(f)).collect(),
            },
            Shape::Translated { offset, inner } => Shape::Translated {
                offset: sp(offset),
                inner: Box::new(inner.scaled(f)),
            },
        }
    }

    /// Rescale so that the measure equals `target`.
    pub fn normalized_to(&self, dim: usize, target: f64) -> Result<Shape> {
        let v = self.volume(dim)?;
        if !(v > 0.0) {
            return Err(Error::DegenerateDomain("shape has zero measure".into()));
        }
        Ok(self.scaled((target / v).powf(1.0 / dim as f64)))
    }

    /// Rescale to the measure of the unit ball.
    pub fn normalized(&self, dim: usize) -> Result<Shape> {
        self.normalized_to(dim, unit_ball_volume(dim))
    }

    /// Translation by `v`.
    pub fn translated(&self, v: Point) -> Shape {
        let tp = |p: &Point| [p[0] + v[0], p[1] + v[1], p[2] + v[2]];
        match self {
            Shape::Ball { center, radius } => Shape::Ball {
                center: tp(center),
                radius: *radius,
            },
            Shape::Ellipsoid {
                center,
                semi_axes,
                angle,
            } => Shape::Ellipsoid {
                center: tp(center),
                semi_axes: *semi_axes,
                angle: *angle,
            },
            Shape::Cuboid { min, max } => Shape::Cuboid {
                min: tp(min),
                max: tp(max),
            },
            Shape::Polygon { vertices } => Shape::Polygon {
                vertices: vertices.iter().map(|p| [p[0] + v[0], p[1] + v[1]]).collect(),
            },
            Shape::Stadium {
                center,
                half_length,
                radius,
            } => Shape::Stadium {
                center: tp(center),
                half_length: *half_length,
                radius: *radius,
            },
            Shape::Annulus {
                center,
                inner,
                outer,
            } => Shape::Annulus {
                center: tp(center),
                inner: *inner,
                outer: *outer,
            },
            Shape::Union { parts } => Shape::Union {
                parts: parts.iter().map(|s| s.translated(v)).collect(),
            },
            Shape::Translated { offset, inner } => Shape::Translated {
                offset: tp(offset),
                inner: inner.clone(),
            },
            Shape::Dumbbell { .. } | Shape::OverlappingBalls { .. } => Shape::Translated {
                offset: v,
                inner: Box::new(self.clone()),
            },
        }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(Error::Argument(format!("dimension must be 2 or 3, got {dim}")))
    }
}

fn dist2(a: &Point, b: &Point, dim: usize) -> f64 {
    (0..dim).map(|i| (a[i] - b[i]).powi(2)).sum()
}

fn polygon_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        let j = (i + 1) % n;
        s += v[i][0] * v[j][1] - v[j][0] * v[i][1];
    }
    0.5 * s.abs()
}

fn point_in_polygon(v: &[[f64; 2]], x: f64, y: f64) -> bool {
    let n = v.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = (v[i][0], v[i][1]);
        let (xj, yj) = (v[j][0], v[j][1]);
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}
