//! Rasterized open sets, canonical domains and their measures.

mod family;
mod grid;
mod shape;

pub use family::{domain_family, domain_family_dim, Family};
pub use grid::{GridDomain, GridFrame};
pub use shape::{unit_ball_volume, Point, Shape};

pub(crate) use shape::point_serde;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two equal balls of half the reference measure; the set Θ when disjoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoBallConfig {
    pub dim: usize,
    #[serde(with = "point_serde")]
    pub center1: Point,
    #[serde(with = "point_serde")]
    pub center2: Point,
    pub radius: f64,
}

impl TwoBallConfig {
    /// Balls with total measure `total` placed at the given centers.
    pub fn new(dim: usize, center1: Point, center2: Point, total: f64) -> Result<Self> {
        let radius = (total / 2.0 / unit_ball_volume(dim)).powf(1.0 / dim as f64);
        let c = TwoBallConfig {
            dim,
            center1,
            center2,
            radius,
        };
        c.validate()?;
        Ok(c)
    }

    /// The reference Θ (total measure ω_d) with centers at `(±separation/2, 0)`.
    pub fn theta(dim: usize, separation: f64) -> Result<Self> {
        Self::new(
            dim,
            [-separation / 2.0, 0.0, 0.0],
            [separation / 2.0, 0.0, 0.0],
            unit_ball_volume(dim),
        )
    }

    pub fn distance(&self) -> f64 {
        (0..self.dim)
            .map(|a| (self.center1[a] - self.center2[a]).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn ball_volume(&self) -> f64 {
        unit_ball_volume(self.dim) * self.radius.powi(self.dim as i32)
    }

    /// Tangent balls are allowed.
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) {
            return Err(Error::InvalidConfig(format!("radius must be positive, got {}", self.radius)));
        }
        let d = self.distance();
        if d < 2.0 * self.radius * (1.0 - 1e-12) {
            return Err(Error::InvalidConfig(format!(
                "balls overlap: center distance {d:.6} < 2r = {:.6}",
                2.0 * self.radius
            )));
        }
        Ok(())
    }

    pub fn shape(&self) -> Shape {
        Shape::Union {
            parts: vec![
                Shape::ball(self.center1, self.radius),
                Shape::ball(self.center2, self.radius),
            ],
        }
    }
}

fn point_from(c: &[f64]) -> Result<(usize, Point)> {
    match c.len() {
        2 => Ok((2, [c[0], c[1], 0.0])),
        3 => Ok((3, [c[0], c[1], c[2]])),
        n => Err(Error::Argument(format!("center must have 2 or 3 coordinates, got {n}"))),
    }
}

/// Rasterized ball; the dimension is taken from `center`.
pub fn make_ball(radius: f64, center: &[f64], h: f64) -> Result<GridDomain> {
    let (dim, c) = point_from(center)?;
    if !(radius > 2.0 * h) {
        return Err(Error::DegenerateDomain(format!(
            "ball radius {radius} must exceed two cells (h = {h})"
        )));
    }
    GridDomain::rasterize(&Shape::ball(c, radius), dim, h, format!("ball(r={radius})"))
}

pub fn make_theta(config: &TwoBallConfig, h: f64) -> Result<GridDomain> {
    config.validate()?;
    if !(config.radius > 2.0 * h) {
        return Err(Error::DegenerateDomain(format!(
            "ball radius {} must exceed two cells (h = {h})",
            config.radius
        )));
    }
    GridDomain::rasterize(&config.shape(), config.dim, h, "theta")
}
