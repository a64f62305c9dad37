use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::grid::GridDomain;
use super::shape::{unit_ball_volume, Shape};
use crate::error::{Error, Result};

/// Center separation used by every two-ball family.
pub const FAMILY_SEPARATION: f64 = 3.0;

/// Parametric deformations of Θ, each normalized to the measure of the unit ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Balls of measures `(1/2 + t)ω_d` and `(1/2 - t)ω_d`.
    VolumeSplit,
    /// One ball replaced by the equal-measure ellipse of aspect ratio `1 + t`.
    EllipsePair,
    /// The two balls of Θ joined by a neck of width `t`, then rescaled.
    DumbbellNeck,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::VolumeSplit, Family::EllipsePair, Family::DumbbellNeck];

    pub fn name(&self) -> &'static str {
        match self {
            Family::VolumeSplit => "volume-split",
            Family::EllipsePair => "ellipse-pair",
            Family::DumbbellNeck => "dumbbell-neck",
        }
    }

    /// Admissible parameter interval, closed on the left.
    pub fn range(&self) -> (f64, f64) {
        match self {
            Family::VolumeSplit => (0.0, 0.5),
            Family::EllipsePair => (0.0, 3.0),
            Family::DumbbellNeck => (0.0, 1.0),
        }
    }

    pub fn shape(&self, t: f64, dim: usize) -> Result<Shape> {
        let (lo, hi) = self.range();
        if !(t >= lo && t < hi) {
            return Err(Error::OutOfRange(format!(
                "{} parameter t = {t} outside [{lo}, {hi})",
                self.name()
            )));
        }
        let wd = unit_ball_volume(dim);
        let half = FAMILY_SEPARATION / 2.0;
        let c1 = [-half, 0.0, 0.0];
        let c2 = [half, 0.0, 0.0];
        let radius_for = |fraction: f64| (fraction).powf(1.0 / dim as f64);
        let shape = match self {
            Family::VolumeSplit => Shape::Union {
                parts: vec![
                    Shape::ball(c1, radius_for(0.5 + t)),
                    Shape::ball(c2, radius_for(0.5 - t)),
                ],
            },
            Family::EllipsePair => {
                let r = radius_for(0.5);
                let aspect = 1.0 + t;
                let semi_axes = if dim == 2 {
                    [r * aspect.sqrt(), r / aspect.sqrt(), 0.0]
                } else {
                    let b = r * aspect.powf(-1.0 / 3.0);
                    [b * aspect, b, b]
                };
                Shape::Union {
                    parts: vec![
                        Shape::Ellipsoid {
                            center: c1,
                            semi_axes,
                            angle: 0.0,
                        },
                        Shape::ball(c2, r),
                    ],
                }
            }
            Family::DumbbellNeck => {
                if dim != 2 {
                    return Err(Error::Argument("dumbbell-neck is two-dimensional".into()));
                }
                let base = Shape::Dumbbell {
                    separation: FAMILY_SEPARATION,
                    radius: radius_for(0.5),
                    neck_width: t,
                };
                base.normalized_to(dim, wd)?
            }
        };
        Ok(shape)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown family `{s}`")))
    }
}

/// Planar family member rasterized at spacing `h`.
pub fn domain_family(name: &str, t: f64, h: f64) -> Result<GridDomain> {
    domain_family_dim(name, t, h, 2)
}

pub fn domain_family_dim(name: &str, t: f64, h: f64, dim: usize) -> Result<GridDomain> {
    let family: Family = name.parse()?;
    let shape = family.shape(t, dim)?;
    GridDomain::rasterize(&shape, dim, h, format!("{name}(t={t})"))
}
