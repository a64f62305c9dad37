use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::eval::DomainSpec;
use crate::error::{Error, Result};
use crate::geometry::{Family, Shape};

/// A corpus file: a list of `[[domain]]` tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    #[serde(rename = "domain")]
    pub domains: Vec<DomainSpec>,
}

pub fn load_corpus(path: &Path) -> Result<Vec<DomainSpec>> {
    let text = std::fs::read_to_string(path)?;
    let corpus: Corpus =
        toml::from_str(&text).map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
    for d in &corpus.domains {
        d.resolve()?;
    }
    Ok(corpus.domains)
}

fn ellipse(aspect: f64, angle: f64) -> Shape {
    Shape::Ellipsoid {
        center: [0.0; 3],
        semi_axes: [aspect.sqrt(), 1.0 / aspect.sqrt(), 0.0],
        angle,
    }
}

fn rectangle(aspect: f64) -> Shape {
    let a = aspect.sqrt() / 2.0;
    let b = 0.5 / aspect.sqrt();
    Shape::Cuboid {
        min: [-a, -b, 0.0],
        max: [a, b, 0.0],
    }
}

fn regular_polygon(n: usize) -> Shape {
    let vertices = (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64 + 0.5 * PI;
            [t.cos(), t.sin()]
        })
        .collect();
    Shape::Polygon { vertices }
}

fn ball_at(x: f64, y: f64, r: f64) -> Shape {
    Shape::ball([x, y, 0.0], r)
}

/// Balls of the given areas (fractions of the total) on a line, three radii apart.
fn balls_in_a_row(fractions: &[f64]) -> Shape {
    let radii: Vec<f64> = fractions.iter().map(|f| f.sqrt()).collect();
    let mut x = 0.0;
    let mut parts = Vec::new();
    for (i, &r) in radii.iter().enumerate() {
        if i > 0 {
            x += radii[i - 1] + r + 0.5;
        }
        parts.push(ball_at(x, 0.0, r));
    }
    Shape::Union { parts }
}

/// Planar corpus of 57 sets, all normalized to area π.
pub fn default_corpus() -> Vec<DomainSpec> {
    let s = |label: &str, shape: Shape| DomainSpec::from_shape(label, 2, shape);
    let mut out = vec![
        s("disk", Shape::ball([0.0; 3], 1.0)),
        s("theta", Shape::Union {
            parts: vec![ball_at(-1.5, 0.0, 1.0), ball_at(1.5, 0.0, 1.0)],
        }),
        s("theta-tangent", Shape::Union {
            parts: vec![ball_at(-1.0, 0.0, 1.0), ball_at(1.0, 0.0, 1.0)],
        }),
        s("theta-far", Shape::Union {
            parts: vec![ball_at(-2.5, 0.0, 1.0), ball_at(2.5, 0.0, 1.0)],
        }),
    ];
    for t in [0.02, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4] {
        out.push(DomainSpec::family(Family::VolumeSplit, t, 2));
    }
    for t in [0.1, 0.2, 0.5, 1.0, 1.5, 2.0] {
        out.push(DomainSpec::family(Family::EllipsePair, t, 2));
    }
    for t in [0.02, 0.05, 0.1, 0.2, 0.3, 0.5] {
        out.push(DomainSpec::family(Family::DumbbellNeck, t, 2));
    }
    for a in [1.1, 1.2, 1.5, 2.0, 3.0, 4.0] {
        out.push(s(&format!("ellipse-{a}"), ellipse(a, 0.0)));
    }
    out.push(s("ellipse-1.5-rotated", ellipse(1.5, PI / 6.0)));
    for a in [1.0, 1.5, 2.0, 3.0, 5.0] {
        let label = if a == 1.0 {
            "square".to_string()
        } else {
            format!("rectangle-{a}")
        };
        out.push(s(&label, rectangle(a)));
    }
    for l in [0.5, 1.0, 2.0] {
        out.push(s(&format!("stadium-{l}"), Shape::Stadium {
            center: [0.0; 3],
            half_length: l,
            radius: 1.0,
        }));
    }
    out.push(s("triangle", regular_polygon(3)));
    out.push(s("pentagon", regular_polygon(5)));
    out.push(s("hexagon", regular_polygon(6)));
    out.push(s("l-shape", Shape::Polygon {
        vertices: vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]],
    }));
    out.push(s("cross", Shape::Polygon {
        vertices: vec![
            [1.0, 0.0],
            [2.0, 0.0],
            [2.0, 1.0],
            [3.0, 1.0],
            [3.0, 2.0],
            [2.0, 2.0],
            [2.0, 3.0],
            [1.0, 3.0],
            [1.0, 2.0],
            [0.0, 2.0],
            [0.0, 1.0],
            [1.0, 1.0],
        ],
    }));
    out.push(s("three-balls", balls_in_a_row(&[1.0, 1.0, 1.0])));
    out.push(s("four-balls", balls_in_a_row(&[1.0, 1.0, 1.0, 1.0])));
    out.push(s("ball-and-small-ball", balls_in_a_row(&[0.8, 0.2])));
    out.push(s("three-unequal-balls", balls_in_a_row(&[0.5, 0.3, 0.2])));
    out.push(s("annulus-0.3", Shape::Annulus {
        center: [0.0; 3],
        inner: 0.3,
        outer: 1.0,
    }));
    out.push(s("annulus-0.5", Shape::Annulus {
        center: [0.0; 3],
        inner: 0.5,
        outer: 1.0,
    }));
    out.push(s("two-ellipses", Shape::Union {
        parts: vec![
            Shape::Ellipsoid {
                center: [-2.0, 0.0, 0.0],
                semi_axes: [1.2247, 0.8165, 0.0],
                angle: 0.0,
            },
            Shape::Ellipsoid {
                center: [2.0, 0.0, 0.0],
                semi_axes: [1.2247, 0.8165, 0.0],
                angle: 0.0,
            },
        ],
    }));
    out.push(s("ellipse-and-ball", Shape::Union {
        parts: vec![
            Shape::Ellipsoid {
                center: [-2.0, 0.0, 0.0],
                semi_axes: [1.4142, 0.7071, 0.0],
                angle: 0.0,
            },
            ball_at(2.0, 0.0, 1.0),
        ],
    }));
    out.push(s("two-squares", Shape::Union {
        parts: vec![
            Shape::Cuboid {
                min: [-2.0, -0.5, 0.0],
                max: [-1.0, 0.5, 0.0],
            },
            Shape::Cuboid {
                min: [1.0, -0.5, 0.0],
                max: [2.0, 0.5, 0.0],
            },
        ],
    }));
    out.push(s("square-and-ball", Shape::Union {
        parts: vec![
            Shape::Cuboid {
                min: [-2.5, -0.886, 0.0],
                max: [-0.728, 0.886, 0.0],
            },
            ball_at(1.5, 0.0, 1.0),
        ],
    }));
    for sep in [0.5, 1.0, 1.5] {
        out.push(s(&format!("peanut-{sep}"), Shape::OverlappingBalls {
            separation: sep,
            radius: 1.0,
        }));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_large_and_normalized() {
        let c = default_corpus();
        assert!(c.len() >= 55, "{}", c.len());
        for d in &c {
            let v = d.volume().unwrap();
            assert!((v - PI).abs() < 1e-9, "{}: {v}", d.label);
        }
        let mut labels: Vec<&str> = c.iter().map(|d| d.label.as_str()).collect();
        labels.sort();
        labels.dedup();
        assert_eq!(labels.len(), c.len());
    }
}
