use std::f64::consts::PI;

use proptest::prelude::*;
use speclab::geometry::{domain_family_dim, GridFrame, Point};
use speclab::nodal::connected_components;
use speclab::{domain_family, make_ball, make_theta, Error, GridDomain, Shape, TwoBallConfig};

const H: f64 = 1.0 / 256.0;

fn ball(c: [f64; 2], r: f64) -> Shape {
    Shape::ball([c[0], c[1], 0.0], r)
}

/// Both domains on the union of their frames.
fn aligned(a: &GridDomain, b: &GridDomain) -> (GridDomain, GridDomain) {
    GridDomain::align(a, b).unwrap()
}

/// Ramanujan's second approximation of an ellipse perimeter.
fn ellipse_perimeter(a: f64, b: f64) -> f64 {
    let h = ((a - b) / (a + b)).powi(2);
    PI * (a + b) * (1.0 + 3.0 * h / (10.0 + (4.0 - 3.0 * h).sqrt()))
}

/// Extent of the interior cells along each axis, in lengths.
fn extents(d: &GridDomain) -> (f64, f64) {
    let f = d.frame();
    let (mut lo, mut hi) = ([usize::MAX; 2], [0usize; 2]);
    for i in d.interior() {
        let c = f.coords(i);
        for a in 0..2 {
            lo[a] = lo[a].min(c[a]);
            hi[a] = hi[a].max(c[a]);
        }
    }
    ((hi[0] - lo[0] + 1) as f64 * f.h, (hi[1] - lo[1] + 1) as f64 * f.h)
}

#[test]
fn unit_disk_measure() {
    let d = make_ball(1.0, &[0.0, 0.0], H).unwrap();
    assert!((d.measure() - PI).abs() <= 0.05, "{}", d.measure());
    assert_eq!(d.dim(), 2);
}

#[test]
fn translated_disk_measure_within_perimeter_h() {
    let a = make_ball(1.0, &[0.0, 0.0], H).unwrap();
    for c in [[0.3, -0.71], [12.0, 5.5], [-3.123, 0.001]] {
        let b = make_ball(1.0, &c, H).unwrap();
        assert!((a.measure() - b.measure()).abs() <= 2.0 * PI * H);
    }
}

#[test]
fn half_area_disk_measure() {
    let d = make_ball(0.5f64.sqrt(), &[0.0, 0.0], H).unwrap();
    assert!((d.measure() - PI / 2.0).abs() <= 0.04);
}

#[test]
fn ball_needs_more_than_two_cells() {
    assert!(matches!(make_ball(0.01, &[0.0, 0.0], 0.01), Err(Error::DegenerateDomain(_))));
}

#[test]
fn three_dimensional_ball_measure() {
    let d = make_ball(1.0, &[0.0, 0.0, 0.0], 1.0 / 48.0).unwrap();
    assert_eq!(d.dim(), 3);
    assert!((d.measure() - 4.0 * PI / 3.0).abs() <= 4.0 * PI / 48.0);
}

#[test]
fn theta_at_distance_three() {
    let cfg = TwoBallConfig::theta(2, 3.0).unwrap();
    assert!((cfg.radius - 0.5f64.sqrt()).abs() < 1e-14);
    assert!((cfg.ball_volume() - PI / 2.0).abs() < 1e-12);
    let d = make_theta(&cfg, H).unwrap();
    assert!((d.measure() - PI).abs() <= 0.08);
    assert_eq!(connected_components(&d).len(), 2);
}

#[test]
fn tangent_theta_is_valid_and_overlap_is_rejected() {
    let r = 0.5f64.sqrt();
    assert!(TwoBallConfig::theta(2, 2.0 * r).is_ok());
    let d = make_theta(&TwoBallConfig::theta(2, 2.0 * r).unwrap(), H).unwrap();
    assert!((d.measure() - PI).abs() <= 0.08);
    assert!(matches!(TwoBallConfig::theta(2, 1.9 * r), Err(Error::InvalidConfig(_))));
}

#[test]
fn set_operations_on_a_disk() {
    let d = make_ball(1.0, &[0.0, 0.0], 1.0 / 64.0).unwrap();
    assert_eq!(d.intersect(&d).unwrap().mask(), d.mask());
    let empty = d.set_minus(&d).unwrap();
    assert!(empty.is_empty());
    assert!(matches!(
        speclab::dirichlet::spectrum(&empty, 1),
        Err(Error::DegenerateDomain(_))
    ));
    assert_eq!(d.symm_diff_measure(&d).unwrap(), 0.0);
}

#[test]
fn shifted_disks_are_disjoint() {
    let a = make_ball(1.0, &[0.0, 0.0], 1.0 / 64.0).unwrap();
    let b = make_ball(1.0, &[2.5, 0.0], 1.0 / 64.0).unwrap();
    let (a, b) = aligned(&a, &b);
    assert_eq!(a.intersect(&b).unwrap().measure(), 0.0);

    let a = make_ball(1.0, &[0.0, 0.0], H).unwrap();
    let c = make_ball(1.0, &[3.0, 0.0], H).unwrap();
    let (a, c) = aligned(&a, &c);
    let sd = a.symm_diff_measure(&c).unwrap();
    assert!((sd - 2.0 * PI).abs() <= 2.0 * 2.0 * PI * H, "{sd}");
}

#[test]
fn mismatched_frames_are_rejected() {
    let a = make_ball(1.0, &[0.0, 0.0], 1.0 / 64.0).unwrap();
    let b = make_ball(1.0, &[0.5, 0.0], 1.0 / 64.0).unwrap();
    assert!(matches!(a.intersect(&b), Err(Error::GridMismatch(_))));
    let c = make_ball(1.0, &[0.0, 0.0], 1.0 / 32.0).unwrap();
    assert!(matches!(GridDomain::align(&a, &c), Err(Error::GridMismatch(_))));
}

#[test]
fn volume_split_base_case_is_theta() {
    let fam = domain_family("volume-split", 0.0, 1.0 / 64.0).unwrap();
    let theta = make_theta(&TwoBallConfig::theta(2, 3.0).unwrap(), 1.0 / 64.0).unwrap();
    let (fam, theta) = aligned(&fam, &theta);
    assert_eq!(fam.symm_diff_measure(&theta).unwrap(), 0.0);
}

#[test]
fn volume_split_component_areas() {
    let d = domain_family("volume-split", 0.1, H).unwrap();
    let comps = connected_components(&d);
    assert_eq!(comps.len(), 2);
    let mut m: Vec<f64> = comps.iter().map(GridDomain::measure).collect();
    m.sort_by(f64::total_cmp);
    for (got, frac) in m.iter().zip([0.4, 0.6]) {
        let perimeter = 2.0 * (PI * frac * PI).sqrt();
        assert!((got - frac * PI).abs() <= perimeter * H, "{got} vs {}", frac * PI);
    }
}

#[test]
fn ellipse_pair_has_equal_areas_and_aspect() {
    let t = 0.2;
    let d = domain_family("ellipse-pair", t, H).unwrap();
    let comps = connected_components(&d);
    assert_eq!(comps.len(), 2);
    let r = 0.5f64.sqrt();
    let (a, b) = (r * (1.0 + t).sqrt(), r / (1.0 + t).sqrt());
    for c in &comps {
        assert!((c.measure() - PI / 2.0).abs() <= ellipse_perimeter(a, b) * H);
    }
    // The ellipse sits on the left.
    let (left, right) = if comps[0].centroid()[0] < comps[1].centroid()[0] {
        (&comps[0], &comps[1])
    } else {
        (&comps[1], &comps[0])
    };
    let (w, h) = extents(left);
    assert!(((w / h) - (1.0 + t)).abs() < 0.02, "aspect {}", w / h);
    let (w, h) = extents(right);
    assert!((w / h - 1.0).abs() < 0.02);

    let base = domain_family("ellipse-pair", 0.0, 1.0 / 64.0).unwrap();
    let theta = make_theta(&TwoBallConfig::theta(2, 3.0).unwrap(), 1.0 / 64.0).unwrap();
    let (base, theta) = aligned(&base, &theta);
    assert_eq!(base.symm_diff_measure(&theta).unwrap(), 0.0);
}

#[test]
fn dumbbell_neck_is_connected_and_normalized() {
    let d = domain_family("dumbbell-neck", 0.1, 1.0 / 128.0).unwrap();
    assert_eq!(connected_components(&d).len(), 1);
    assert!((d.measure() - PI).abs() <= 0.06, "{}", d.measure());
    let z = domain_family("dumbbell-neck", 0.0, 1.0 / 64.0).unwrap();
    assert_eq!(connected_components(&z).len(), 2);
}

#[test]
fn family_parameter_out_of_range() {
    assert!(matches!(domain_family("volume-split", 0.5, 0.05), Err(Error::OutOfRange(_))));
    assert!(matches!(domain_family("volume-split", -0.1, 0.05), Err(Error::OutOfRange(_))));
    assert!(domain_family("no-such-family", 0.1, 0.05).is_err());
    assert!(domain_family_dim("volume-split", 0.1, 1.0 / 16.0, 3).is_ok());
}

#[test]
fn from_mask_rejects_rim_cells() {
    let frame = GridFrame::covering(2, 0.25, &[0.0; 3], &[1.0, 1.0, 0.0], 1).unwrap();
    let mut mask = vec![false; frame.len()];
    mask[0] = true;
    assert!(GridDomain::from_mask(frame.clone(), mask, "rim").is_err());
    let mut mask = vec![false; frame.len()];
    mask[frame.index([2, 2, 0])] = true;
    let d = GridDomain::from_mask(frame, mask, "ok").unwrap();
    assert_eq!(d.cell_count(), 1);
    assert!((d.measure() - 0.0625).abs() < 1e-15);
}

#[test]
fn pgm_header_and_size() {
    let d = make_ball(1.0, &[0.0, 0.0], 1.0 / 16.0).unwrap();
    let pgm = d.to_pgm();
    let [nx, ny, _] = d.frame().extent;
    let header = format!("P5\n{nx} {ny}\n255\n");
    assert!(pgm.starts_with(header.as_bytes()));
    assert_eq!(pgm.len(), header.len() + nx * ny);
    assert_eq!(pgm.iter().skip(header.len()).filter(|&&b| b == 255).count(), d.cell_count());
}

#[test]
fn shape_spec_round_trips_through_toml() {
    let s = Shape::Union {
        parts: vec![ball([-1.0, 0.0], 0.5), ball([1.0, 0.0], 0.5)],
    };
    #[derive(serde::Serialize, serde::Deserialize)]
    struct W {
        shape: Shape,
    }
    let text = toml::to_string(&W { shape: s.clone() }).unwrap();
    let back: W = toml::from_str(&text).unwrap();
    assert_eq!(back.shape, s);
}

fn shape_strategy() -> impl Strategy<Value = (Shape, f64, f64)> {
    let center = (-2.0f64..2.0, -2.0f64..2.0);
    prop_oneof![
        (center.clone(), 0.4f64..1.5).prop_map(|(c, r)| (ball([c.0, c.1], r), PI * r * r, 2.0 * PI * r)),
        (center.clone(), 0.3f64..1.2, 0.3f64..1.2, 0.0f64..3.0).prop_map(|(c, a, b, angle)| {
            let s = Shape::Ellipsoid {
                center: [c.0, c.1, 0.0],
                semi_axes: [a, b, 0.0],
                angle,
            };
            (s, PI * a * b, ellipse_perimeter(a, b))
        }),
        (center, 0.3f64..2.0, 0.3f64..2.0).prop_map(|(c, w, h)| {
            let s = Shape::Cuboid {
                min: [c.0, c.1, 0.0],
                max: [c.0 + w, c.1 + h, 0.0],
            };
            (s, w * h, 2.0 * (w + h))
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rasterized_measure_within_perimeter_times_h((shape, area, perimeter) in shape_strategy(), h in 0.01f64..0.08) {
        let d = GridDomain::rasterize(&shape, 2, h, "s").unwrap();
        prop_assert!((d.measure() - area).abs() <= perimeter * h, "{} vs {area}", d.measure());
    }

    #[test]
    fn set_operations_are_exact(
        (a, _, _) in shape_strategy(),
        (b, _, _) in shape_strategy(),
        h in 0.03f64..0.1,
    ) {
        let da = GridDomain::rasterize(&a, 2, h, "a").unwrap();
        let db = GridDomain::rasterize(&b, 2, h, "b").unwrap();
        let (da, db) = aligned(&da, &db);
        let cap = da.intersect(&db).unwrap();
        let minus = da.set_minus(&db).unwrap();
        let cup = da.union(&db).unwrap();
        let back = db.set_minus(&da).unwrap();
        let cell = h * h;
        prop_assert_eq!(da.cell_count(), cap.cell_count() + minus.cell_count());
        prop_assert_eq!(cup.cell_count(), minus.cell_count() + db.cell_count());
        let sd = da.symm_diff_measure(&db).unwrap();
        prop_assert!((sd - (minus.measure() + back.measure())).abs() <= 1e-9 * cell);
    }

    #[test]
    fn families_are_deterministic(t in 0.0f64..0.45, which in 0usize..3, h in 0.03f64..0.08) {
        let name = ["volume-split", "ellipse-pair", "dumbbell-neck"][which];
        let a = domain_family(name, t, h).unwrap();
        let b = domain_family(name, t, h).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn translation_changes_measure_by_at_most_perimeter_h(dx in -5.0f64..5.0, dy in -5.0f64..5.0) {
        let h = 1.0 / 64.0;
        let a = GridDomain::rasterize(&ball([0.0, 0.0], 1.0), 2, h, "a").unwrap();
        let p: Point = [dx, dy, 0.0];
        let b = GridDomain::rasterize(&ball([0.0, 0.0], 1.0).translated(p), 2, h, "b").unwrap();
        prop_assert!((a.measure() - b.measure()).abs() <= 2.0 * PI * h);
    }
}
