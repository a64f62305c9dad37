mod common;

use std::f64::consts::PI;

use common::{j01, j11, rel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use speclab::dirichlet::spectrum;
use speclab::harness::DomainSpec;
use speclab::nodal::connected_components;
use speclab::sharpness::{
    doubled_shape, doubling_check, doubling_probe, fit_exponent, fit_exponent_analytic, fit_snapshots, linear_fit,
    DeltaMode, FamilySnapshot, SharpnessOptions,
};
use speclab::sparse::EigenOptions;
use speclab::{Error, Family, GridDomain, Shape};

/// Least-squares slope of `ln |Δλ_k|` against `ln Δλ₂` for two disks of
/// areas `π(1/2 ± t)`, computed from Bessel zeros.
fn two_disk_slope(k: usize, ts: &[f64]) -> f64 {
    let zeros = [j01(), j11(), j11()];
    let spectrum = |areas: [f64; 2]| {
        let mut v: Vec<f64> = areas
            .iter()
            .flat_map(|a| zeros.iter().map(move |j| j * j * PI / a))
            .collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let theta = spectrum([PI / 2.0; 2]);
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .map(|t| {
            let s = spectrum([PI * (0.5 + t), PI * (0.5 - t)]);
            ((s[1] - theta[1]).ln(), (s[k - 1] - theta[k - 1]).abs().ln())
        })
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn line_fit_recovers_a_line() {
    let x = [1.0, 2.0, 4.0, 8.0];
    let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.75 * v).collect();
    let (slope, intercept, r2) = linear_fit(&x, &y).unwrap();
    assert!((slope + 0.75).abs() < 1e-12);
    assert!((intercept - 3.0).abs() < 1e-12);
    assert!((r2 - 1.0).abs() < 1e-12);
    assert!(matches!(linear_fit(&[1.0], &[2.0]), Err(Error::InsufficientData(_))));
}

#[test]
fn analytic_volume_split_slopes() {
    let ts = [0.00125, 0.0025, 0.005, 0.01];
    let fit = fit_exponent_analytic(Family::VolumeSplit, 2, &ts, DeltaMode::PositivePart, 2).unwrap();
    assert!((fit.slope - 1.0).abs() < 1e-12);
    for k in 3..=4 {
        let fit = fit_exponent_analytic(Family::VolumeSplit, k, &ts, DeltaMode::Absolute, 2).unwrap();
        let want = two_disk_slope(k, &ts);
        assert!((fit.slope - want).abs() < 1e-9, "k={k}: {} vs {want}", fit.slope);
        assert!((fit.slope - 1.0).abs() < 0.05);
    }
    // Above Θ the third eigenvalue moves down, so its positive part vanishes.
    assert!(matches!(
        fit_exponent_analytic(Family::VolumeSplit, 3, &ts, DeltaMode::PositivePart, 2),
        Err(Error::InsufficientData(_))
    ));
}

#[test]
fn bad_t_grids_are_rejected() {
    let opts = SharpnessOptions::default();
    let short = [0.02, 0.04, 0.08];
    assert!(matches!(
        fit_exponent(Family::VolumeSplit, 2, &short, &opts),
        Err(Error::InsufficientData(_))
    ));
    assert!(matches!(
        fit_exponent(Family::VolumeSplit, 2, &[0.1, 0.2, 0.3, 0.6], &opts),
        Err(Error::OutOfRange(_))
    ));
    assert!(fit_exponent_analytic(Family::EllipsePair, 2, &[0.1, 0.2, 0.3, 0.4], DeltaMode::Absolute, 2).is_err());
}

#[test]
fn points_under_budget_are_dropped() {
    let theta = [10.0, 10.0, 20.0];
    let snaps: Vec<FamilySnapshot> = [0.01, 0.02, 0.03, 0.04, 0.05]
        .iter()
        .map(|&t| FamilySnapshot {
            t,
            eigenvalues: vec![10.0 - t, 10.0 + t, 20.0 + 2.0 * t],
            error_estimate: vec![0.0, 0.035, 0.0],
        })
        .collect();
    match fit_snapshots(Family::VolumeSplit, 3, DeltaMode::PositivePart, &snaps, &theta, 0.0) {
        Err(Error::InsufficientData(msg)) => assert!(msg.contains("2 of 5"), "{msg}"),
        other => panic!("expected insufficient data, got {other:?}"),
    }
    let loose: Vec<FamilySnapshot> = snaps
        .iter()
        .map(|s| FamilySnapshot {
            error_estimate: vec![0.0; 3],
            ..s.clone()
        })
        .collect();
    let fit = fit_snapshots(Family::VolumeSplit, 3, DeltaMode::PositivePart, &loose, &theta, 0.0).unwrap();
    assert!(fit.dropped.is_empty());
    assert!((fit.slope - 1.0).abs() < 1e-12);
    assert!((fit.intercept - 2f64.ln()).abs() < 1e-12);
}

#[test]
fn grid_fit_on_the_volume_split_is_near_one() {
    let fit = fit_exponent(Family::VolumeSplit, 2, &[0.02, 0.04, 0.08, 0.16], &SharpnessOptions::default()).unwrap();
    assert!((fit.slope - 1.0).abs() < 1e-9);
    assert_eq!(fit.samples.len(), 4);
}

#[test]
fn doubled_shape_is_two_half_copies() {
    let square = Shape::Cuboid {
        min: [0.0; 3],
        max: [1.0, 1.0, 0.0],
    };
    let twin = doubled_shape(&square, 2).unwrap();
    assert!((twin.volume(2).unwrap() - PI).abs() < 1e-9);
    let d = GridDomain::rasterize(&twin, 2, 1.0 / 64.0, "twin").unwrap();
    let comps = connected_components(&d);
    assert_eq!(comps.len(), 2);
    for c in &comps {
        assert!((c.measure() - PI / 2.0).abs() < 0.02);
    }
}

/// Disjoint ellipses in one frame: the spectrum of the union is the sorted
/// merge of the spectra of the pieces.
#[test]
fn union_spectrum_is_a_sorted_merge() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = 1.0 / 16.0;
    let k = 5;
    for _ in 0..10 {
        let mut ellipse = |x: f64| Shape::Ellipsoid {
            center: [x, rng.random_range(-0.3..0.3), 0.0],
            semi_axes: [rng.random_range(0.5..1.0), rng.random_range(0.4..0.9), 0.0],
            angle: rng.random_range(0.0..PI),
        };
        let (a, b) = (ellipse(-1.2), ellipse(1.2));
        let union = Shape::Union {
            parts: vec![a.clone(), b.clone()],
        };
        let whole = GridDomain::rasterize(&union, 2, h, "pair").unwrap();
        let left = GridDomain::rasterize_in(&a, whole.frame(), "left");
        let right = GridDomain::rasterize_in(&b, whole.frame(), "right");
        let mut merged: Vec<f64> = spectrum(&left, k)
            .unwrap()
            .eigenvalues
            .into_iter()
            .chain(spectrum(&right, k).unwrap().eigenvalues)
            .collect();
        merged.sort_by(f64::total_cmp);
        let got = spectrum(&whole, k).unwrap();
        for j in 0..k {
            assert!(rel(got.eigenvalues[j], merged[j]) < 1e-8, "{} vs {}", got.eigenvalues[j], merged[j]);
        }
    }
}

fn ladder() -> Vec<f64> {
    vec![1.0 / 32.0, 1.0 / 64.0]
}

#[test]
fn doubling_the_disk_gives_theta() {
    let disk = DomainSpec::from_shape("disk", 2, Shape::ball([0.0; 3], 1.0));
    let s = doubling_check(&disk, 1, &ladder(), &EigenOptions::default()).unwrap();
    assert!(s.lhs <= 0.005 * j01().powi(2), "{}", s.lhs);
    assert!(s.rhs <= 0.005 * 2.0 * j01().powi(2), "{}", s.rhs);
    assert!(s.scaling_deviation <= s.scaling_budget);
}

#[test]
fn doubling_a_square_scales_the_gap_by_two() {
    let square = DomainSpec::from_shape(
        "square",
        2,
        Shape::Cuboid {
            min: [0.0; 3],
            max: [1.0, 1.0, 0.0],
        },
    );
    let s = doubling_check(&square, 1, &ladder(), &EigenOptions::default()).unwrap();
    // Side √π: λ₁ = 2π. The halves have twice the eigenvalues. The square is
    // not face-aligned, so the corners make the estimates noisy and the
    // reported errors are the tolerance.
    let want = 2.0 * PI - j01().powi(2);
    assert!((s.lhs - want).abs() <= s.lhs_err, "{} vs {want} ± {}", s.lhs, s.lhs_err);
    assert!((s.rhs - 2.0 * want).abs() <= s.rhs_err, "{} vs {} ± {}", s.rhs, 2.0 * want, s.rhs_err);
    assert!(s.scaling_deviation <= s.scaling_budget);
    assert!(doubling_check(&square, 0, &ladder(), &EigenOptions::default()).is_err());
}

#[test]
fn doubling_probe_power_follows_the_scaling_law() {
    let ellipse = |a: f64| {
        DomainSpec::from_shape(
            format!("ellipse-{a}"),
            2,
            Shape::Ellipsoid {
                center: [0.0; 3],
                semi_axes: [a, 1.0, 0.0],
                angle: 0.0,
            },
        )
    };
    let specs: Vec<DomainSpec> = [1.5, 2.0, 3.0].into_iter().map(ellipse).collect();
    let p = doubling_probe(&specs, 1, &ladder(), &EigenOptions::default()).unwrap();
    assert_eq!(p.matches, "scaling");
    assert!((p.power - p.scaling_power).abs() < 0.1, "{}", p.power);
    assert!(p.r_squared >= 0.99, "{}", p.r_squared);
    for s in &p.samples {
        let spread = (s.lhs_err / s.lhs + s.rhs_err / s.rhs) / 2f64.ln();
        assert!((s.power - p.scaling_power).abs() <= spread, "{}: {} ± {spread}", s.domain, s.power);
    }
    assert!(doubling_probe(&[], 1, &ladder(), &EigenOptions::default()).is_err());
}
