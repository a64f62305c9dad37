//! Stability exponents along parametric families, and the doubling probe.
//!
//! Along a family `Ω_t` approaching Θ, the exponent is the log–log slope of
//! `Δλ_k = λ_k(Ω_t) − λ_k(Θ)` against `Δλ₂`. The doubling probe measures the
//! power of 2 relating `|λ_k(Ω) − λ_k(B)|` to the same gap for the union of
//! two half-measure copies of `Ω` against Θ.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dirichlet::solve_domains_with;
use crate::sparse::EigenOptions;
use crate::error::{Error, Result};
use crate::geometry::{unit_ball_volume, Family, GridDomain, Shape};
use crate::harness::{DomainSpec, MIN_BUDGET};
use crate::reference::{two_ball_spectrum, Reference};

/// Log-spaced family parameters.
pub const DEFAULT_T_GRID: [f64; 4] = [0.02, 0.04, 0.08, 0.16];

/// Per-family parameters. Pairs of ellipses move `Δλ₂` only at second order,
/// and very thin necks vanish on coarse grids, so those families start later.
pub fn default_t_grid(family: Family) -> Vec<f64> {
    match family {
        Family::VolumeSplit => DEFAULT_T_GRID.to_vec(),
        Family::EllipsePair => vec![0.25, 0.35, 0.5, 0.7],
        Family::DumbbellNeck => vec![0.04, 0.08, 0.16, 0.32],
    }
}

/// Slopes at or above this are consistent with exponent 1/2.
pub const SLOPE_FLOOR: f64 = 0.4;

/// Fewest points a fit accepts.
pub const MIN_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaMode {
    /// `(Δλ_k)₊`: points with `Δλ_k` under budget are dropped.
    PositivePart,
    /// `|Δλ_k|`.
    Absolute,
}

/// Eigenvalues of one family member with their error estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySnapshot {
    pub t: f64,
    pub eigenvalues: Vec<f64>,
    pub error_estimate: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentSample {
    pub t: f64,
    pub delta2: f64,
    pub delta_k: f64,
    pub budget2: f64,
    pub budget_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub family: Family,
    pub k: usize,
    pub mode: DeltaMode,
    /// Sorted by `delta2`.
    pub samples: Vec<ExponentSample>,
    /// Parameters whose point fell under budget.
    pub dropped: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl ExponentFit {
    pub fn n_points(&self) -> usize {
        self.samples.len()
    }

    pub fn consistent(&self) -> bool {
        self.slope >= SLOPE_FLOOR
    }
}

/// Least-squares line through `(x, y)`: `(slope, intercept, r²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::InsufficientData(format!("{n} points for a line fit")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    Ok((slope, intercept, r2))
}

/// Fit the exponent for `λ_k` from precomputed snapshots. A value's budget is
/// `max(error, floor · value)`.
pub fn fit_snapshots(
    family: Family,
    k: usize,
    mode: DeltaMode,
    snapshots: &[FamilySnapshot],
    theta: &[f64],
    floor: f64,
) -> Result<ExponentFit> {
    if k == 0 || k > theta.len() {
        return Err(Error::Argument(format!("k = {k} outside the reference spectrum")));
    }
    let mut samples = Vec::new();
    let mut dropped = Vec::new();
    for s in snapshots {
        if s.eigenvalues.len() < k.max(2) {
            return Err(Error::Argument(format!("snapshot t = {} has too few eigenvalues", s.t)));
        }
        let budget = |j: usize| s.error_estimate[j - 1].max(floor * s.eigenvalues[j - 1]);
        let delta2 = s.eigenvalues[1] - theta[1];
        let raw = s.eigenvalues[k - 1] - theta[k - 1];
        let delta_k = match mode {
            DeltaMode::PositivePart => raw,
            DeltaMode::Absolute => raw.abs(),
        };
        let (budget2, budget_k) = (budget(2), budget(k));
        if delta2 <= budget2 || delta_k <= budget_k {
            dropped.push(s.t);
            continue;
        }
        samples.push(ExponentSample {
            t: s.t,
            delta2,
            delta_k,
            budget2,
            budget_k,
        });
    }
    if samples.len() < MIN_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} k={k}: {} of {} points above budget, need {MIN_POINTS}",
            family.name(),
            samples.len(),
            snapshots.len()
        )));
    }
    samples.sort_by(|a, b| a.delta2.total_cmp(&b.delta2));
    let x: Vec<f64> = samples.iter().map(|s| s.delta2.ln()).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.delta_k.ln()).collect();
    let (slope, intercept, r_squared) = linear_fit(&x, &y)?;
    Ok(ExponentFit {
        family,
        k,
        mode,
        samples,
        dropped,
        slope,
        intercept,
        r_squared,
    })
}

fn check_t_grid(family: Family, t_grid: &[f64]) -> Result<()> {
    if t_grid.len() < MIN_POINTS {
        return Err(Error::InsufficientData(format!(
            "t grid has {} points, need {MIN_POINTS}",
            t_grid.len()
        )));
    }
    let (lo, hi) = family.range();
    if let Some(t) = t_grid.iter().find(|&&t| !(t > lo && t < hi)) {
        return Err(Error::OutOfRange(format!(
            "{} parameter t = {t} outside ({lo}, {hi})",
            family.name()
        )));
    }
    Ok(())
}

/// Solver settings for family snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct SharpnessOptions {
    pub ladder: Vec<f64>,
    pub k_max: usize,
    pub dim: usize,
    pub mode: DeltaMode,
    pub eigen: EigenOptions,
}

impl Default for SharpnessOptions {
    fn default() -> Self {
        SharpnessOptions {
            ladder: vec![1.0 / 32.0, 1.0 / 64.0],
            k_max: 6,
            dim: 2,
            mode: DeltaMode::PositivePart,
            eigen: EigenOptions::default(),
        }
    }
}

/// Extrapolated spectra of the family members, solved in parallel.
pub fn family_snapshots(family: Family, t_grid: &[f64], opts: &SharpnessOptions) -> Result<Vec<FamilySnapshot>> {
    check_t_grid(family, t_grid)?;
    let k = opts.k_max.max(2);
    let used = &opts.ladder[opts.ladder.len().saturating_sub(2)..];
    t_grid
        .par_iter()
        .map(|&t| {
            let spec = DomainSpec::family(family, t, opts.dim);
            let domains = used.iter().map(|&h| spec.rasterize(h)).collect::<Result<Vec<_>>>()?;
            let s = solve_domains_with(&domains, k, false, &opts.eigen)?.spectrum;
            Ok(FamilySnapshot {
                t,
                eigenvalues: s.eigenvalues,
                error_estimate: s.error_estimate,
            })
        })
        .collect()
}

/// Closed-form snapshots. Only the volume-split family has them.
pub fn analytic_snapshots(family: Family, t_grid: &[f64], k: usize, dim: usize) -> Result<Vec<FamilySnapshot>> {
    check_t_grid(family, t_grid)?;
    if family != Family::VolumeSplit {
        return Err(Error::Argument(format!("no closed form for family {}", family.name())));
    }
    let k = k.max(2);
    t_grid
        .iter()
        .map(|&t| {
            Ok(FamilySnapshot {
                t,
                eigenvalues: two_ball_spectrum(dim, unit_ball_volume(dim), 0.5 + t, k)?,
                error_estimate: vec![0.0; k],
            })
        })
        .collect()
}

/// Solve the family on `t_grid` and fit the exponent for `λ_k`.
pub fn fit_exponent(family: Family, k: usize, t_grid: &[f64], opts: &SharpnessOptions) -> Result<ExponentFit> {
    let opts = SharpnessOptions {
        k_max: opts.k_max.max(k),
        ..opts.clone()
    };
    let snaps = family_snapshots(family, t_grid, &opts)?;
    let r = Reference::new(opts.dim, opts.k_max.max(2))?;
    fit_snapshots(family, k, opts.mode, &snaps, &r.theta_eigenvalues, MIN_BUDGET)
}

/// The same fit against closed-form eigenvalues.
pub fn fit_exponent_analytic(family: Family, k: usize, t_grid: &[f64], mode: DeltaMode, dim: usize) -> Result<ExponentFit> {
    let snaps = analytic_snapshots(family, t_grid, k, dim)?;
    let r = Reference::new(dim, k.max(2))?;
    fit_snapshots(family, k, mode, &snaps, &r.theta_eigenvalues, 1e-12)
}

/// Result of one `k` in a family probe: a fit or the reason there is none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOutcome {
    pub k: usize,
    pub fit: Option<ExponentFit>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyProbe {
    pub family: Family,
    pub mode: DeltaMode,
    pub snapshots: Vec<FamilySnapshot>,
    pub fits: Vec<FitOutcome>,
}

impl FamilyProbe {
    /// Fits whose slope falls below [`SLOPE_FLOOR`].
    pub fn inconsistent(&self) -> Vec<&ExponentFit> {
        self.fits
            .iter()
            .filter_map(|f| f.fit.as_ref())
            .filter(|f| !f.consistent())
            .collect()
    }
}

/// Solve the family once and fit every `k` up to `k_max`.
pub fn probe_family(family: Family, t_grid: &[f64], opts: &SharpnessOptions) -> Result<FamilyProbe> {
    let snapshots = family_snapshots(family, t_grid, opts)?;
    let r = Reference::new(opts.dim, opts.k_max.max(2))?;
    let fits = (1..=opts.k_max)
        .map(|k| match fit_snapshots(family, k, opts.mode, &snapshots, &r.theta_eigenvalues, MIN_BUDGET) {
            Ok(fit) => FitOutcome {
                k,
                fit: Some(fit),
                error: None,
            },
            Err(e) => FitOutcome {
                k,
                fit: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    Ok(FamilyProbe {
        family,
        mode: opts.mode,
        snapshots,
        fits,
    })
}

/// Two copies of `shape`, each of measure `ω_d / 2`, side by side along x.
pub fn doubled_shape(shape: &Shape, dim: usize) -> Result<Shape> {
    let half = shape.normalized_to(dim, unit_ball_volume(dim) / 2.0)?;
    let (lo, hi) = half.bounding_box(dim);
    let mut center = [0.0; 3];
    for i in 0..dim {
        center[i] = 0.5 * (lo[i] + hi[i]);
    }
    let width = hi[0] - lo[0];
    let shift = 0.5 * width + 0.125 * width;
    let at = |dx: f64| {
        let mut v = [0.0; 3];
        for i in 0..dim {
            v[i] = -center[i];
        }
        v[0] += dx;
        half.translated(v)
    };
    Ok(Shape::Union {
        parts: vec![at(-shift), at(shift)],
    })
}

/// One domain of the doubling probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingSample {
    pub domain: String,
    pub k: usize,
    /// `|λ_k(Ω) − λ_k(B)|`.
    pub lhs: f64,
    /// `|λ_{2k}(Ω^{1/2} ⊔ Ω^{1/2}) − λ_{2k}(Θ)|`.
    pub rhs: f64,
    pub lhs_err: f64,
    pub rhs_err: f64,
    pub ratio: f64,
    /// `log₂(lhs / rhs)`; NaN when both sides vanish.
    pub power: f64,
    /// Largest relative deviation of the doubled spectrum from the
    /// interleaved copies of `2^{2/d} λ_j(Ω)`.
    pub scaling_deviation: f64,
    pub scaling_budget: f64,
}

/// Measure both sides of the doubling relation for one domain.
pub fn doubling_check(spec: &DomainSpec, k: usize, ladder: &[f64], eigen: &EigenOptions) -> Result<DoublingSample> {
    if k == 0 {
        return Err(Error::Argument("k must be at least 1".into()));
    }
    let dim = spec.dim;
    let base = spec.resolve()?.normalized(dim)?;
    let twin = doubled_shape(&base, dim)?;
    let used = &ladder[ladder.len().saturating_sub(2)..];
    let raster = |s: &Shape, label: &str| -> Result<Vec<GridDomain>> {
        used.iter().map(|&h| GridDomain::rasterize(s, dim, h, label)).collect()
    };
    let (single, double) = rayon::join(
        || solve_domains_with(&raster(&base, &spec.label)?, k.max(2), false, eigen),
        || solve_domains_with(&raster(&twin, &format!("{}x2", spec.label))?, 2 * k, false, eigen),
    );
    let (single, double) = (single?.spectrum, double?.spectrum);
    let r = Reference::new(dim, 2 * k)?;
    let lhs = (single.lambda(k) - r.ball(k)).abs();
    let rhs = (double.lambda(2 * k) - r.theta(2 * k)).abs();
    let lhs_err = single.error_estimate[k - 1];
    let rhs_err = double.error_estimate[2 * k - 1];
    let ratio = crate::harness::ratio(lhs, rhs);
    let factor = 2f64.powf(2.0 / dim as f64);
    let mut deviation: f64 = 0.0;
    let mut budget: f64 = 0.0;
    for j in 1..=2 * k {
        let expect = factor * single.lambda(j.div_ceil(2));
        deviation = deviation.max((double.lambda(j) - expect).abs() / expect);
        budget = budget.max(double.relative_error(j) + single.relative_error(j.div_ceil(2)));
    }
    Ok(DoublingSample {
        domain: spec.label.clone(),
        k,
        lhs,
        rhs,
        lhs_err,
        rhs_err,
        ratio,
        power: ratio.log2(),
        scaling_deviation: deviation,
        scaling_budget: budget.max(MIN_BUDGET),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingProbe {
    pub samples: Vec<DoublingSample>,
    /// Mean of `log₂(lhs / rhs)` over samples with both sides above error.
    pub power: f64,
    /// Slope, intercept and r² of `log₂ lhs` against `log₂ rhs`.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `−1/d`, the factor as printed.
    pub printed_power: f64,
    /// `−2/d`, from the scaling law.
    pub scaling_power: f64,
    /// `"printed"` or `"scaling"`, whichever is closer to `power`.
    pub matches: String,
}

/// Run [`doubling_check`] on each domain and measure the power of 2.
pub fn doubling_probe(specs: &[DomainSpec], k: usize, ladder: &[f64], eigen: &EigenOptions) -> Result<DoublingProbe> {
    let dim = specs
        .first()
        .ok_or_else(|| Error::Argument("no domains for the doubling probe".into()))?
        .dim;
    if specs.iter().any(|s| s.dim != dim) {
        return Err(Error::Argument("doubling probe domains must share a dimension".into()));
    }
    let samples = specs
        .par_iter()
        .map(|s| doubling_check(s, k, ladder, eigen))
        .collect::<Result<Vec<_>>>()?;
    let valid: Vec<&DoublingSample> = samples
        .iter()
        .filter(|s| s.lhs > s.lhs_err && s.rhs > s.rhs_err && s.power.is_finite())
        .collect();
    if valid.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} of {} doubling samples above error",
            valid.len(),
            samples.len()
        )));
    }
    let x: Vec<f64> = valid.iter().map(|s| s.rhs.log2()).collect();
    let y: Vec<f64> = valid.iter().map(|s| s.lhs.log2()).collect();
    let (slope, intercept, r_squared) = linear_fit(&x, &y)?;
    let power = valid.iter().map(|s| s.power).sum::<f64>() / valid.len() as f64;
    let d = dim as f64;
    let (printed_power, scaling_power) = (-1.0 / d, -2.0 / d);
    let matches = if (power - scaling_power).abs() <= (power - printed_power).abs() {
        "scaling"
    } else {
        "printed"
    };
    Ok(DoublingProbe {
        samples,
        power,
        slope,
        intercept,
        r_squared,
        printed_power,
        scaling_power,
        matches: matches.to_string(),
    })
}
