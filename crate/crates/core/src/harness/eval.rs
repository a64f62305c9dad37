use serde::{Deserialize, Serialize};

use super::InequalityId;
use crate::asymmetry::{fraenkel1, fraenkel2, AsymmetryResult};
use crate::dirichlet::{extrapolate, solve_domains_with, SpectrumResult, TorsionResult};
use crate::error::{Error, Result};
use crate::geometry::{Family, GridDomain, Shape, TwoBallConfig};
use crate::nodal::{decompose, Decomposition, DecompositionSource};
use crate::reference::Reference;
use crate::sparse::EigenOptions;

fn default_dim() -> usize {
    2
}

fn yes() -> bool {
    true
}

/// A corpus entry: an analytic shape or a family member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub label: String,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<Shape>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// Rescale the shape to the measure of the unit ball before rasterizing.
    #[serde(default = "yes")]
    pub normalize: bool,
}

impl DomainSpec {
    pub fn from_shape(label: impl Into<String>, dim: usize, shape: Shape) -> Self {
        DomainSpec {
            label: label.into(),
            dim,
            shape: Some(shape),
            family: None,
            t: None,
            normalize: true,
        }
    }

    pub fn family(family: Family, t: f64, dim: usize) -> Self {
        DomainSpec {
            label: format!("{}(t={t})", family.name()),
            dim,
            shape: None,
            family: Some(family),
            t: Some(t),
            normalize: true,
        }
    }

    /// The analytic shape to rasterize.
    pub fn resolve(&self) -> Result<Shape> {
        match (&self.shape, self.family) {
            (Some(s), None) => {
                if self.normalize {
                    s.normalized(self.dim)
                } else {
                    Ok(s.clone())
                }
            }
            (None, Some(f)) => {
                let t = self
                    .t
                    .ok_or_else(|| Error::config(format!("domain `{}`", self.label), "family entry needs `t`"))?;
                f.shape(t, self.dim)
            }
            _ => Err(Error::config(
                format!("domain `{}`", self.label),
                "exactly one of `shape` or `family` is required",
            )),
        }
    }

    pub fn rasterize(&self, h: f64) -> Result<GridDomain> {
        GridDomain::rasterize(&self.resolve()?, self.dim, h, self.label.clone())
    }

    /// Analytic measure of the resolved shape.
    pub fn volume(&self) -> Result<f64> {
        self.resolve()?.volume(self.dim)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarnessOptions {
    /// Spacings, strictly decreasing; the two finest are used.
    pub ladder: Vec<f64>,
    pub k_max: usize,
    /// Checks to run; empty means all.
    pub checks: Vec<InequalityId>,
    pub eigen: EigenOptions,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        HarnessOptions {
            ladder: vec![1.0 / 32.0, 1.0 / 64.0],
            k_max: 6,
            checks: Vec::new(),
            eigen: EigenOptions::default(),
        }
    }
}

impl HarnessOptions {
    pub fn runs(&self, id: InequalityId) -> bool {
        self.checks.is_empty() || self.checks.contains(&id)
    }

    fn any(&self, ids: &[InequalityId]) -> bool {
        ids.iter().any(|&i| self.runs(i))
    }

    pub fn validate(&self) -> Result<()> {
        if self.ladder.is_empty() {
            return Err(Error::config("ladder", "at least one spacing is required"));
        }
        if self.ladder.iter().any(|h| !(*h > 0.0)) {
            return Err(Error::config("ladder", "spacings must be positive"));
        }
        if self.ladder.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::config("ladder", "spacings must be strictly decreasing"));
        }
        if self.k_max < 1 {
            return Err(Error::config("k_max", "must be at least 1"));
        }
        if !(self.eigen.tol > 0.0) {
            return Err(Error::config("tolerances.eigen", "must be positive"));
        }
        Ok(())
    }

    /// The one or two spacings actually solved.
    pub fn used_spacings(&self) -> &[f64] {
        &self.ladder[self.ladder.len().saturating_sub(2)..]
    }
}

/// Extrapolated spectrum (and optionally torsion) of one set.
#[derive(Debug, Clone)]
pub struct Quantities {
    pub label: String,
    pub dim: usize,
    pub h: f64,
    /// Grid measure on the finest spacing.
    pub measure: f64,
    pub spectrum: SpectrumResult,
    pub torsion: Option<TorsionResult>,
}

impl Quantities {
    pub fn solve(domains: &[GridDomain], k: usize, with_torsion: bool, eigen: &EigenOptions) -> Result<Self> {
        let fine = domains.last().ok_or_else(|| Error::Argument("no domains to solve".into()))?;
        let s = solve_domains_with(domains, k, with_torsion, eigen)?;
        Ok(Quantities {
            label: fine.label().to_string(),
            dim: fine.dim(),
            h: fine.h(),
            measure: fine.measure(),
            spectrum: s.spectrum,
            torsion: s.torsion,
        })
    }

    /// `λ_k`, `k ≥ 1`.
    pub fn lambda(&self, k: usize) -> f64 {
        self.spectrum.lambda(k)
    }

    pub fn rel(&self, k: usize) -> f64 {
        self.spectrum.relative_error(k)
    }

    pub fn err(&self, k: usize) -> f64 {
        self.spectrum.error_estimate[k - 1]
    }

    pub fn torsion(&self) -> Result<&TorsionResult> {
        self.torsion
            .as_ref()
            .ok_or_else(|| Error::Argument(format!("torsion of `{}` was not computed", self.label)))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymmetryEval {
    pub value: f64,
    /// `|value(h) − value(h_coarse)|`.
    pub error: f64,
    pub result: AsymmetryResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionEval {
    pub source: DecompositionSource,
    pub lambda1_plus: f64,
    pub lambda1_minus: f64,
    pub error_plus: f64,
    pub error_minus: f64,
    pub measure_plus: f64,
    pub measure_minus: f64,
    /// Decomposition on the finest spacing.
    pub fine: Decomposition,
}

impl DecompositionEval {
    pub fn max_lambda1(&self) -> (f64, f64) {
        if self.lambda1_plus >= self.lambda1_minus {
            (self.lambda1_plus, self.error_plus)
        } else {
            (self.lambda1_minus, self.error_minus)
        }
    }

    pub fn min_lambda1(&self) -> f64 {
        self.lambda1_plus.min(self.lambda1_minus)
    }
}

/// Everything the checks need about one domain.
#[derive(Debug, Clone)]
pub struct DomainEval {
    pub spec: DomainSpec,
    pub reference: Reference,
    /// Grid measure of the domain on the finest spacing.
    pub grid_measure: f64,
    pub omega: Quantities,
    pub fraenkel1: Option<AsymmetryEval>,
    pub fraenkel2: Option<AsymmetryEval>,
    /// `Ω ∩ Θ_w` for the optimal two-ball witness `Θ_w`.
    pub cap: Option<Quantities>,
    /// The witness `Θ_w` on its own grid.
    pub theta_grid: Option<Quantities>,
    /// `|Ω \ Θ_w|` with its extrapolation error.
    pub outside_theta: Option<(f64, f64)>,
    pub decomposition: Option<DecompositionEval>,
    /// `Ω⁺ ∪ Ω⁻` of the decomposition.
    pub union: Option<Quantities>,
    /// Partial failures that disabled some checks.
    pub notes: Vec<String>,
}

fn asym_eval(domains: &[GridDomain], f: fn(&GridDomain) -> Result<AsymmetryResult>) -> Result<AsymmetryEval> {
    let fine = f(domains.last().expect("non-empty"))?;
    let error = if domains.len() == 2 {
        (fine.value - f(&domains[0])?.value).abs()
    } else {
        0.0
    };
    Ok(AsymmetryEval {
        value: fine.value,
        error,
        result: fine,
    })
}

fn extrapolated_scalar(values: &[f64], ratio: f64) -> (f64, f64) {
    match values {
        [v] => (*v, 0.0),
        [c, f] => {
            let (v, e) = extrapolate(&[*c], &[*f], ratio);
            (v[0], e[0])
        }
        _ => (f64::NAN, f64::NAN),
    }
}

fn ratio_of(domains: &[GridDomain]) -> f64 {
    if domains.len() == 2 {
        domains[0].h() / domains[1].h()
    } else {
        1.0
    }
}

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Solve everything the selected checks need for one domain.
pub fn evaluate(spec: &DomainSpec, opts: &HarnessOptions) -> Result<DomainEval> {
    use InequalityId as I;
    opts.validate()?;
    let k = opts.k_max.max(2);
    let reference = Reference::with_volume(spec.dim, spec.volume()?, k)?;
    let domains = opts
        .used_spacings()
        .iter()
        .map(|&h| spec.rasterize(h))
        .collect::<Result<Vec<_>>>()?;
    let ratio = ratio_of(&domains);
    let need_torsion = InequalityId::ALL.iter().any(|i| i.needs_torsion() && opts.runs(*i));
    let need_witness = opts.any(&[I::QuantitativeKrahnSzego, I::TorsionVolume, I::LemmaB]);
    let need_decomp = opts.any(&[I::Decomposition, I::Theorem2, I::Claim, I::TorsionKrahnSzego]);
    let need_union = opts.any(&[I::Theorem2, I::TorsionKrahnSzego]);
    let mut notes = Vec::new();

    let solved = solve_domains_with(&domains, k, need_torsion, &opts.eigen)?;
    let fine = domains.last().expect("non-empty");
    let omega = Quantities {
        label: spec.label.clone(),
        dim: spec.dim,
        h: fine.h(),
        measure: fine.measure(),
        spectrum: solved.spectrum.clone(),
        torsion: solved.torsion.clone(),
    };

    let fraenkel1 = if opts.runs(I::QuantitativeFaberKrahn) {
        Some(asym_eval(&domains, fraenkel1)?)
    } else {
        None
    };
    let fraenkel2 = if need_witness {
        Some(asym_eval(&domains, fraenkel2)?)
    } else {
        None
    };

    let (mut cap, mut theta_grid, mut outside_theta) = (None, None, None);
    if let Some(w) = fraenkel2.as_ref().and_then(|f| f.result.two_balls()) {
        let witness = w.shape();
        let mut caps = Vec::new();
        let mut outside = Vec::new();
        for d in &domains {
            let theta_here = GridDomain::rasterize_in(&witness, d.frame(), "theta-witness");
            caps.push(d.intersect(&theta_here)?.with_label(format!("{}∩Θw", spec.label)));
            outside.push(d.set_minus(&theta_here)?.measure());
        }
        outside_theta = Some(extrapolated_scalar(&outside, ratio));
        if opts.any(&[I::TorsionVolume, I::LemmaB]) {
            match Quantities::solve(&caps, k, true, &opts.eigen) {
                Ok(q) => cap = Some(q),
                Err(e) => notes.push(format!("Ω∩Θw: {e}")),
            }
        }
        if opts.runs(I::LemmaB) {
            let grids = domains
                .iter()
                .map(|d| GridDomain::rasterize(&witness, spec.dim, d.h(), "Θw"))
                .collect::<Result<Vec<_>>>()?;
            match Quantities::solve(&grids, k, true, &opts.eigen) {
                Ok(q) => theta_grid = Some(q),
                Err(e) => notes.push(format!("Θw: {e}")),
            }
        }
    }

    let (mut decomposition, mut union) = (None, None);
    if need_decomp {
        let decs: Result<Vec<Decomposition>> = domains
            .iter()
            .zip(&solved.raw)
            .map(|(d, (s, _))| decompose(d, s))
            .collect();
        match decs {
            Ok(decs) => {
                let fine_dec = decs.last().expect("non-empty").clone();
                let mut plus = Vec::new();
                let mut minus = Vec::new();
                for d in &decs {
                    // Match pieces across spacings by centroid.
                    let (p, m) = (d.omega_plus.centroid(), d.omega_minus.centroid());
                    let (fp, fm) = (fine_dec.omega_plus.centroid(), fine_dec.omega_minus.centroid());
                    if dist(&p, &fp) + dist(&m, &fm) <= dist(&p, &fm) + dist(&m, &fp) {
                        plus.push(d.lambda1_plus);
                        minus.push(d.lambda1_minus);
                    } else {
                        plus.push(d.lambda1_minus);
                        minus.push(d.lambda1_plus);
                    }
                }
                let (lp, ep) = extrapolated_scalar(&plus, ratio);
                let (lm, em) = extrapolated_scalar(&minus, ratio);
                if need_union {
                    let unions = decs.iter().map(|d| d.union()).collect::<Result<Vec<_>>>()?;
                    let same = unions.iter().zip(&domains).all(|(u, d)| u.mask() == d.mask());
                    if same {
                        union = Some(Quantities {
                            label: format!("{}±", spec.label),
                            ..omega.clone()
                        });
                    } else {
                        match Quantities::solve(&unions, k, opts.runs(I::TorsionKrahnSzego), &opts.eigen) {
                            Ok(q) => union = Some(q),
                            Err(e) => notes.push(format!("Ω⁺∪Ω⁻: {e}")),
                        }
                    }
                }
                decomposition = Some(DecompositionEval {
                    source: fine_dec.source,
                    lambda1_plus: lp,
                    lambda1_minus: lm,
                    error_plus: ep,
                    error_minus: em,
                    measure_plus: fine_dec.measure_plus,
                    measure_minus: fine_dec.measure_minus,
                    fine: fine_dec,
                });
            }
            Err(e) => notes.push(format!("decomposition: {e}")),
        }
    }

    Ok(DomainEval {
        spec: spec.clone(),
        reference,
        grid_measure: fine.measure(),
        omega,
        fraenkel1,
        fraenkel2,
        cap,
        theta_grid,
        outside_theta,
        decomposition,
        union,
        notes,
    })
}

impl DomainEval {
    /// Two-ball witness of the 2-asymmetry, when computed.
    pub fn witness(&self) -> Option<&TwoBallConfig> {
        self.fraenkel2.as_ref().and_then(|f| f.result.two_balls())
    }
}
