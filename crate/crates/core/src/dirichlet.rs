//! Dirichlet Laplacian on grid domains: eigenpairs, torsion function and
//! Richardson extrapolation across spacings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GridDomain, GridFrame};
use crate::sparse::{smallest_eigenpairs_factored, EigenOptions, LdlFactor, SparseSymMatrix};

/// Relative gap below which neighbouring eigenvalues are reported together.
pub const CLUSTER_TOL: f64 = 1e-4;

/// Depth (in cells from the exterior) of the layer used for the boundary gradient.
const GRADIENT_DEPTH: usize = 4;

/// Standard 5-point (plane) or 7-point (space) stencil over the interior
/// cells of `omega`, scaled by `1/h²`. Unknowns follow [`GridDomain::interior`].
pub fn assemble_laplacian(omega: &GridDomain) -> Result<SparseSymMatrix> {
    omega.ensure_nonempty()?;
    let frame = omega.frame();
    let cells = omega.interior();
    let mut local = vec![usize::MAX; frame.len()];
    for (i, &c) in cells.iter().enumerate() {
        local[c] = i;
    }
    let inv_h2 = 1.0 / (frame.h * frame.h);
    let diag = 2.0 * frame.dim as f64 * inv_h2;
    let n = cells.len();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(n * (2 * frame.dim + 1));
    let mut values = Vec::with_capacity(n * (2 * frame.dim + 1));
    row_ptr.push(0);
    let mut row: Vec<(usize, f64)> = Vec::with_capacity(7);
    for (i, &c) in cells.iter().enumerate() {
        row.clear();
        row.push((i, diag));
        for nb in frame.neighbors(c).flatten() {
            let j = local[nb];
            if j != usize::MAX {
                row.push((j, -inv_h2));
            }
        }
        row.sort_by_key(|e| e.0);
        for &(j, v) in &row {
            col_idx.push(j);
            values.push(v);
        }
        row_ptr.push(col_idx.len());
    }
    Ok(SparseSymMatrix::from_csr_unchecked(n, row_ptr, col_idx, values))
}

/// First `k` Dirichlet eigenvalues on one grid, or extrapolated from two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    /// Fields over the whole frame, zero outside the domain, with `Σu²hᵈ = 1`.
    #[serde(skip)]
    pub eigenfunctions: Vec<Vec<f64>>,
    pub frame: GridFrame,
    pub h: f64,
    pub extrapolated: bool,
    pub error_estimate: Vec<f64>,
    /// Groups of indices (0-based) whose eigenvalues agree to [`CLUSTER_TOL`].
    pub clusters: Vec<Vec<usize>>,
}

impl SpectrumResult {
    /// `λ_k` with `k` starting at 1.
    pub fn lambda(&self, k: usize) -> f64 {
        self.eigenvalues[k - 1]
    }

    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Size of the cluster containing `λ_k`.
    pub fn multiplicity(&self, k: usize) -> usize {
        self.clusters.iter().find(|c| c.contains(&(k - 1))).map_or(1, Vec::len)
    }

    /// Relative error estimate of `λ_k`.
    pub fn relative_error(&self, k: usize) -> f64 {
        self.error_estimate[k - 1] / self.eigenvalues[k - 1].abs()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Torsion function data on one grid, or extrapolated from two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorsionResult {
    /// `w` over the whole frame, zero outside the domain.
    #[serde(skip)]
    pub w: Vec<f64>,
    pub frame: GridFrame,
    pub h: f64,
    #[serde(rename = "T")]
    pub torsion: f64,
    pub sup_w: f64,
    /// Largest central-difference `|∇w|` on the cell layer at depth four,
    /// an estimate of the supremum of `|∇w|` on the boundary.
    pub boundary_grad_max: f64,
    /// Largest one-sided difference `w/h` over boundary-adjacent cells.
    pub boundary_grad_one_sided: f64,
    pub extrapolated: bool,
    pub torsion_error: f64,
    pub sup_w_error: f64,
}

impl TorsionResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// A domain with its assembled and factored Laplacian, shared by the
/// eigenvalue and torsion solves.
#[derive(Debug, Clone)]
pub struct DirichletProblem {
    domain: GridDomain,
    cells: Vec<usize>,
    matrix: SparseSymMatrix,
    factor: LdlFactor,
}

impl DirichletProblem {
    pub fn new(omega: &GridDomain) -> Result<Self> {
        let matrix = assemble_laplacian(omega)?;
        let factor = LdlFactor::new(&matrix)?;
        Ok(DirichletProblem {
            domain: omega.clone(),
            cells: omega.interior(),
            matrix,
            factor,
        })
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn matrix(&self) -> &SparseSymMatrix {
        &self.matrix
    }

    /// Frame indices of the unknowns.
    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    fn scatter(&self, local: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.domain.frame().len()];
        for (&c, &v) in self.cells.iter().zip(local) {
            full[c] = v;
        }
        full
    }

    pub fn spectrum(&self, k: usize) -> Result<SpectrumResult> {
        self.spectrum_with(k, &EigenOptions::default())
    }

    pub fn spectrum_with(&self, k: usize, opts: &EigenOptions) -> Result<SpectrumResult> {
        if k == 0 {
            return Err(Error::Argument("k must be at least 1".into()));
        }
        if k >= self.cells.len() {
            return Err(Error::DegenerateDomain(format!(
                "`{}` has {} cells, too few for {k} eigenvalues",
                self.domain.label(),
                self.cells.len()
            )));
        }
        let pairs = smallest_eigenpairs_factored(&self.matrix, &self.factor, k, opts)?;
        let frame = self.domain.frame();
        let scale = frame.cell_volume().sqrt();
        let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.value).collect();
        let eigenfunctions = pairs
            .iter()
            .map(|p| {
                let norm = p.vector.iter().map(|x| x * x).sum::<f64>().sqrt() * scale;
                let unit: Vec<f64> = p.vector.iter().map(|x| x / norm).collect();
                self.scatter(&unit)
            })
            .collect();
        let error_estimate = eigenvalues.iter().map(|v| v * opts.tol).collect();
        Ok(SpectrumResult {
            clusters: clusters(&eigenvalues),
            eigenvalues,
            eigenfunctions,
            frame: frame.clone(),
            h: frame.h,
            extrapolated: false,
            error_estimate,
        })
    }

    pub fn torsion(&self) -> TorsionResult {
        let n = self.cells.len();
        let local = self.factor.solve(&vec![1.0; n]);
        let w = self.scatter(&local);
        let frame = self.domain.frame();
        let torsion = local.iter().sum::<f64>() * frame.cell_volume();
        let sup_w = local.iter().copied().fold(0.0, f64::max);
        let (boundary_grad_max, boundary_grad_one_sided) = boundary_gradient(&self.domain, &w);
        // The direct solve leaves a residual near machine precision.
        let err = 1e-10;
        TorsionResult {
            w,
            frame: frame.clone(),
            h: frame.h,
            torsion,
            sup_w,
            boundary_grad_max,
            boundary_grad_one_sided,
            extrapolated: false,
            torsion_error: err * torsion,
            sup_w_error: err * sup_w,
        }
    }
}

/// Consecutive runs of eigenvalues within relative [`CLUSTER_TOL`].
pub fn clusters(values: &[f64]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match out.last_mut() {
            Some(last) if {
                let prev = values[*last.last().unwrap()];
                (v - prev).abs() <= CLUSTER_TOL * v.abs().max(prev.abs())
            } =>
            {
                last.push(i)
            }
            _ => out.push(vec![i]),
        }
    }
    out
}

/// Distance in cells to the exterior (1 for boundary-adjacent cells, 0 outside).
pub fn cell_depth(omega: &GridDomain) -> Vec<usize> {
    let frame = omega.frame();
    let mask = omega.mask();
    let mut depth = vec![0usize; frame.len()];
    let mut queue = std::collections::VecDeque::new();
    for idx in omega.interior() {
        if frame.neighbors(idx).any(|nb| nb.map_or(true, |j| !mask[j])) {
            depth[idx] = 1;
            queue.push_back(idx);
        }
    }
    while let Some(idx) = queue.pop_front() {
        let d = depth[idx];
        for j in frame.neighbors(idx).flatten() {
            if mask[j] && depth[j] == 0 {
                depth[j] = d + 1;
                queue.push_back(j);
            }
        }
    }
    depth
}

fn boundary_gradient(omega: &GridDomain, w: &[f64]) -> (f64, f64) {
    let frame = omega.frame();
    let mask = omega.mask();
    let h = frame.h;
    let depth = cell_depth(omega);
    let one_sided = omega
        .interior()
        .into_iter()
        .filter(|&i| depth[i] == 1)
        .map(|i| w[i] / h)
        .fold(0.0, f64::max);
    let deepest = depth.iter().copied().max().unwrap_or(0);
    let layer = GRADIENT_DEPTH.min(deepest);
    if layer < 2 {
        return (one_sided, one_sided);
    }
    let s = frame.strides();
    let mut best = 0.0f64;
    for idx in 0..frame.len() {
        if !mask[idx] || depth[idx] < layer {
            continue;
        }
        let mut g2 = 0.0;
        for a in 0..frame.dim {
            let d = (w[idx + s[a]] - w[idx - s[a]]) / (2.0 * h);
            g2 += d * d;
        }
        best = best.max(g2.sqrt());
    }
    (best, one_sided)
}

pub fn spectrum(omega: &GridDomain, k: usize) -> Result<SpectrumResult> {
    DirichletProblem::new(omega)?.spectrum(k)
}

pub fn torsion(omega: &GridDomain) -> Result<TorsionResult> {
    Ok(DirichletProblem::new(omega)?.torsion())
}

/// Richardson step for a first-order error: `(rλ_f − λ_c)/(r − 1)` with
/// `r = h_c/h_f`. Returns the extrapolated values and `|λ_f − λ_c|`.
pub fn extrapolate(coarse: &[f64], fine: &[f64], ratio: f64) -> (Vec<f64>, Vec<f64>) {
    coarse
        .iter()
        .zip(fine)
        .map(|(&c, &f)| {
            if c == f {
                (f, 0.0)
            } else {
                ((ratio * f - c) / (ratio - 1.0), (f - c).abs())
            }
        })
        .unzip()
}

fn check_ladder(hs: &[f64]) -> Result<()> {
    if hs.is_empty() {
        return Err(Error::Argument("empty spacing ladder".into()));
    }
    if hs.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Argument("spacing ladder must be strictly decreasing".into()));
    }
    Ok(())
}

/// Spectrum and torsion from the last two spacings of a ladder, extrapolated.
#[derive(Debug, Clone)]
pub struct LadderSolve {
    pub spectrum: SpectrumResult,
    pub torsion: Option<TorsionResult>,
    /// Raw results on the two finest spacings (coarse, fine).
    pub raw: Vec<(SpectrumResult, Option<TorsionResult>)>,
}

/// Solve on the two finest spacings of `hs` and extrapolate. A ladder of one
/// spacing yields the raw solve.
pub fn solve_ladder<G>(gen: G, hs: &[f64], k: usize, with_torsion: bool) -> Result<LadderSolve>
where
    G: Fn(f64) -> Result<GridDomain> + Sync,
{
    check_ladder(hs)?;
    let used = &hs[hs.len().saturating_sub(2)..];
    let domains = used.iter().map(|&h| gen(h)).collect::<Result<Vec<_>>>()?;
    solve_domains(&domains, k, with_torsion)
}

/// Solve one domain or a (coarse, fine) pair of rasterizations of the same
/// set and extrapolate in the spacing ratio.
pub fn solve_domains(domains: &[GridDomain], k: usize, with_torsion: bool) -> Result<LadderSolve> {
    solve_domains_with(domains, k, with_torsion, &EigenOptions::default())
}

/// [`solve_domains`] with explicit eigensolver settings.
pub fn solve_domains_with(
    domains: &[GridDomain],
    k: usize,
    with_torsion: bool,
    opts: &EigenOptions,
) -> Result<LadderSolve> {
    let solve_one = |d: &GridDomain| -> Result<(SpectrumResult, Option<TorsionResult>)> {
        let p = DirichletProblem::new(d)?;
        let s = p.spectrum_with(k, opts)?;
        let t = with_torsion.then(|| p.torsion());
        Ok((s, t))
    };
    match domains {
        [d] => {
            let (s, t) = solve_one(d)?;
            Ok(LadderSolve {
                spectrum: s.clone(),
                torsion: t.clone(),
                raw: vec![(s, t)],
            })
        }
        [c, f] => {
            if !(f.h() < c.h()) {
                return Err(Error::Argument("second domain must be the finer one".into()));
            }
            let (coarse, fine) = rayon::join(|| solve_one(c), || solve_one(f));
            let (coarse, fine) = (coarse?, fine?);
            let ratio = c.h() / f.h();
            let spectrum = combine_spectra(&coarse.0, &fine.0, ratio);
            let torsion = match (&coarse.1, &fine.1) {
                (Some(c), Some(f)) => Some(combine_torsion(c, f, ratio)),
                _ => None,
            };
            Ok(LadderSolve {
                spectrum,
                torsion,
                raw: vec![coarse, fine],
            })
        }
        _ => Err(Error::Argument(format!("expected one or two domains, got {}", domains.len()))),
    }
}

fn combine_spectra(coarse: &SpectrumResult, fine: &SpectrumResult, ratio: f64) -> SpectrumResult {
    let (eigenvalues, mut error_estimate) = extrapolate(&coarse.eigenvalues, &fine.eigenvalues, ratio);
    for (e, (c, f)) in error_estimate
        .iter_mut()
        .zip(coarse.error_estimate.iter().zip(&fine.error_estimate))
    {
        *e += c + f;
    }
    // Extrapolation can swap the members of a near-degenerate pair.
    let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eigenvalues[i].total_cmp(&eigenvalues[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eigenvalues[i]).collect();
    let error_estimate = order.iter().map(|&i| error_estimate[i]).collect();
    SpectrumResult {
        clusters: clusters(&eigenvalues),
        eigenvalues,
        eigenfunctions: fine.eigenfunctions.clone(),
        frame: fine.frame.clone(),
        h: fine.h,
        extrapolated: true,
        error_estimate,
    }
}

fn combine_torsion(coarse: &TorsionResult, fine: &TorsionResult, ratio: f64) -> TorsionResult {
    let (vals, errs) = extrapolate(&[coarse.torsion, coarse.sup_w], &[fine.torsion, fine.sup_w], ratio);
    TorsionResult {
        w: fine.w.clone(),
        frame: fine.frame.clone(),
        h: fine.h,
        torsion: vals[0],
        sup_w: vals[1],
        boundary_grad_max: fine.boundary_grad_max,
        boundary_grad_one_sided: fine.boundary_grad_one_sided,
        extrapolated: true,
        torsion_error: errs[0] + fine.torsion_error,
        sup_w_error: errs[1] + fine.sup_w_error,
    }
}

/// Spectrum at `h` and `h/2`, Richardson-extrapolated.
pub fn spectrum_extrapolated<G>(gen: G, h: f64, k: usize) -> Result<SpectrumResult>
where
    G: Fn(f64) -> Result<GridDomain> + Sync,
{
    Ok(solve_ladder(gen, &[h, h / 2.0], k, false)?.spectrum)
}

/// Torsion at `h` and `h/2`, Richardson-extrapolated.
pub fn torsion_extrapolated<G>(gen: G, h: f64) -> Result<TorsionResult>
where
    G: Fn(f64) -> Result<GridDomain> + Sync,
{
    check_ladder(&[h, h / 2.0])?;
    let (c, f) = rayon::join(|| gen(h).and_then(|d| torsion(&d)), || gen(h / 2.0).and_then(|d| torsion(&d)));
    Ok(combine_torsion(&c?, &f?, 2.0))
}
