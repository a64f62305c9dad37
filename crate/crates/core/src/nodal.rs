//! Splitting a domain into two disjoint pieces whose first eigenvalues do
//! not exceed the second eigenvalue of the whole: nodal sets of the second
//! eigenfunction, or a grouping of connected components.

use std::collections::VecDeque;

use serde::Serialize;

use crate::dirichlet::{spectrum, SpectrumResult};
use crate::error::{Error, Result};
use crate::geometry::GridDomain;

/// Cells with `|u₂| ≤ NODAL_EPS · max|u₂|` belong to neither sign set.
pub const NODAL_EPS: f64 = 1e-10;
/// Exhaustive component grouping up to this many components.
const EXHAUSTIVE_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecompositionSource {
    Nodal,
    Components,
}

#[derive(Debug, Clone, Serialize)]
pub struct Decomposition {
    #[serde(skip)]
    pub omega_plus: GridDomain,
    #[serde(skip)]
    pub omega_minus: GridDomain,
    pub measure_plus: f64,
    pub measure_minus: f64,
    pub lambda1_plus: f64,
    pub lambda1_minus: f64,
    pub source: DecompositionSource,
}

impl Decomposition {
    pub fn max_lambda1(&self) -> f64 {
        self.lambda1_plus.max(self.lambda1_minus)
    }

    pub fn min_lambda1(&self) -> f64 {
        self.lambda1_plus.min(self.lambda1_minus)
    }

    /// `Ω⁺ ∪ Ω⁻` as one domain.
    pub fn union(&self) -> Result<GridDomain> {
        Ok(self.omega_plus.union(&self.omega_minus)?.with_label(format!("{}±", base_label(&self.omega_plus))))
    }
}

fn base_label(d: &GridDomain) -> &str {
    d.label().trim_end_matches("[+]").trim_end_matches("[-]")
}

/// Flood-fill partition into 4-connected (plane) or 6-connected (space)
/// components, ordered by their first cell.
pub fn connected_components(omega: &GridDomain) -> Vec<GridDomain> {
    let frame = omega.frame();
    let mask = omega.mask();
    let mut label = vec![usize::MAX; frame.len()];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for start in omega.interior() {
        if label[start] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut cells = vec![start];
        label[start] = id;
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            for nb in frame.neighbors(c).flatten() {
                if mask[nb] && label[nb] == usize::MAX {
                    label[nb] = id;
                    cells.push(nb);
                    queue.push_back(nb);
                }
            }
        }
        comps.push(cells);
    }
    comps
        .into_iter()
        .enumerate()
        .map(|(i, cells)| {
            let mut m = vec![false; frame.len()];
            for c in cells {
                m[c] = true;
            }
            GridDomain::from_mask(frame.clone(), m, format!("{}#{i}", omega.label()))
                .expect("component of a valid domain is valid")
        })
        .collect()
}

/// Sign sets of `u` inside `omega`, with isolated cells removed.
fn sign_sets(omega: &GridDomain, u: &[f64]) -> (Vec<bool>, Vec<bool>) {
    let frame = omega.frame();
    let mask = omega.mask();
    let scale = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let eps = NODAL_EPS * scale;
    let mut plus = vec![false; frame.len()];
    let mut minus = vec![false; frame.len()];
    for i in omega.interior() {
        if u[i] > eps {
            plus[i] = true;
        } else if u[i] < -eps {
            minus[i] = true;
        }
    }
    let open = |set: &Vec<bool>| -> Vec<bool> {
        let mut out = set.clone();
        for i in 0..set.len() {
            if set[i] && !frame.neighbors(i).flatten().any(|j| set[j]) {
                out[i] = false;
            }
        }
        out
    };
    let (plus, minus) = (open(&plus), open(&minus));
    debug_assert!(plus.iter().zip(mask).all(|(p, m)| !p || *m));
    (plus, minus)
}

fn lambda1(d: &GridDomain) -> Result<f64> {
    if d.cell_count() < 2 {
        return Err(Error::Decomposition(format!("piece `{}` is too small to solve", d.label())));
    }
    Ok(spectrum(d, 1)?.eigenvalues[0])
}

fn nodal(omega: &GridDomain, spec: &SpectrumResult) -> Result<Decomposition> {
    let u2 = &spec.eigenfunctions[1];
    if u2.len() != omega.frame().len() || spec.frame != *omega.frame() {
        return Err(Error::GridMismatch("eigenfunction frame differs from the domain".into()));
    }
    let changes_sign = |(p, m): &(Vec<bool>, Vec<bool>)| p.iter().any(|&b| b) && m.iter().any(|&b| b);
    let mut sets = sign_sets(omega, u2);
    if !changes_sign(&sets) && spec.clusters.iter().any(|c| c.contains(&0) && c.contains(&1)) {
        // λ₁ and λ₂ agree to working precision, so any member of their
        // eigenspace is a second eigenfunction. The solver may have returned
        // modes localized on weakly coupled pieces; their difference or sum
        // changes sign.
        let u1 = &spec.eigenfunctions[0];
        for sign in [-1.0, 1.0] {
            let w: Vec<f64> = u1.iter().zip(u2).map(|(a, b)| a + sign * b).collect();
            let candidate = sign_sets(omega, &w);
            if changes_sign(&candidate) {
                sets = candidate;
                break;
            }
        }
    }
    let (plus, minus) = sets;
    if !plus.iter().any(|&b| b) || !minus.iter().any(|&b| b) {
        return Err(Error::Decomposition(format!(
            "second eigenfunction of `{}` does not change sign",
            omega.label()
        )));
    }
    let frame = omega.frame().clone();
    let omega_plus = GridDomain::from_mask(frame.clone(), plus, format!("{}[+]", omega.label()))?;
    let omega_minus = GridDomain::from_mask(frame, minus, format!("{}[-]", omega.label()))?;
    finish(omega_plus, omega_minus, DecompositionSource::Nodal)
}

fn finish(omega_plus: GridDomain, omega_minus: GridDomain, source: DecompositionSource) -> Result<Decomposition> {
    let (lp, lm) = rayon::join(|| lambda1(&omega_plus), || lambda1(&omega_minus));
    Ok(Decomposition {
        measure_plus: omega_plus.measure(),
        measure_minus: omega_minus.measure(),
        lambda1_plus: lp?,
        lambda1_minus: lm?,
        omega_plus,
        omega_minus,
        source,
    })
}

/// Best split of components into two groups: minimizes the larger of the two
/// group eigenvalues `min λ₁` over members. Returns group membership.
fn group_components(lambdas: &[f64], measures: &[f64]) -> Vec<bool> {
    let m = lambdas.len();
    let group_value = |g: &[bool]| {
        let mut a = f64::INFINITY;
        let mut b = f64::INFINITY;
        for i in 0..m {
            if g[i] {
                a = a.min(lambdas[i]);
            } else {
                b = b.min(lambdas[i]);
            }
        }
        a.max(b)
    };
    if m <= EXHAUSTIVE_LIMIT {
        let mut best: Option<(f64, Vec<bool>)> = None;
        // Component 0 always in the first group; every other subset once.
        for bits in 0u32..(1 << (m - 1)) {
            let g: Vec<bool> = (0..m).map(|i| i == 0 || bits & (1 << (i - 1)) == 0).collect();
            if g.iter().all(|&x| x) {
                continue;
            }
            let v = group_value(&g);
            if best.as_ref().map_or(true, |b| v < b.0) {
                best = Some((v, g));
            }
        }
        best.expect("at least two components").1
    } else {
        // Largest first, each into the group whose eigenvalue is currently larger.
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&i, &j| measures[j].total_cmp(&measures[i]).then(i.cmp(&j)));
        let mut g = vec![false; m];
        let (mut la, mut lb) = (f64::INFINITY, f64::INFINITY);
        for (pos, &i) in order.iter().enumerate() {
            let to_a = pos == 0 || (pos > 1 && la >= lb);
            if to_a {
                g[i] = true;
                la = la.min(lambdas[i]);
            } else {
                lb = lb.min(lambdas[i]);
            }
        }
        g
    }
}

/// Two disjoint pieces of `omega` with `max(λ₁(Ω⁺), λ₁(Ω⁻)) ≤ λ₂(Ω)`.
///
/// Connected domains use the sign sets of `u₂` from `spec`. Disconnected
/// domains group their components; when no grouping satisfies the bound
/// (the second eigenfunction lives on a single component), the sign sets of
/// `u₂` are used instead.
pub fn decompose(omega: &GridDomain, spec: &SpectrumResult) -> Result<Decomposition> {
    if spec.k() < 2 {
        return Err(Error::Argument("decomposition needs the second eigenpair".into()));
    }
    let comps = connected_components(omega);
    if comps.len() < 2 {
        return nodal(omega, spec);
    }
    let solvable: Vec<&GridDomain> = comps.iter().filter(|c| c.cell_count() >= 2).collect();
    let lambdas = solvable.iter().map(|c| lambda1(c)).collect::<Result<Vec<f64>>>()?;
    let measures: Vec<f64> = solvable.iter().map(|c| c.measure()).collect();
    if solvable.len() >= 2 {
        let g = group_components(&lambdas, &measures);
        let lambda2 = spec.eigenvalues[1];
        let value = {
            let a = (0..g.len()).filter(|&i| g[i]).map(|i| lambdas[i]).fold(f64::INFINITY, f64::min);
            let b = (0..g.len()).filter(|&i| !g[i]).map(|i| lambdas[i]).fold(f64::INFINITY, f64::min);
            a.max(b)
        };
        if value <= lambda2 * (1.0 + 1e-6) {
            let frame = omega.frame().clone();
            let mut plus = vec![false; frame.len()];
            let mut minus = vec![false; frame.len()];
            for (i, c) in solvable.iter().enumerate() {
                let target = if g[i] { &mut plus } else { &mut minus };
                for idx in c.interior() {
                    target[idx] = true;
                }
            }
            let omega_plus = GridDomain::from_mask(frame.clone(), plus, format!("{}[+]", omega.label()))?;
            let omega_minus = GridDomain::from_mask(frame, minus, format!("{}[-]", omega.label()))?;
            let mut d = finish(omega_plus, omega_minus, DecompositionSource::Components)?;
            // Larger piece first, as `Ω⁺`.
            if d.measure_minus > d.measure_plus {
                std::mem::swap(&mut d.omega_plus, &mut d.omega_minus);
                std::mem::swap(&mut d.measure_plus, &mut d.measure_minus);
                std::mem::swap(&mut d.lambda1_plus, &mut d.lambda1_minus);
                d.omega_plus = d.omega_plus.clone().with_label(format!("{}[+]", omega.label()));
                d.omega_minus = d.omega_minus.clone().with_label(format!("{}[-]", omega.label()));
            }
            return Ok(d);
        }
    }
    nodal(omega, spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exhaustive_grouping_separates_two_smallest() {
        let g = group_components(&[5.0, 3.0, 9.0, 4.0], &[1.0; 4]);
        assert_ne!(g[1], g[3]);
    }

    #[test]
    fn greedy_grouping_is_a_partition() {
        let lambdas: Vec<f64> = (0..15).map(|i| 10.0 + i as f64).collect();
        let measures: Vec<f64> = (0..15).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let g = group_components(&lambdas, &measures);
        assert!(g.iter().any(|&x| x) && g.iter().any(|&x| !x));
        assert!(g[0] != g[1]);
    }
}
