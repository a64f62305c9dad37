use rayon::prelude::*;
use serde::Serialize;

use super::checks::*;
use super::eval::{evaluate, DomainEval, DomainSpec, HarnessOptions};
use super::{InequalityId, InequalityRecord, Verdict};
use crate::asymmetry::Witness;
use crate::error::Result;

/// All selected checks for one evaluated domain.
pub fn records_for(eval: &DomainEval, opts: &HarnessOptions) -> Vec<InequalityRecord> {
    use InequalityId as I;
    let q = &eval.omega;
    let r = &eval.reference;
    let k_max = opts.k_max.min(q.spectrum.k());
    let mut out = Vec::new();
    let mut push = |rec: Result<InequalityRecord>| {
        if let Ok(rec) = rec {
            out.push(rec);
        }
    };
    if opts.runs(I::FaberKrahn) {
        push(Ok(check_faber_krahn(q, r)));
    }
    if opts.runs(I::KrahnSzego) {
        push(Ok(check_krahn_szego(q, r)));
    }
    if opts.runs(I::SaintVenant) {
        push(check_saint_venant(q, r));
    }
    if opts.runs(I::Talenti) {
        push(check_talenti(q, r));
    }
    if opts.runs(I::KohlerJobin1) {
        push(check_kohler_jobin(q, r, 1));
    }
    if opts.runs(I::KohlerJobin2) {
        push(check_kohler_jobin(q, r, 2));
    }
    if opts.runs(I::TorsionVolume) {
        if let (Some(cap), Some(outside)) = (&eval.cap, eval.outside_theta) {
            push(check_torvol(q, cap, outside));
        }
    }
    if let (true, Some(f1)) = (opts.runs(I::QuantitativeFaberKrahn), &eval.fraenkel1) {
        push(Ok(check_qfk(q, r, f1)));
    }
    if let (true, Some(f2)) = (opts.runs(I::QuantitativeKrahnSzego), &eval.fraenkel2) {
        push(Ok(check_qks(q, r, f2)));
    }
    if let Some(dec) = &eval.decomposition {
        if opts.runs(I::Decomposition) {
            push(Ok(check_decomposition(q, dec)));
        }
        if opts.runs(I::Claim) {
            push(Ok(check_claim(q, dec, r, eval.grid_measure)));
        }
        if let (true, Some(u)) = (opts.runs(I::TorsionKrahnSzego), &eval.union) {
            push(torsion_krahn_szego(q, u, r));
        }
    }
    for k in 1..=k_max {
        if opts.runs(I::ChengYang) {
            push(Ok(check_cheng_yang(q, k)));
        }
        if opts.runs(I::LemmaB) {
            if let Some(cap) = &eval.cap {
                push(check_lemma_b(q, cap, k));
                if let Some(tg) = &eval.theta_grid {
                    push(check_lemma_b(tg, cap, k));
                }
            }
        }
        if opts.runs(I::Theorem1) {
            push(Ok(check_theorem1(q, r, k)));
        }
        if opts.runs(I::Theorem2bis) {
            push(Ok(check_theorem2bis(q, r, k)));
        }
        if let (true, Some(dec), Some(u)) = (opts.runs(I::Theorem2), &eval.decomposition, &eval.union) {
            if k <= u.spectrum.k() {
                push(Ok(check_theorem2(q, u, dec, r, k)));
            }
        }
        if opts.runs(I::Lambda1Stability) {
            push(Ok(check_lambda1_stability(q, r, k)));
        }
    }
    out
}

/// Per-domain data echoed into the JSON report.
#[derive(Debug, Clone, Serialize)]
pub struct DomainSummary {
    pub spec: DomainSpec,
    pub h: f64,
    pub grid_measure: f64,
    pub eigenvalues: Vec<f64>,
    pub error_estimate: Vec<f64>,
    pub clusters: Vec<Vec<usize>>,
    #[serde(rename = "T")]
    pub torsion: Option<f64>,
    pub sup_w: Option<f64>,
    pub boundary_grad_max: Option<f64>,
    pub fraenkel1: Option<f64>,
    pub fraenkel2: Option<f64>,
    pub witness: Option<Witness>,
    pub decomposition: Option<super::eval::DecompositionEval>,
    pub notes: Vec<String>,
}

impl DomainSummary {
    pub fn from_eval(e: &DomainEval) -> Self {
        let t = e.omega.torsion.as_ref();
        DomainSummary {
            spec: e.spec.clone(),
            h: e.omega.h,
            grid_measure: e.grid_measure,
            eigenvalues: e.omega.spectrum.eigenvalues.clone(),
            error_estimate: e.omega.spectrum.error_estimate.clone(),
            clusters: e.omega.spectrum.clusters.clone(),
            torsion: t.map(|t| t.torsion),
            sup_w: t.map(|t| t.sup_w),
            boundary_grad_max: t.map(|t| t.boundary_grad_max),
            fraenkel1: e.fraenkel1.as_ref().map(|f| f.value),
            fraenkel2: e.fraenkel2.as_ref().map(|f| f.value),
            witness: e.fraenkel2.as_ref().map(|f| f.result.witness.clone()),
            decomposition: e.decomposition.clone(),
            notes: e.notes.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DomainFailure {
    pub domain: String,
    pub error: String,
}

/// Per-inequality summary over a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct Aggregate {
    pub inequality_id: InequalityId,
    pub rows: usize,
    /// Largest finite ratio: the empirical constant.
    pub max_ratio: Option<f64>,
    pub max_ratio_domain: Option<String>,
    pub max_ratio_k: Option<usize>,
    pub max_ratio_budget: Option<f64>,
    pub min_ratio: Option<f64>,
    pub infinite_ratios: usize,
    pub holds: usize,
    pub within_budget: usize,
    pub violations: usize,
    pub flagged: usize,
    pub not_applicable: usize,
}

fn aggregate(records: &[InequalityRecord]) -> Vec<Aggregate> {
    let mut out = Vec::new();
    for id in InequalityId::ALL {
        let rows: Vec<&InequalityRecord> = records.iter().filter(|r| r.inequality_id == id).collect();
        if rows.is_empty() {
            continue;
        }
        let counted = |v: Verdict| rows.iter().filter(|r| r.verdict == v).count();
        let usable = || {
            rows.iter()
                .filter(|r| r.ratio.is_finite() && r.verdict != Verdict::NotApplicable)
        };
        let max = usable().max_by(|a, b| a.ratio.total_cmp(&b.ratio));
        let min = usable().map(|r| r.ratio).min_by(|a, b| a.total_cmp(b));
        out.push(Aggregate {
            inequality_id: id,
            rows: rows.len(),
            max_ratio: max.map(|r| r.ratio),
            max_ratio_domain: max.map(|r| r.domain.clone()),
            max_ratio_k: max.and_then(|r| r.k),
            max_ratio_budget: max.map(|r| r.error_budget),
            min_ratio: min,
            infinite_ratios: rows.iter().filter(|r| r.ratio.is_infinite()).count(),
            holds: counted(Verdict::Holds),
            within_budget: counted(Verdict::HoldsWithinBudget),
            violations: counted(Verdict::Violated),
            flagged: counted(Verdict::DiscretizationBias) + counted(Verdict::DecompositionFailure),
            not_applicable: counted(Verdict::NotApplicable),
        });
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub ladder: Vec<f64>,
    pub k_max: usize,
    pub records: Vec<InequalityRecord>,
    pub aggregates: Vec<Aggregate>,
    pub domains: Vec<DomainSummary>,
    pub failures: Vec<DomainFailure>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    inequality_id: &'a str,
    domain: &'a str,
    k: Option<usize>,
    h: f64,
    lhs: f64,
    rhs_constant_free: f64,
    known_constant: Option<f64>,
    ratio: f64,
    error_budget: f64,
    verdict: &'a str,
    theta_reference: String,
}

impl SweepReport {
    /// Sort records by (inequality, domain, k) and aggregate them.
    pub fn from_records(
        ladder: Vec<f64>,
        k_max: usize,
        mut records: Vec<InequalityRecord>,
        domains: Vec<DomainSummary>,
        failures: Vec<DomainFailure>,
    ) -> Self {
        records.sort_by(|a, b| {
            a.inequality_id
                .cmp(&b.inequality_id)
                .then_with(|| a.domain.cmp(&b.domain))
                .then_with(|| a.k.cmp(&b.k))
        });
        SweepReport {
            ladder,
            k_max,
            aggregates: aggregate(&records),
            records,
            domains,
            failures,
        }
    }

    /// Violated known-constant records.
    pub fn violations(&self) -> Vec<&InequalityRecord> {
        self.records
            .iter()
            .filter(|r| r.verdict == Verdict::Violated && r.inequality_id.has_known_constant())
            .collect()
    }

    /// True when any record failed or any domain could not be solved.
    pub fn has_failures(&self) -> bool {
        !self.failures.is_empty() || self.records.iter().any(|r| r.verdict.is_failure())
    }

    pub fn aggregate(&self, id: InequalityId) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.inequality_id == id)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.records {
            w.serialize(CsvRow {
                inequality_id: r.inequality_id.name(),
                domain: &r.domain,
                k: r.k,
                h: r.h,
                lhs: r.lhs,
                rhs_constant_free: r.rhs_constant_free,
                known_constant: r.known_constant,
                ratio: r.ratio,
                error_budget: r.error_budget,
                verdict: r.verdict.name(),
                theta_reference: r.theta_reference.to_string(),
            })
            .map_err(|e| crate::error::Error::Argument(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| crate::error::Error::Argument(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Evaluate every corpus domain (in parallel) and run the selected checks.
/// Failing domains are reported and skipped.
pub fn sweep(corpus: &[DomainSpec], opts: &HarnessOptions) -> Result<SweepReport> {
    opts.validate()?;
    let results: Vec<(String, Result<DomainEval>)> = corpus
        .par_iter()
        .map(|spec| (spec.label.clone(), evaluate(spec, opts)))
        .collect();
    let mut records = Vec::new();
    let mut domains = Vec::new();
    let mut failures = Vec::new();
    for (label, res) in results {
        match res {
            Ok(eval) => {
                records.extend(records_for(&eval, opts));
                domains.push(DomainSummary::from_eval(&eval));
            }
            Err(e) => failures.push(DomainFailure {
                domain: label,
                error: e.to_string(),
            }),
        }
    }
    Ok(SweepReport::from_records(opts.ladder.clone(), opts.k_max, records, domains, failures))
}
