use super::eval::{AsymmetryEval, DecompositionEval, Quantities};
use super::{error_budget, known_verdict, ratio, InequalityId, InequalityRecord, ThetaReference, Verdict, MIN_BUDGET};
use crate::error::Result;
use crate::reference::Reference;

/// Asymmetries below this (or below twice their own error) count as zero.
pub const ASYMMETRY_FLOOR: f64 = 0.01;

#[allow(clippy::too_many_arguments)]
fn record(
    id: InequalityId,
    domain: &str,
    k: Option<usize>,
    h: f64,
    lhs: f64,
    rhs: f64,
    known_constant: Option<f64>,
    error_budget: f64,
    verdict: Verdict,
    theta_reference: ThetaReference,
    scale: f64,
) -> InequalityRecord {
    InequalityRecord {
        inequality_id: id,
        domain: domain.to_string(),
        k,
        h,
        lhs,
        rhs_constant_free: rhs,
        known_constant,
        ratio: ratio(lhs, rhs),
        error_budget,
        verdict,
        theta_reference,
        scale,
        note: None,
    }
}

fn with_note(mut r: InequalityRecord, note: impl Into<String>) -> InequalityRecord {
    r.note = Some(note.into());
    r
}

fn known(
    id: InequalityId,
    q: &Quantities,
    k: Option<usize>,
    (lhs, c, rhs): (f64, f64, f64),
    budget: f64,
    scale: f64,
    theta: ThetaReference,
) -> InequalityRecord {
    let verdict = known_verdict(lhs, c, rhs, budget, scale);
    record(id, &q.label, k, q.h, lhs, rhs, Some(c), budget, verdict, theta, scale)
}

/// `λ₁(B) ≤ λ₁(Ω)`.
pub fn check_faber_krahn(q: &Quantities, r: &Reference) -> InequalityRecord {
    let rhs = q.lambda(1);
    known(
        InequalityId::FaberKrahn,
        q,
        Some(1),
        (r.ball(1), 1.0, rhs),
        error_budget(&[q.rel(1)]),
        rhs,
        ThetaReference::None,
    )
}

/// `λ₂(Θ) ≤ λ₂(Ω)`.
pub fn check_krahn_szego(q: &Quantities, r: &Reference) -> InequalityRecord {
    let rhs = q.lambda(2);
    known(
        InequalityId::KrahnSzego,
        q,
        Some(2),
        (r.theta(2), 1.0, rhs),
        error_budget(&[q.rel(2)]),
        rhs,
        ThetaReference::Analytic,
    )
}

/// `T(Ω) ≤ T(B)`.
pub fn check_saint_venant(q: &Quantities, r: &Reference) -> Result<InequalityRecord> {
    let t = q.torsion()?;
    Ok(known(
        InequalityId::SaintVenant,
        q,
        None,
        (t.torsion, 1.0, r.ball_torsion),
        error_budget(&[t.torsion_error / t.torsion]),
        r.ball_torsion,
        ThetaReference::None,
    ))
}

/// `sup w_Ω ≤ sup w_B`.
pub fn check_talenti(q: &Quantities, r: &Reference) -> Result<InequalityRecord> {
    let t = q.torsion()?;
    Ok(known(
        InequalityId::Talenti,
        q,
        None,
        (t.sup_w, 1.0, r.ball_sup_w),
        error_budget(&[t.sup_w_error / t.sup_w]),
        r.ball_sup_w,
        ThetaReference::None,
    ))
}

/// `λ_k ≤ (1 + 4/d) k^{2/d} λ₁`.
pub fn check_cheng_yang(q: &Quantities, k: usize) -> InequalityRecord {
    let d = q.dim as f64;
    let rhs = (k as f64).powf(2.0 / d) * q.lambda(1);
    known(
        InequalityId::ChengYang,
        q,
        Some(k),
        (q.lambda(k), 1.0 + 4.0 / d, rhs),
        error_budget(&[q.rel(k), q.rel(1)]),
        rhs,
        ThetaReference::None,
    )
}

/// For `Ω' ⊂ Ω`: `0 ≤ 1/λ_k(Ω) − 1/λ_k(Ω') ≤ e^{1/(4π)} k λ_k(Ω)^{d/2} (T(Ω) − T(Ω'))`.
pub fn check_lemma_b(big: &Quantities, sub: &Quantities, k: usize) -> Result<InequalityRecord> {
    let d = big.dim as f64;
    let (tb, ts) = (big.torsion()?, sub.torsion()?);
    let lhs = 1.0 / big.lambda(k) - 1.0 / sub.lambda(k);
    let rhs = k as f64 * big.lambda(k).powf(d / 2.0) * (tb.torsion - ts.torsion);
    let c = (1.0 / (4.0 * std::f64::consts::PI)).exp();
    // Both sides are differences of nearly equal numbers, so the errors are
    // propagated in absolute terms and then expressed relative to the slack base.
    let lhs_err = big.rel(k) / big.lambda(k) + sub.rel(k) / sub.lambda(k);
    let rhs_err = k as f64 * big.lambda(k).powf(d / 2.0) * (tb.torsion_error + ts.torsion_error)
        + rhs.abs() * (d / 2.0) * big.rel(k);
    let scale = 1.0 / big.lambda(k);
    let budget = ((lhs_err + c * rhs_err) / (c * rhs).abs().max(scale)).max(MIN_BUDGET);
    let mut verdict = known_verdict(lhs, c, rhs, budget, scale);
    let lower_ok = lhs >= -budget * scale;
    if !lower_ok {
        verdict = Verdict::Violated;
    }
    let label = format!("{}:{}", big.label, sub.label);
    let r = record(
        InequalityId::LemmaB,
        &label,
        Some(k),
        big.h,
        lhs,
        rhs,
        Some(c),
        budget,
        verdict,
        ThetaReference::Grid,
        scale,
    );
    Ok(if lower_ok {
        r
    } else {
        with_note(r, "left side negative beyond budget")
    })
}

/// `λ_o(ref)^{(d+2)/2} T(ref) ≤ λ_o(Ω)^{(d+2)/2} T(Ω)`, with the ball as
/// reference for order 1 and Θ for order 2.
pub fn check_kohler_jobin(q: &Quantities, r: &Reference, order: usize) -> Result<InequalityRecord> {
    let d = q.dim as f64;
    let p = (d + 2.0) / 2.0;
    let t = q.torsion()?;
    let (id, lhs, theta) = match order {
        1 => (InequalityId::KohlerJobin1, r.ball(1).powf(p) * r.ball_torsion, ThetaReference::None),
        2 => (
            InequalityId::KohlerJobin2,
            r.theta(2).powf(p) * r.theta_torsion,
            ThetaReference::Analytic,
        ),
        _ => {
            return Err(crate::error::Error::Argument(format!(
                "order must be 1 or 2, got {order}"
            )))
        }
    };
    let rhs = q.lambda(order).powf(p) * t.torsion;
    Ok(known(
        id,
        q,
        Some(order),
        (lhs, 1.0, rhs),
        error_budget(&[p * q.rel(order), t.torsion_error / t.torsion]),
        rhs,
        theta,
    ))
}

/// `T(Ω) − T(Ω∩Θ) ≤ (1/d + 1/(2^{2/d} d²)) |Ω \ Θ|`.
pub fn check_torvol(omega: &Quantities, cap: &Quantities, outside: (f64, f64)) -> Result<InequalityRecord> {
    let d = omega.dim as f64;
    let (to, tc) = (omega.torsion()?, cap.torsion()?);
    let c = 1.0 / d + 1.0 / (2f64.powf(2.0 / d) * d * d);
    let lhs = to.torsion - tc.torsion;
    let (rhs, rhs_err) = outside;
    let budget = error_budget(&[
        to.torsion_error / to.torsion,
        tc.torsion_error / tc.torsion,
        if rhs > 0.0 { rhs_err / omega.measure } else { 0.0 },
    ]);
    Ok(known(
        InequalityId::TorsionVolume,
        omega,
        None,
        (lhs, c, rhs),
        budget,
        to.torsion,
        ThetaReference::Grid,
    ))
}

/// Relative uncertainty of `lhs / (prefactor · gap^power)`, each denominator
/// floored at its own error so the terms stay bounded.
fn ratio_budget(lhs: f64, lhs_err: f64, gap: f64, gap_err: f64, power: f64, extra: &[f64]) -> f64 {
    let a = lhs_err / lhs.abs().max(lhs_err).max(f64::MIN_POSITIVE);
    let b = power * gap_err / gap.abs().max(gap_err).max(f64::MIN_POSITIVE);
    let rest: f64 = extra.iter().sum();
    (a + b + rest).max(MIN_BUDGET)
}

/// `λ₂(Ω) − λ₂(Θ)` with its error, and whether it is below zero beyond budget.
fn lambda2_gap(q: &Quantities, r: &Reference) -> (f64, f64, bool) {
    let gap = q.lambda(2) - r.theta(2);
    let err = q.err(2).max(MIN_BUDGET * q.lambda(2));
    (gap, err, gap < -err)
}

fn stability(
    id: InequalityId,
    q: &Quantities,
    r: &Reference,
    k: usize,
    lhs: f64,
    lhs_err: f64,
    gap_power: f64,
    lambda2_power: f64,
) -> InequalityRecord {
    let d = q.dim as f64;
    let (gap, gap_err, biased) = lambda2_gap(q, r);
    let rhs = (k as f64).powf(2.0 + 4.0 / d) * q.lambda(2).powf(lambda2_power) * gap.max(0.0).powf(gap_power);
    let budget = ratio_budget(lhs, lhs_err, gap, gap_err, gap_power, &[lambda2_power * q.rel(2)]);
    let verdict = if biased {
        Verdict::DiscretizationBias
    } else {
        Verdict::ConstantUnknown
    };
    let rec = record(
        id,
        &q.label,
        Some(k),
        q.h,
        lhs,
        rhs,
        None,
        budget,
        verdict,
        ThetaReference::Analytic,
        q.lambda(2),
    );
    if biased {
        with_note(rec, format!("λ₂ below the two-ball value by {:.3e}", -gap))
    } else {
        rec
    }
}

/// `|λ_k(Ω) − λ_k(Θ)|` against `k^{2+4/d} λ₂^{d/(d+1)} (λ₂(Ω) − λ₂(Θ))^{1/(d+1)}`.
pub fn check_theorem1(q: &Quantities, r: &Reference, k: usize) -> InequalityRecord {
    let d = q.dim as f64;
    let lhs = (q.lambda(k) - r.theta(k)).abs();
    stability(InequalityId::Theorem1, q, r, k, lhs, q.err(k), 1.0 / (d + 1.0), d / (d + 1.0))
}

/// `(λ_k(Ω) − λ_k(Θ))₊` against `k^{2+4/d} λ₂^{1/2} (λ₂(Ω) − λ₂(Θ))^{1/2}`.
pub fn check_theorem2bis(q: &Quantities, r: &Reference, k: usize) -> InequalityRecord {
    let lhs = (q.lambda(k) - r.theta(k)).max(0.0);
    stability(InequalityId::Theorem2bis, q, r, k, lhs, q.err(k), 0.5, 0.5)
}

/// `|λ_k(Ω⁺ ∪ Ω⁻) − λ_k(Θ)|` against the same right side as the positive-part form.
pub fn check_theorem2(
    q: &Quantities,
    union: &Quantities,
    dec: &DecompositionEval,
    r: &Reference,
    k: usize,
) -> InequalityRecord {
    let lhs = (union.lambda(k) - r.theta(k)).abs();
    let mut rec = stability(InequalityId::Theorem2, q, r, k, lhs, union.err(k), 0.5, 0.5);
    let (max1, max_err) = dec.max_lambda1();
    let slack = error_budget(&[max_err / max1, q.rel(2)]);
    let note = format!(
        "max λ₁(Ω±) = {max1:.6}, min λ₁(Ω±) = {:.6}, λ₂(Ω) = {:.6}",
        dec.min_lambda1(),
        q.lambda(2)
    );
    if max1 > q.lambda(2) * (1.0 + slack) {
        rec.verdict = Verdict::DecompositionFailure;
    }
    if rec.note.is_none() {
        rec.note = Some(note);
    }
    rec
}

/// For `|Ω⁻| < |Ω|/2 < |Ω⁺|`: `λ₂(Ω) − λ₁(B⁺) ≤ 2(λ₂(Ω) − λ₂(Θ))` where `B⁺`
/// is the ball of measure `|Ω⁺|`.
pub fn check_claim(q: &Quantities, dec: &DecompositionEval, r: &Reference, grid_measure: f64) -> InequalityRecord {
    let d = q.dim as f64;
    let (big, small) = if dec.measure_plus >= dec.measure_minus {
        (dec.measure_plus, dec.measure_minus)
    } else {
        (dec.measure_minus, dec.measure_plus)
    };
    let half = grid_measure / 2.0;
    let lambda2 = q.lambda(2);
    let rhs = lambda2 - r.theta(2);
    if !(small < half && half < big) {
        let rec = record(
            InequalityId::Claim,
            &q.label,
            Some(2),
            q.h,
            f64::NAN,
            rhs,
            Some(2.0),
            MIN_BUDGET,
            Verdict::NotApplicable,
            ThetaReference::Analytic,
            lambda2,
        );
        return with_note(rec, "pieces do not straddle half the measure");
    }
    let t = big / grid_measure;
    let lambda_b_plus = r.ball(1) * t.powf(-2.0 / d);
    let lhs = lambda2 - lambda_b_plus;
    let budget = error_budget(&[2.0 * q.rel(2)]);
    let rec = known(
        InequalityId::Claim,
        q,
        Some(2),
        (lhs, 2.0, rhs),
        budget,
        lambda2,
        ThetaReference::Analytic,
    );
    with_note(rec, format!("|Ω⁺|/|Ω| = {t:.6}"))
}

/// `max λ₁(Ω±) ≤ λ₂(Ω)`.
pub fn check_decomposition(q: &Quantities, dec: &DecompositionEval) -> InequalityRecord {
    let (max1, err) = dec.max_lambda1();
    let rhs = q.lambda(2);
    let rec = known(
        InequalityId::Decomposition,
        q,
        Some(2),
        (max1, 1.0, rhs),
        error_budget(&[err / max1, q.rel(2)]),
        rhs,
        ThetaReference::None,
    );
    let source = match dec.source {
        crate::nodal::DecompositionSource::Nodal => "nodal",
        crate::nodal::DecompositionSource::Components => "components",
    };
    with_note(rec, format!("{source}; relative gap {:.4e}", (max1 - rhs).abs() / rhs))
}

fn quantitative(
    id: InequalityId,
    q: &Quantities,
    k: usize,
    reference_value: f64,
    asym: &AsymmetryEval,
    power: f64,
    theta: ThetaReference,
) -> InequalityRecord {
    let lhs = q.lambda(k) / reference_value - 1.0;
    let lhs_err = q.err(k) / reference_value;
    let f = asym.value;
    let rhs = f.powf(power);
    let floor = ASYMMETRY_FLOOR.max(2.0 * asym.error);
    let budget = ratio_budget(lhs, lhs_err, f, asym.error, power, &[]);
    let lhs_zero = lhs.abs() <= error_budget(&[q.rel(k)]);
    if f <= floor {
        let (verdict, note) = if lhs_zero {
            (Verdict::Holds, "equality case")
        } else {
            (Verdict::ConstantUnknown, "asymmetry vanishes with a strict eigenvalue gap")
        };
        let mut rec = record(id, &q.label, Some(k), q.h, lhs, rhs, None, budget, verdict, theta, 1.0);
        if lhs_zero {
            rec.ratio = f64::NAN;
        } else {
            rec.ratio = f64::INFINITY;
        }
        return with_note(rec, note);
    }
    record(
        id,
        &q.label,
        Some(k),
        q.h,
        lhs,
        rhs,
        None,
        budget,
        Verdict::ConstantUnknown,
        theta,
        1.0,
    )
}

/// `(λ₁/λ₁(B) − 1)` against `𝓕₁²`, and `(λ₂/λ₂(Θ) − 1)` against `𝓕₂^{d+1}`.
pub fn check_qfk_qks(
    q: &Quantities,
    r: &Reference,
    f1: &AsymmetryEval,
    f2: &AsymmetryEval,
) -> (InequalityRecord, InequalityRecord) {
    (check_qfk(q, r, f1), check_qks(q, r, f2))
}

pub fn check_qfk(q: &Quantities, r: &Reference, f1: &AsymmetryEval) -> InequalityRecord {
    quantitative(
        InequalityId::QuantitativeFaberKrahn,
        q,
        1,
        r.ball(1),
        f1,
        2.0,
        ThetaReference::None,
    )
}

pub fn check_qks(q: &Quantities, r: &Reference, f2: &AsymmetryEval) -> InequalityRecord {
    let d = q.dim as f64;
    quantitative(
        InequalityId::QuantitativeKrahnSzego,
        q,
        2,
        r.theta(2),
        f2,
        d + 1.0,
        ThetaReference::Analytic,
    )
}

/// `|λ_k(Ω) − λ_k(B)|` against `k^{2+4/d} λ₁^{1/2} (λ₁(Ω) − λ₁(B))^{1/2}`.
pub fn check_lambda1_stability(q: &Quantities, r: &Reference, k: usize) -> InequalityRecord {
    let d = q.dim as f64;
    let lhs = (q.lambda(k) - r.ball(k)).abs();
    let gap = q.lambda(1) - r.ball(1);
    let gap_err = q.err(1).max(MIN_BUDGET * q.lambda(1));
    let rhs = (k as f64).powf(2.0 + 4.0 / d) * q.lambda(1).sqrt() * gap.max(0.0).sqrt();
    let budget = ratio_budget(lhs, q.err(k), gap, gap_err, 0.5, &[0.5 * q.rel(1)]);
    record(
        InequalityId::Lambda1Stability,
        &q.label,
        Some(k),
        q.h,
        lhs,
        rhs,
        None,
        budget,
        Verdict::ConstantUnknown,
        ThetaReference::None,
        q.lambda(1),
    )
}

/// Exploratory: `((T(Ω) − T(Ω⁺∪Ω⁻))/T(Ω))²` against `(λ₂(Ω) − λ₂(Θ))/λ₂(Θ)`,
/// only where `λ₂(Ω) ≤ 2λ₂(Θ)`.
pub fn torsion_krahn_szego(q: &Quantities, union: &Quantities, r: &Reference) -> Result<InequalityRecord> {
    let (t, tu) = (q.torsion()?, union.torsion()?);
    let lhs = ((t.torsion - tu.torsion) / t.torsion).powi(2);
    let rhs = (q.lambda(2) - r.theta(2)) / r.theta(2);
    let applicable = q.lambda(2) <= 2.0 * r.theta(2);
    let budget = error_budget(&[2.0 * (t.torsion_error + tu.torsion_error) / t.torsion, q.rel(2)]);
    let verdict = if applicable {
        Verdict::Exploratory
    } else {
        Verdict::NotApplicable
    };
    Ok(record(
        InequalityId::TorsionKrahnSzego,
        &q.label,
        Some(2),
        q.h,
        lhs,
        rhs,
        None,
        budget,
        verdict,
        ThetaReference::Analytic,
        1.0,
    ))
}
