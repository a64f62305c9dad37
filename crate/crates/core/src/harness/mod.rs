//! Evaluation of eigenvalue and torsion inequalities on grid domains.
//!
//! Every check is normalized to the shape `lhs ≤ C · rhs_constant_free`.
//! Checks with an explicit constant get a verdict; checks whose constant is
//! not explicit record the ratio `lhs / rhs_constant_free` for aggregation.

mod checks;
mod corpus;
mod eval;
mod sweep;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

pub use checks::*;
pub use corpus::{default_corpus, load_corpus, Corpus};
pub use eval::{evaluate, AsymmetryEval, DecompositionEval, DomainEval, DomainSpec, HarnessOptions, Quantities};
pub use sweep::{records_for, sweep, Aggregate, DomainFailure, DomainSummary, SweepReport};

/// Smallest error budget applied to any record.
pub const MIN_BUDGET: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "&'static str")]
pub enum InequalityId {
    FaberKrahn,
    KrahnSzego,
    SaintVenant,
    Talenti,
    ChengYang,
    LemmaB,
    KohlerJobin1,
    KohlerJobin2,
    TorsionVolume,
    Claim,
    Decomposition,
    Theorem1,
    Theorem2,
    Theorem2bis,
    Lambda1Stability,
    QuantitativeFaberKrahn,
    QuantitativeKrahnSzego,
    TorsionKrahnSzego,
}

impl InequalityId {
    pub const ALL: [InequalityId; 18] = [
        InequalityId::FaberKrahn,
        InequalityId::KrahnSzego,
        InequalityId::SaintVenant,
        InequalityId::Talenti,
        InequalityId::ChengYang,
        InequalityId::LemmaB,
        InequalityId::KohlerJobin1,
        InequalityId::KohlerJobin2,
        InequalityId::TorsionVolume,
        InequalityId::Claim,
        InequalityId::Decomposition,
        InequalityId::Theorem1,
        InequalityId::Theorem2,
        InequalityId::Theorem2bis,
        InequalityId::Lambda1Stability,
        InequalityId::QuantitativeFaberKrahn,
        InequalityId::QuantitativeKrahnSzego,
        InequalityId::TorsionKrahnSzego,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            InequalityId::FaberKrahn => "faber-krahn",
            InequalityId::KrahnSzego => "krahn-szego",
            InequalityId::SaintVenant => "saint-venant",
            InequalityId::Talenti => "talenti",
            InequalityId::ChengYang => "cheng-yang",
            InequalityId::LemmaB => "lemma-b",
            InequalityId::KohlerJobin1 => "kohler-jobin-1",
            InequalityId::KohlerJobin2 => "kohler-jobin-2",
            InequalityId::TorsionVolume => "torsion-volume",
            InequalityId::Claim => "claim",
            InequalityId::Decomposition => "decomposition",
            InequalityId::Theorem1 => "theorem-1",
            InequalityId::Theorem2 => "theorem-2",
            InequalityId::Theorem2bis => "theorem-2bis",
            InequalityId::Lambda1Stability => "lambda1-stability",
            InequalityId::QuantitativeFaberKrahn => "quantitative-faber-krahn",
            InequalityId::QuantitativeKrahnSzego => "quantitative-krahn-szego",
            InequalityId::TorsionKrahnSzego => "torsion-krahn-szego",
        }
    }

    /// Whether the constant is explicit, so that a violation is meaningful.
    pub fn has_known_constant(&self) -> bool {
        !matches!(
            self,
            InequalityId::Theorem1
                | InequalityId::Theorem2
                | InequalityId::Theorem2bis
                | InequalityId::Lambda1Stability
                | InequalityId::QuantitativeFaberKrahn
                | InequalityId::QuantitativeKrahnSzego
                | InequalityId::TorsionKrahnSzego
        )
    }

    /// Checks that need the torsion function of the domain.
    pub(crate) fn needs_torsion(&self) -> bool {
        matches!(
            self,
            InequalityId::SaintVenant
                | InequalityId::Talenti
                | InequalityId::KohlerJobin1
                | InequalityId::KohlerJobin2
                | InequalityId::TorsionVolume
                | InequalityId::LemmaB
                | InequalityId::TorsionKrahnSzego
        )
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl From<InequalityId> for &'static str {
    fn from(id: InequalityId) -> Self {
        id.name()
    }
}

impl TryFrom<String> for InequalityId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}

impl FromStr for InequalityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        InequalityId::ALL
            .into_iter()
            .find(|i| i.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown inequality `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    HoldsWithinBudget,
    Violated,
    ConstantUnknown,
    NotApplicable,
    Exploratory,
    /// `λ₂(Ω)` fell below `λ₂(Θ)` beyond the budget: the discretization is
    /// too coarse for the check to mean anything.
    DiscretizationBias,
    /// The decomposition did not satisfy `max λ₁(Ω±) ≤ λ₂(Ω)`.
    DecompositionFailure,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::HoldsWithinBudget => "holds-within-budget",
            Verdict::Violated => "violated",
            Verdict::ConstantUnknown => "constant-unknown",
            Verdict::NotApplicable => "not-applicable",
            Verdict::Exploratory => "exploratory",
            Verdict::DiscretizationBias => "discretization-bias",
            Verdict::DecompositionFailure => "decomposition-failure",
        }
    }

    /// Verdicts that make a run fail.
    pub fn is_failure(&self) -> bool {
        matches!(
            self,
            Verdict::Violated | Verdict::DiscretizationBias | Verdict::DecompositionFailure
        )
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where the Θ side of a record comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaReference {
    /// Closed-form two-ball values.
    Analytic,
    /// A rasterized optimal two-ball witness.
    Grid,
    None,
}

impl fmt::Display for ThetaReference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThetaReference::Analytic => "analytic",
            ThetaReference::Grid => "grid",
            ThetaReference::None => "none",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityRecord {
    pub inequality_id: InequalityId,
    pub domain: String,
    pub k: Option<usize>,
    pub h: f64,
    pub lhs: f64,
    pub rhs_constant_free: f64,
    pub known_constant: Option<f64>,
    /// `lhs / rhs_constant_free`; NaN for `0/0`, infinite for `x/0`.
    pub ratio: f64,
    pub error_budget: f64,
    pub verdict: Verdict,
    pub theta_reference: ThetaReference,
    /// Magnitude against which the budget is applied when the right side vanishes.
    pub scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

pub(crate) fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        lhs / rhs
    } else if lhs == 0.0 {
        f64::NAN
    } else {
        f64::INFINITY
    }
}

/// `max(Σ relative errors, MIN_BUDGET)`.
pub fn error_budget(relative_errors: &[f64]) -> f64 {
    relative_errors.iter().sum::<f64>().max(MIN_BUDGET)
}

/// Verdict for `lhs ≤ c · rhs` with a relative budget. The slack is
/// `budget · max(|c · rhs|, scale)`, so a vanishing right side still gets a
/// meaningful tolerance.
pub fn known_verdict(lhs: f64, c: f64, rhs: f64, budget: f64, scale: f64) -> Verdict {
    let bound = c * rhs;
    if !lhs.is_finite() || !bound.is_finite() {
        return Verdict::Violated;
    }
    if lhs <= bound {
        Verdict::Holds
    } else if lhs <= bound + budget * bound.abs().max(scale.abs()) {
        Verdict::HoldsWithinBudget
    } else {
        Verdict::Violated
    }
}
