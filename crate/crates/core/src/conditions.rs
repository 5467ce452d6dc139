//! Which ordering results apply to a model, and whether their conclusions
//! hold on the exact risk differences.
//!
//! Every result is a probability premise set from the [catalog] plus,
//! for most of them, one of two outcome-chain cases. Premises are checked
//! on raw model fields with zero tolerance (equalities with
//! [`EQ_TOL`](crate::model::EQ_TOL)); conclusions are checked on derived
//! quantities with [`CONCLUSION_SLACK`].
//!
//! [catalog]: crate::model::catalog

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exact::JointTable;
use crate::model::{ConstraintSet, EffectChain, OutcomeTable, ValidatedModel};

/// Slack absorbed when checking a predicted inequality between derived
/// quantities.
pub const CONCLUSION_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Monotonicity {
    NonDecreasing,
    NonIncreasing,
    Constant,
    #[serde(rename = "none")]
    NonMonotone,
}

impl Monotonicity {
    pub fn of(table: &OutcomeTable) -> Self {
        let treated = table.treated_effect();
        let untreated = table.untreated_effect();
        if treated == 0.0 && untreated == 0.0 {
            Monotonicity::Constant
        } else if treated >= 0.0 && untreated >= 0.0 {
            Monotonicity::NonDecreasing
        } else if treated <= 0.0 && untreated <= 0.0 {
            Monotonicity::NonIncreasing
        } else {
            Monotonicity::NonMonotone
        }
    }

    pub fn is_non_decreasing(self) -> bool {
        matches!(self, Monotonicity::NonDecreasing | Monotonicity::Constant)
    }

    pub fn is_non_increasing(self) -> bool {
        matches!(self, Monotonicity::NonIncreasing | Monotonicity::Constant)
    }
}

pub fn monotone_in_c(model: &ValidatedModel) -> Monotonicity {
    Monotonicity::of(&model.outcome_table())
}

pub fn monotone_in_d(model: &ValidatedModel) -> Result<Monotonicity> {
    Ok(Monotonicity::of(
        &JointTable::new(model).proxy_outcome_table()?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    #[serde(rename = "rd_true")]
    True,
    #[serde(rename = "rd_obs")]
    Obs,
    #[serde(rename = "rd_crude")]
    Crude,
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantity::True => "rd_true",
            Quantity::Obs => "rd_obs",
            Quantity::Crude => "rd_crude",
        })
    }
}

/// A predicted conclusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    /// `lhs >= rhs`
    AtLeast(Quantity, Quantity),
    /// `rd_obs` lies between `rd_true` and `rd_crude`.
    Between,
    /// The confounder-side chain holds for `E[Y|A,C]` iff the proxy-side
    /// chain holds for `E[Y|A,D]`.
    Transfer {
        confounder_side: EffectChain,
        proxy_side: EffectChain,
    },
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Claim::AtLeast(l, r) => write!(f, "{l} >= {r}"),
            Claim::Between => f.write_str("rd_obs between rd_true and rd_crude"),
            Claim::Transfer {
                confounder_side,
                proxy_side,
            } => write!(
                f,
                "E[Y|A,C] {} chain <=> E[Y|A,D] {} chain",
                confounder_side.suffix(),
                proxy_side.suffix()
            ),
        }
    }
}

impl Claim {
    fn needs_proxy(self) -> bool {
        !matches!(
            self,
            Claim::AtLeast(
                Quantity::True | Quantity::Crude,
                Quantity::True | Quantity::Crude
            )
        )
    }
}

/// The shipped ordering results. Codes (`t1` ... `t12`, `c4` ... `c7`) are
/// the identifiers used in reports and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ResultId {
    /// Symmetric treatment and proxy with identical response rates, chain
    /// cases give a full ordering.
    #[serde(rename = "t1")]
    MatchedSymmetricOrdering,
    /// Symmetric responses above one half: betweenness.
    #[serde(rename = "t2")]
    SymmetricAboveBetweenness,
    /// Symmetric responses below one half: betweenness.
    #[serde(rename = "t3")]
    SymmetricBelowBetweenness,
    #[serde(rename = "c4")]
    SymmetricAboveOrdering,
    #[serde(rename = "c5")]
    SymmetricBelowOrdering,
    /// Chain on `E[Y|A,C]` iff same chain on `E[Y|A,D]`.
    #[serde(rename = "c6")]
    SymmetricAboveTransfer,
    /// Chain on `E[Y|A,C]` iff reversed chain on `E[Y|A,D]`.
    #[serde(rename = "c7")]
    SymmetricBelowTransfer,
    /// Skewed treatment, symmetric proxy: `rd_true` bounded by both others.
    #[serde(rename = "t8")]
    SkewedTreatmentBound,
    #[serde(rename = "t9")]
    SkewedAboveBound,
    #[serde(rename = "t10")]
    SkewedBelowBound,
    /// `p(c) <= 0.5` with skewed treatment: crude-only bound.
    #[serde(rename = "t11")]
    LowPrevalenceCrudeBound,
    /// `p(c) >= 0.5` with skewed treatment below one half: crude-only bound.
    #[serde(rename = "t12")]
    HighPrevalenceCrudeBound,
}

use Quantity::{Crude, Obs, True};

const fn ge(l: Quantity, r: Quantity) -> Claim {
    Claim::AtLeast(l, r)
}

impl ResultId {
    pub const ALL: [ResultId; 12] = [
        ResultId::MatchedSymmetricOrdering,
        ResultId::SymmetricAboveBetweenness,
        ResultId::SymmetricBelowBetweenness,
        ResultId::SymmetricAboveOrdering,
        ResultId::SymmetricBelowOrdering,
        ResultId::SymmetricAboveTransfer,
        ResultId::SymmetricBelowTransfer,
        ResultId::SkewedTreatmentBound,
        ResultId::SkewedAboveBound,
        ResultId::SkewedBelowBound,
        ResultId::LowPrevalenceCrudeBound,
        ResultId::HighPrevalenceCrudeBound,
    ];

    pub fn code(self) -> &'static str {
        match self {
            ResultId::MatchedSymmetricOrdering => "t1",
            ResultId::SymmetricAboveBetweenness => "t2",
            ResultId::SymmetricBelowBetweenness => "t3",
            ResultId::SymmetricAboveOrdering => "c4",
            ResultId::SymmetricBelowOrdering => "c5",
            ResultId::SymmetricAboveTransfer => "c6",
            ResultId::SymmetricBelowTransfer => "c7",
            ResultId::SkewedTreatmentBound => "t8",
            ResultId::SkewedAboveBound => "t9",
            ResultId::SkewedBelowBound => "t10",
            ResultId::LowPrevalenceCrudeBound => "t11",
            ResultId::HighPrevalenceCrudeBound => "t12",
        }
    }

    /// Name of the probability premise set in the catalog.
    pub fn premise_set(self) -> &'static str {
        match self {
            ResultId::MatchedSymmetricOrdering => "t1",
            ResultId::SymmetricAboveBetweenness
            | ResultId::SymmetricAboveOrdering
            | ResultId::SymmetricAboveTransfer => "t2",
            ResultId::SymmetricBelowBetweenness
            | ResultId::SymmetricBelowOrdering
            | ResultId::SymmetricBelowTransfer => "t3",
            ResultId::SkewedTreatmentBound => "t8",
            ResultId::SkewedAboveBound => "t9",
            ResultId::SkewedBelowBound => "t10",
            ResultId::LowPrevalenceCrudeBound => "t11",
            ResultId::HighPrevalenceCrudeBound => "t12",
        }
    }

    /// Whether the conclusions depend on an outcome-chain case.
    pub fn is_chained(self) -> bool {
        !matches!(
            self,
            ResultId::SymmetricAboveBetweenness
                | ResultId::SymmetricBelowBetweenness
                | ResultId::SymmetricAboveTransfer
                | ResultId::SymmetricBelowTransfer
        )
    }

    /// Predicted claims for a chain case (`None` for unchained results).
    pub fn claims(self, case: Option<EffectChain>) -> Vec<Claim> {
        use EffectChain::{Decreasing, Increasing};
        let transfer = |c, p| Claim::Transfer {
            confounder_side: c,
            proxy_side: p,
        };
        match (self, case) {
            (ResultId::SymmetricAboveBetweenness | ResultId::SymmetricBelowBetweenness, _) => {
                vec![Claim::Between]
            }
            (ResultId::SymmetricAboveTransfer, _) => vec![
                transfer(Increasing, Increasing),
                transfer(Decreasing, Decreasing),
            ],
            (ResultId::SymmetricBelowTransfer, _) => vec![
                transfer(Increasing, Decreasing),
                transfer(Decreasing, Increasing),
            ],
            (_, None) => vec![],
            (
                ResultId::MatchedSymmetricOrdering | ResultId::SymmetricAboveOrdering,
                Some(Increasing),
            )
            | (ResultId::SymmetricBelowOrdering, Some(Decreasing)) => {
                vec![ge(Crude, Obs), ge(Obs, True)]
            }
            (
                ResultId::MatchedSymmetricOrdering | ResultId::SymmetricAboveOrdering,
                Some(Decreasing),
            )
            | (ResultId::SymmetricBelowOrdering, Some(Increasing)) => {
                vec![ge(Obs, Crude), ge(True, Obs)]
            }
            (ResultId::SkewedTreatmentBound | ResultId::SkewedAboveBound, Some(Increasing))
            | (ResultId::SkewedBelowBound, Some(Decreasing)) => {
                vec![ge(Crude, True), ge(Obs, True)]
            }
            (ResultId::SkewedTreatmentBound | ResultId::SkewedAboveBound, Some(Decreasing))
            | (ResultId::SkewedBelowBound, Some(Increasing)) => {
                vec![ge(True, Crude), ge(True, Obs)]
            }
            (ResultId::LowPrevalenceCrudeBound, Some(Increasing))
            | (ResultId::HighPrevalenceCrudeBound, Some(Decreasing)) => vec![ge(Crude, True)],
            (ResultId::LowPrevalenceCrudeBound, Some(Decreasing))
            | (ResultId::HighPrevalenceCrudeBound, Some(Increasing)) => vec![ge(True, Crude)],
        }
    }

    fn needs_proxy(self) -> bool {
        let case = self.is_chained().then_some(EffectChain::Increasing);
        self.claims(case).iter().any(|c| c.needs_proxy())
    }
}

impl fmt::Display for ResultId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// One claim predicted by an applicable result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub result: ResultId,
    /// The outcome-chain case the claim belongs to.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<EffectChain>,
    pub claim: Claim,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultEntry {
    pub result: ResultId,
    /// Probability premises hold.
    pub premises_hold: bool,
    /// Chain cases whose premise holds (chained results only).
    pub cases: Vec<EffectChain>,
    /// Premises hold (including a chain case where required) and the
    /// quantities the conclusions mention are defined.
    pub applicable: bool,
    pub predictions: Vec<Prediction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub monotone_in_c: Monotonicity,
    /// Absent when `E[Y|A,D]` is undefined.
    pub monotone_in_d: Option<Monotonicity>,
    pub results: Vec<ResultEntry>,
}

impl ConditionReport {
    pub fn entry(&self, id: ResultId) -> &ResultEntry {
        self.results
            .iter()
            .find(|e| e.result == id)
            .expect("report covers every result")
    }

    pub fn is_applicable(&self, id: ResultId) -> bool {
        self.entry(id).applicable
    }

    pub fn predictions(&self) -> impl Iterator<Item = &Prediction> {
        self.results.iter().flat_map(|e| e.predictions.iter())
    }
}

pub fn classify(model: &ValidatedModel) -> ConditionReport {
    let table = JointTable::new(model);
    let proxy_defined = table.check_conditioning().is_ok();
    let crude_defined = table.p_a(true) > 0.0 && table.p_a(false) > 0.0;
    let outcomes = model.outcome_table();

    let results = ResultId::ALL
        .iter()
        .map(|&id| {
            let premises = ConstraintSet::named(id.premise_set()).expect("shipped premise set");
            let premises_hold = model.satisfies(&premises);
            let cases: Vec<EffectChain> = if id.is_chained() && premises_hold {
                EffectChain::BOTH
                    .into_iter()
                    .filter(|c| c.holds(&outcomes))
                    .collect()
            } else {
                vec![]
            };
            let defined = if id.needs_proxy() {
                proxy_defined
            } else {
                crude_defined
            };
            let applicable = premises_hold && defined && (!id.is_chained() || !cases.is_empty());
            let predictions = if !applicable {
                vec![]
            } else if id.is_chained() {
                cases
                    .iter()
                    .flat_map(|&case| {
                        id.claims(Some(case))
                            .into_iter()
                            .map(move |claim| Prediction {
                                result: id,
                                case: Some(case),
                                claim,
                            })
                    })
                    .collect()
            } else {
                id.claims(None)
                    .into_iter()
                    .map(|claim| Prediction {
                        result: id,
                        case: None,
                        claim,
                    })
                    .collect()
            };
            ResultEntry {
                result: id,
                premises_hold,
                cases,
                applicable,
                predictions,
            }
        })
        .collect();

    ConditionReport {
        monotone_in_c: Monotonicity::of(&outcomes),
        monotone_in_d: table
            .proxy_outcome_table()
            .ok()
            .filter(|_| proxy_defined)
            .map(|t| Monotonicity::of(&t)),
        results,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub result: ResultId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<EffectChain>,
    pub claim: Claim,
    pub statement: String,
    /// Signed slack of the claim; negative means it is violated.
    pub margin: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationResult {
    pub rd_true: f64,
    pub rd_obs: Option<f64>,
    pub rd_crude: Option<f64>,
    pub checks: Vec<Check>,
}

impl VerificationResult {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

struct Values {
    rd_true: f64,
    rd_obs: Option<f64>,
    rd_crude: Option<f64>,
    proxy_table: Option<OutcomeTable>,
}

impl Values {
    fn get(&self, q: Quantity) -> Option<f64> {
        match q {
            Quantity::True => Some(self.rd_true),
            Quantity::Obs => self.rd_obs,
            Quantity::Crude => self.rd_crude,
        }
    }
}

fn claim_margin(claim: Claim, values: &Values, outcomes: &OutcomeTable) -> Option<f64> {
    match claim {
        Claim::AtLeast(l, r) => Some(values.get(l)? - values.get(r)?),
        Claim::Between => {
            let (t, o, c) = (values.rd_true, values.rd_obs?, values.rd_crude?);
            Some((o - t.min(c)).min(t.max(c) - o))
        }
        Claim::Transfer {
            confounder_side,
            proxy_side,
        } => {
            let proxy_margin = proxy_side.margin(values.proxy_table.as_ref()?);
            // the proxy side must hold exactly when the confounder side does
            if confounder_side.holds(outcomes) {
                Some(proxy_margin)
            } else {
                Some(-proxy_margin)
            }
        }
    }
}

/// Signed slack of each claim on `model`, failing if a quantity a claim
/// mentions is undefined.
pub fn claim_margins(model: &ValidatedModel, claims: &[Claim]) -> Result<Vec<f64>> {
    let table = JointTable::new(model);
    let needs_proxy = claims.iter().any(|c| c.needs_proxy());
    if needs_proxy {
        table.check_conditioning()?;
    }
    let values = Values {
        rd_true: table.rd_true(),
        rd_obs: if needs_proxy {
            Some(table.rd_obs()?)
        } else {
            None
        },
        rd_crude: Some(table.rd_crude()?),
        proxy_table: if needs_proxy {
            Some(table.proxy_outcome_table()?)
        } else {
            None
        },
    };
    let outcomes = model.outcome_table();
    Ok(claims
        .iter()
        .map(|&c| claim_margin(c, &values, &outcomes).expect("quantities computed above"))
        .collect())
}

/// Checks every prediction in `report` against the exact values of `model`.
pub fn verify(model: &ValidatedModel, report: &ConditionReport) -> VerificationResult {
    let table = JointTable::new(model);
    let proxy_defined = table.check_conditioning().is_ok();
    let values = Values {
        rd_true: table.rd_true(),
        rd_obs: proxy_defined.then(|| table.rd_obs().ok()).flatten(),
        rd_crude: table.rd_crude().ok(),
        proxy_table: proxy_defined
            .then(|| table.proxy_outcome_table().ok())
            .flatten(),
    };
    let outcomes = model.outcome_table();
    let checks = report
        .predictions()
        .map(|p| {
            // applicable predictions only mention defined quantities
            let margin = claim_margin(p.claim, &values, &outcomes).unwrap_or(f64::NEG_INFINITY);
            Check {
                result: p.result,
                case: p.case,
                claim: p.claim,
                statement: p.claim.to_string(),
                margin,
                passed: margin >= -CONCLUSION_SLACK,
            }
        })
        .collect();
    VerificationResult {
        rd_true: values.rd_true,
        rd_obs: values.rd_obs,
        rd_crude: values.rd_crude,
        checks,
    }
}
