//! Parameterization of the binary confounder / binary proxy model.
//!
//! The joint distribution factorizes as `p(C) p(D|C) p(A|C) p(Y|A,C)`: a
//! latent binary confounder `C` drives the treatment `A`, the outcome `Y` and
//! a proxy `D` that is independent of `A` and `Y` given `C`. A
//! [`DiscreteModel`] carries the five probabilities and the four conditional
//! outcome means that pin the distribution down as far as risk differences
//! are concerned.
//!
//! [`ConstraintSet`]s are named premise sets over these fields. They are
//! shared verbatim by the classifier, the sampler and the counterexample
//! search, and each one stores a witness model proving it is satisfiable.

use std::fmt;
use std::ops::Deref;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for equality premises such as `p(c) = 0.5`.
pub const EQ_TOL: f64 = 1e-12;

/// Whether outcome means are probabilities (binary `Y`) or arbitrary reals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutcomeKind {
    #[default]
    Binary,
    General,
}

/// Full parameterization of the factorized joint distribution.
///
/// Field names are the on-disk JSON schema of a model file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteModel {
    /// p(c)
    pub p_c: f64,
    /// p(a | c)
    pub p_a_given_c: f64,
    /// p(a | c̄)
    pub p_a_given_nc: f64,
    /// p(d | c)
    pub p_d_given_c: f64,
    /// p(d | c̄)
    pub p_d_given_nc: f64,
    /// E[Y | a, c]
    pub ey_ac: f64,
    /// E[Y | a, c̄]
    pub ey_anc: f64,
    /// E[Y | ā, c]
    pub ey_nac: f64,
    /// E[Y | ā, c̄]
    pub ey_nanc: f64,
    #[serde(default)]
    pub outcome_kind: OutcomeKind,
}

impl DiscreteModel {
    /// Binary-outcome model from the five probabilities and the means
    /// `(E[Y|a,c], E[Y|a,c̄], E[Y|ā,c], E[Y|ā,c̄])`.
    pub fn new(
        p_c: f64,
        (p_a_given_c, p_a_given_nc): (f64, f64),
        (p_d_given_c, p_d_given_nc): (f64, f64),
        [ey_ac, ey_anc, ey_nac, ey_nanc]: [f64; 4],
    ) -> Self {
        DiscreteModel {
            p_c,
            p_a_given_c,
            p_a_given_nc,
            p_d_given_c,
            p_d_given_nc,
            ey_ac,
            ey_anc,
            ey_nac,
            ey_nanc,
            outcome_kind: OutcomeKind::Binary,
        }
    }

    pub fn with_outcome_kind(mut self, kind: OutcomeKind) -> Self {
        self.outcome_kind = kind;
        self
    }

    pub fn with_means(mut self, [ac, anc, nac, nanc]: [f64; 4]) -> Self {
        self.ey_ac = ac;
        self.ey_anc = anc;
        self.ey_nac = nac;
        self.ey_nanc = nanc;
        self
    }

    pub fn validate(self) -> Result<ValidatedModel> {
        let probabilities = [
            ("p_c", self.p_c),
            ("p_a_given_c", self.p_a_given_c),
            ("p_a_given_nc", self.p_a_given_nc),
            ("p_d_given_c", self.p_d_given_c),
            ("p_d_given_nc", self.p_d_given_nc),
        ];
        for (field, value) in probabilities {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::OutOfRange { field, value });
            }
        }
        let means = [
            ("ey_ac", self.ey_ac),
            ("ey_anc", self.ey_anc),
            ("ey_nac", self.ey_nac),
            ("ey_nanc", self.ey_nanc),
        ];
        for (field, value) in means {
            let ok = match self.outcome_kind {
                OutcomeKind::Binary => (0.0..=1.0).contains(&value),
                OutcomeKind::General => value.is_finite(),
            };
            if !ok {
                return Err(Error::OutOfRange { field, value });
            }
        }
        Ok(ValidatedModel(self))
    }

    /// The conditional outcome means as a table indexed by treatment and
    /// confounder value.
    pub fn outcome_table(&self) -> OutcomeTable {
        OutcomeTable {
            treated_with: self.ey_ac,
            treated_without: self.ey_anc,
            untreated_with: self.ey_nac,
            untreated_without: self.ey_nanc,
        }
    }

    /// Youden index of the proxy, `p(d|c) + p(d̄|c̄) - 1`.
    pub fn youden(&self) -> f64 {
        self.p_d_given_c - self.p_d_given_nc
    }
}

/// A [`DiscreteModel`] whose invariants have been checked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ValidatedModel(DiscreteModel);

impl ValidatedModel {
    pub fn into_inner(self) -> DiscreteModel {
        self.0
    }

    pub fn satisfies(&self, constraints: &ConstraintSet) -> bool {
        constraints.premises().hold(self)
    }
}

impl Deref for ValidatedModel {
    type Target = DiscreteModel;

    fn deref(&self) -> &DiscreteModel {
        &self.0
    }
}

impl<'de> Deserialize<'de> for ValidatedModel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        DiscreteModel::deserialize(deserializer)?
            .validate()
            .map_err(serde::de::Error::custom)
    }
}

/// Free-function form of [`DiscreteModel::validate`].
pub fn validate(model: DiscreteModel) -> Result<ValidatedModel> {
    model.validate()
}

/// Free-function form of [`ValidatedModel::satisfies`].
pub fn satisfies(model: &ValidatedModel, constraints: &ConstraintSet) -> bool {
    model.satisfies(constraints)
}

/// Reads a model file. Syntax errors and range violations are reported
/// separately so callers can tell a malformed file from a bad model.
pub fn read_model_file(path: &Path) -> std::io::Result<serde_json::Result<DiscreteModel>> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text))
}

/// Four conditional means `E[Y | A, X]` for a binary `X` (either the
/// confounder or the proxy).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeTable {
    /// E[Y | a, x]
    pub treated_with: f64,
    /// E[Y | a, x̄]
    pub treated_without: f64,
    /// E[Y | ā, x]
    pub untreated_with: f64,
    /// E[Y | ā, x̄]
    pub untreated_without: f64,
}

impl OutcomeTable {
    /// `E[Y|a,x] - E[Y|a,x̄]`
    pub fn treated_effect(&self) -> f64 {
        self.treated_with - self.treated_without
    }

    /// `E[Y|ā,x] - E[Y|ā,x̄]`
    pub fn untreated_effect(&self) -> f64 {
        self.untreated_with - self.untreated_without
    }
}

/// Ordering premise on the effect of the binary covariate on the outcome
/// within each treatment arm.
///
/// With `t = E[Y|a,x] - E[Y|a,x̄]` and `u = E[Y|ā,x̄] - E[Y|ā,x]`:
/// `Increasing` is `t >= u >= 0` and `Decreasing` is `t <= u <= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EffectChain {
    Increasing,
    Decreasing,
}

impl EffectChain {
    pub const BOTH: [EffectChain; 2] = [EffectChain::Increasing, EffectChain::Decreasing];

    /// Signed slack of the chain: nonnegative iff it holds.
    pub fn margin(self, table: &OutcomeTable) -> f64 {
        let t = table.treated_effect();
        let u = -table.untreated_effect();
        match self {
            EffectChain::Increasing => (t - u).min(u),
            EffectChain::Decreasing => (u - t).min(-u),
        }
    }

    pub fn holds(self, table: &OutcomeTable) -> bool {
        self.margin(table) >= 0.0
    }

    pub fn reversed(self) -> Self {
        match self {
            EffectChain::Increasing => EffectChain::Decreasing,
            EffectChain::Decreasing => EffectChain::Increasing,
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            EffectChain::Increasing => "pos",
            EffectChain::Decreasing => "neg",
        }
    }
}

/// Premise on `p(c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorConstraint {
    /// `p(c) = 0.5`
    Half,
    /// `p(c) <= 0.5`
    AtMostHalf,
    /// `p(c) >= 0.5`
    AtLeastHalf,
}

/// Which side of 0.5 a response-probability premise lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HalfSide {
    Above,
    Below,
}

/// Premise on how a binary child `X` (treatment or proxy) responds to `C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResponseConstraint {
    /// `p(x|c) = p(x̄|c̄)`, with `p(x|c) >= 0.5` (above) or `<= 0.5` (below).
    Symmetric(HalfSide),
    /// Above: `p(x̄|c̄) >= p(x|c) >= 0.5`.
    /// Below: `p(x|c) <= p(x̄|c̄) <= 0.5`.
    Skewed(HalfSide),
}

impl ResponseConstraint {
    /// `given_c = p(x|c)`, `given_nc = p(x|c̄)`.
    pub fn holds(self, given_c: f64, given_nc: f64) -> bool {
        let specificity = 1.0 - given_nc;
        match self {
            ResponseConstraint::Symmetric(side) => {
                (given_c - specificity).abs() <= EQ_TOL
                    && match side {
                        HalfSide::Above => given_c >= 0.5,
                        HalfSide::Below => given_c <= 0.5,
                    }
            }
            ResponseConstraint::Skewed(HalfSide::Above) => specificity >= given_c && given_c >= 0.5,
            ResponseConstraint::Skewed(HalfSide::Below) => {
                given_c <= specificity && specificity <= 0.5
            }
        }
    }

    fn describe(self, x: &str) -> String {
        match self {
            ResponseConstraint::Symmetric(HalfSide::Above) => {
                format!("p({x}|c) = p(~{x}|~c) >= 0.5")
            }
            ResponseConstraint::Symmetric(HalfSide::Below) => {
                format!("p({x}|c) = p(~{x}|~c) <= 0.5")
            }
            ResponseConstraint::Skewed(HalfSide::Above) => {
                format!("p(~{x}|~c) >= p({x}|c) >= 0.5")
            }
            ResponseConstraint::Skewed(HalfSide::Below) => {
                format!("p({x}|c) <= p(~{x}|~c) <= 0.5")
            }
        }
    }
}

/// The logical content of a constraint set, slot by slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Premises {
    pub prior: Option<PriorConstraint>,
    pub treatment: Option<ResponseConstraint>,
    pub proxy: Option<ResponseConstraint>,
    /// `p(a|c) = p(d|c)` and `p(a|c̄) = p(d|c̄)`: the proxy responds to the
    /// confounder exactly like the treatment does.
    pub proxy_matches_treatment: bool,
    pub outcome: Option<EffectChain>,
}

impl Premises {
    pub fn hold(&self, model: &DiscreteModel) -> bool {
        let prior_ok = match self.prior {
            None => true,
            Some(PriorConstraint::Half) => (model.p_c - 0.5).abs() <= EQ_TOL,
            Some(PriorConstraint::AtMostHalf) => model.p_c <= 0.5,
            Some(PriorConstraint::AtLeastHalf) => model.p_c >= 0.5,
        };
        let treatment_ok = self
            .treatment
            .is_none_or(|r| r.holds(model.p_a_given_c, model.p_a_given_nc));
        let proxy_ok = self
            .proxy
            .is_none_or(|r| r.holds(model.p_d_given_c, model.p_d_given_nc));
        let matched_ok = !self.proxy_matches_treatment
            || ((model.p_a_given_c - model.p_d_given_c).abs() <= EQ_TOL
                && (model.p_a_given_nc - model.p_d_given_nc).abs() <= EQ_TOL);
        let outcome_ok = self
            .outcome
            .is_none_or(|chain| chain.holds(&model.outcome_table()));
        prior_ok && treatment_ok && proxy_ok && matched_ok && outcome_ok
    }

    /// Same premises with the outcome chain replaced.
    pub fn with_outcome(mut self, chain: Option<EffectChain>) -> Self {
        self.outcome = chain;
        self
    }

    /// Human-readable list of the individual constraints.
    pub fn describe(&self) -> Vec<String> {
        let mut out = Vec::new();
        match self.prior {
            Some(PriorConstraint::Half) => out.push("p(c) = 0.5".to_string()),
            Some(PriorConstraint::AtMostHalf) => out.push("p(c) <= 0.5".to_string()),
            Some(PriorConstraint::AtLeastHalf) => out.push("p(c) >= 0.5".to_string()),
            None => {}
        }
        if let Some(r) = self.treatment {
            out.push(r.describe("a"));
        }
        if let Some(r) = self.proxy {
            out.push(r.describe("d"));
        }
        if self.proxy_matches_treatment {
            out.push("p(a|c) = p(d|c)".to_string());
        }
        match self.outcome {
            Some(EffectChain::Increasing) => {
                out.push("E[Y|a,c] - E[Y|a,~c] >= E[Y|~a,~c] - E[Y|~a,c] >= 0".to_string())
            }
            Some(EffectChain::Decreasing) => {
                out.push("E[Y|a,c] - E[Y|a,~c] <= E[Y|~a,~c] - E[Y|~a,c] <= 0".to_string())
            }
            None => {}
        }
        out
    }
}

/// A named, witnessed set of premises.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintSet {
    name: String,
    premises: Premises,
    witness: ValidatedModel,
}

impl ConstraintSet {
    /// Fails unless `witness` is a valid model satisfying `premises`.
    pub fn new(
        name: impl Into<String>,
        premises: Premises,
        witness: DiscreteModel,
    ) -> Result<Self> {
        let name = name.into();
        let witness = witness
            .validate()
            .map_err(|e| Error::UnsatisfiableConstraints {
                name: name.clone(),
                reason: format!("invalid witness: {e}"),
            })?;
        if !premises.hold(&witness) {
            return Err(Error::UnsatisfiableConstraints {
                name,
                reason: "witness does not satisfy the premises".to_string(),
            });
        }
        if premises.proxy_matches_treatment && premises.treatment != premises.proxy {
            return Err(Error::UnsatisfiableConstraints {
                name,
                reason: "matched proxy requires identical treatment and proxy premises".to_string(),
            });
        }
        Ok(ConstraintSet {
            name,
            premises,
            witness,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn premises(&self) -> &Premises {
        &self.premises
    }

    pub fn witness(&self) -> &ValidatedModel {
        &self.witness
    }

    /// Derived set with the outcome chain added (name gets a `-pos`/`-neg`
    /// suffix).
    pub fn with_outcome(&self, chain: EffectChain) -> Result<ConstraintSet> {
        let witness = self.witness.into_inner().with_means(means_for(Some(chain)));
        ConstraintSet::new(
            format!("{}-{}", self.name, chain.suffix()),
            self.premises.with_outcome(Some(chain)),
            witness,
        )
    }

    /// Looks up a shipped set by name (see [`catalog`]).
    pub fn named(name: &str) -> Result<ConstraintSet> {
        catalog()
            .iter()
            .find(|c| c.name == name)
            .cloned()
            .ok_or_else(|| Error::UnknownName {
                kind: "constraint set",
                name: name.to_string(),
            })
    }
}

impl fmt::Display for ConstraintSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts = self.premises.describe();
        if parts.is_empty() {
            write!(f, "{}: unconstrained", self.name)
        } else {
            write!(f, "{}: {}", self.name, parts.join(", "))
        }
    }
}

const SYM_ABOVE: ResponseConstraint = ResponseConstraint::Symmetric(HalfSide::Above);
const SYM_BELOW: ResponseConstraint = ResponseConstraint::Symmetric(HalfSide::Below);
const SKEW_ABOVE: ResponseConstraint = ResponseConstraint::Skewed(HalfSide::Above);
const SKEW_BELOW: ResponseConstraint = ResponseConstraint::Skewed(HalfSide::Below);

const INCREASING_MEANS: [f64; 4] = [1.0, 0.0, 0.2, 0.5];
const DECREASING_MEANS: [f64; 4] = [0.0, 1.0, 0.5, 0.2];

fn means_for(chain: Option<EffectChain>) -> [f64; 4] {
    match chain {
        Some(EffectChain::Decreasing) => DECREASING_MEANS,
        _ => INCREASING_MEANS,
    }
}

/// Probability-only premise families of the shipped results, with the
/// probabilities of a witness model. Chain variants (`-pos`, `-neg`) are
/// derived from these.
/// `(p(c), (p(a|c), p(a|c̄)), (p(d|c), p(d|c̄)))`
type Probabilities = (f64, (f64, f64), (f64, f64));

fn families() -> Vec<(&'static str, Premises, Probabilities, bool)> {
    let half = Some(PriorConstraint::Half);
    let p = |prior, treatment, proxy| Premises {
        prior,
        treatment,
        proxy,
        ..Premises::default()
    };
    // (name, premises, witness probabilities, ships chain variants)
    vec![
        (
            "free",
            Premises::default(),
            (0.4, (0.7, 0.2), (0.9, 0.3)),
            false,
        ),
        (
            "t1",
            Premises {
                proxy_matches_treatment: true,
                ..p(half, Some(SYM_ABOVE), Some(SYM_ABOVE))
            },
            (0.5, (0.7, 0.3), (0.7, 0.3)),
            true,
        ),
        (
            "t2",
            p(half, Some(SYM_ABOVE), Some(SYM_ABOVE)),
            (0.5, (0.7, 0.3), (0.8, 0.2)),
            false,
        ),
        (
            "t3",
            p(half, Some(SYM_BELOW), Some(SYM_BELOW)),
            (0.5, (0.3, 0.7), (0.2, 0.8)),
            false,
        ),
        (
            "t8",
            p(half, Some(SKEW_ABOVE), Some(SYM_ABOVE)),
            (0.5, (0.6, 0.3), (0.8, 0.2)),
            true,
        ),
        (
            "t9",
            p(half, Some(SKEW_ABOVE), Some(SKEW_ABOVE)),
            (0.5, (0.6, 0.3), (0.6, 0.3)),
            true,
        ),
        (
            "t10",
            p(half, Some(SKEW_BELOW), Some(SKEW_BELOW)),
            (0.5, (0.3, 0.6), (0.3, 0.6)),
            true,
        ),
        (
            "t11",
            p(Some(PriorConstraint::AtMostHalf), Some(SKEW_ABOVE), None),
            (0.4, (0.6, 0.2), (0.9, 0.3)),
            true,
        ),
        (
            "t12",
            p(Some(PriorConstraint::AtLeastHalf), Some(SKEW_BELOW), None),
            (0.6, (0.3, 0.6), (0.9, 0.3)),
            true,
        ),
        // Weakened symmetric-above premises: one equality relaxed to an ordering.
        (
            "t2-skewed-a",
            p(half, Some(SKEW_ABOVE), Some(SYM_ABOVE)),
            (0.5, (0.6, 0.3), (0.8, 0.2)),
            false,
        ),
        (
            "t2-skewed-d",
            p(half, Some(SYM_ABOVE), Some(SKEW_ABOVE)),
            (0.5, (0.7, 0.3), (0.6, 0.3)),
            false,
        ),
    ]
}

/// Every shipped constraint set.
///
/// Names: `free`; the probability premises `t1`, `t2`, `t3`, `t8`..`t12`;
/// their outcome-chain variants `t1-pos`, `t8-neg`, ... ; the chain variants
/// of the symmetric sets `c4-pos`, `c4-neg` (on `t2`) and `c5-pos`, `c5-neg`
/// (on `t3`); and the relaxed sets `t2-skewed-a`, `t2-skewed-d`.
pub fn catalog() -> &'static [ConstraintSet] {
    static CATALOG: OnceLock<Vec<ConstraintSet>> = OnceLock::new();
    CATALOG.get_or_init(|| {
        let mut sets = Vec::new();
        let mut push = |name: String, premises: Premises, probs: Probabilities| {
            let witness =
                DiscreteModel::new(probs.0, probs.1, probs.2, means_for(premises.outcome));
            sets.push(
                ConstraintSet::new(name, premises, witness).expect("shipped witness is valid"),
            );
        };
        for (name, premises, probs, chained) in families() {
            push(name.to_string(), premises, probs);
            let chain_base = match name {
                "t2" => Some("c4"),
                "t3" => Some("c5"),
                _ if chained => Some(name),
                _ => None,
            };
            if let Some(base) = chain_base {
                for chain in EffectChain::BOTH {
                    push(
                        format!("{base}-{}", chain.suffix()),
                        premises.with_outcome(Some(chain)),
                        probs,
                    );
                }
            }
        }
        sets
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m1() -> DiscreteModel {
        DiscreteModel::new(0.5, (0.7, 0.3), (0.8, 0.2), [0.3; 4])
    }

    #[test]
    fn interior_point_is_valid() {
        let m = DiscreteModel::new(0.5, (0.5, 0.5), (0.5, 0.5), [0.3; 4]);
        assert!(m.validate().is_ok());
    }

    #[test]
    fn prior_out_of_range() {
        let mut m = m1();
        m.p_c = 1.2;
        assert_eq!(
            m.validate(),
            Err(Error::OutOfRange {
                field: "p_c",
                value: 1.2
            })
        );
    }

    #[test]
    fn binary_mean_out_of_range() {
        let mut m = m1();
        m.ey_ac = 1.5;
        assert!(matches!(
            m.validate(),
            Err(Error::OutOfRange { field: "ey_ac", .. })
        ));
        let general = m.with_outcome_kind(OutcomeKind::General);
        assert!(general.validate().is_ok());
    }

    #[test]
    fn nan_is_rejected() {
        let mut m = m1().with_outcome_kind(OutcomeKind::General);
        m.ey_nanc = f64::NAN;
        assert!(m.validate().is_err());
        m = m1();
        m.p_d_given_c = f64::NAN;
        assert!(m.validate().is_err());
    }

    #[test]
    fn validate_is_idempotent() {
        let once = m1().validate().unwrap();
        let twice = once.into_inner().validate().unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn symmetric_above_membership() {
        let t2 = ConstraintSet::named("t2").unwrap();
        assert!(m1().validate().unwrap().satisfies(&t2));
        let mut off = m1();
        off.p_c = 0.4;
        assert!(!off.validate().unwrap().satisfies(&t2));
    }

    #[test]
    fn skewed_treatment_part() {
        // p(~a|~c) = 0.7 >= p(a|c) = 0.6 >= 0.5
        assert!(SKEW_ABOVE.holds(0.6, 0.3));
        assert!(!SKEW_ABOVE.holds(0.8, 0.3));
        assert!(!SKEW_ABOVE.holds(0.4, 0.3));
        assert!(SKEW_BELOW.holds(0.3, 0.6));
        assert!(!SKEW_BELOW.holds(0.3, 0.4));
    }

    #[test]
    fn every_shipped_set_has_a_satisfying_witness() {
        let names: Vec<&str> = catalog().iter().map(|c| c.name()).collect();
        for expected in [
            "free",
            "t1",
            "t1-pos",
            "t1-neg",
            "t2",
            "t3",
            "c4-pos",
            "c4-neg",
            "c5-pos",
            "c5-neg",
            "t8-pos",
            "t9",
            "t9-pos",
            "t9-neg",
            "t10-pos",
            "t10-neg",
            "t11-pos",
            "t11-neg",
            "t12-pos",
            "t12-neg",
            "t2-skewed-a",
            "t2-skewed-d",
        ] {
            assert!(names.contains(&expected), "missing {expected}");
        }
        for set in catalog() {
            assert!(set.witness().satisfies(set), "{}", set.name());
        }
    }

    #[test]
    fn unsatisfied_witness_is_rejected() {
        let premises = Premises {
            prior: Some(PriorConstraint::Half),
            ..Premises::default()
        };
        let err = ConstraintSet::new(
            "bad",
            premises,
            DiscreteModel::new(0.3, (0.5, 0.5), (0.5, 0.5), [0.0; 4]),
        );
        assert!(matches!(err, Err(Error::UnsatisfiableConstraints { .. })));
    }

    #[test]
    fn chains() {
        let inc =
            DiscreteModel::new(0.5, (0.5, 0.5), (0.5, 0.5), [1.0, 0.0, 0.2, 0.5]).outcome_table();
        assert!(EffectChain::Increasing.holds(&inc));
        assert!(!EffectChain::Decreasing.holds(&inc));
        let flat = DiscreteModel::new(0.5, (0.5, 0.5), (0.5, 0.5), [0.4; 4]).outcome_table();
        assert!(EffectChain::Increasing.holds(&flat));
        assert!(EffectChain::Decreasing.holds(&flat));
        // ā-difference is -0.3 < 0 here
        let mixed =
            DiscreteModel::new(0.5, (0.5, 0.5), (0.5, 0.5), [1.0, 0.0, 0.5, 0.2]).outcome_table();
        assert!(!EffectChain::Increasing.holds(&mixed));
        assert!(!EffectChain::Decreasing.holds(&mixed));
    }

    #[test]
    fn model_file_schema() {
        let json = r#"{"p_c":0.5,"p_a_given_c":0.7,"p_a_given_nc":0.3,"p_d_given_c":0.8,
            "p_d_given_nc":0.2,"ey_ac":1,"ey_anc":0,"ey_nac":0.5,"ey_nanc":0.2,"outcome_kind":"binary"}"#;
        let m: DiscreteModel = serde_json::from_str(json).unwrap();
        assert_eq!(
            m,
            DiscreteModel::new(0.5, (0.7, 0.3), (0.8, 0.2), [1.0, 0.0, 0.5, 0.2])
        );
        let back = serde_json::to_value(m).unwrap();
        assert_eq!(back["outcome_kind"], "binary");
        let bad: std::result::Result<ValidatedModel, _> =
            serde_json::from_str(&json.replace("\"p_c\":0.5", "\"p_c\":1.5"));
        assert!(bad.is_err());
    }
}
