//! Randomized counterexample search over constrained parameter boxes.
//!
//! A [`Proposition`] is an inequality with a premise set. The search draws
//! models from the premise set exactly like the sampler does, one
//! independent substream per index, and evaluates the proposition's margin
//! (nonnegative when it holds). Draws whose margin is nonnegative but below
//! `near_threshold` get a local refinement: along every active unit-cube
//! axis, `grid_points` equally spaced offsets within `grid_radius` are tried.
//!
//! The outcome is either a counterexample or "no violation found within
//! budget". It is never a proof.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditions::{claim_margins, Claim, Quantity, ResultId, CONCLUSION_SLACK};
use crate::error::{Error, Result};
use crate::exact::JointTable;
use crate::model::{ConstraintSet, DiscreteModel, EffectChain, ValidatedModel};
use crate::sampler::{active_axes, admissible, draw, UnitPoint};

/// What a proposition asserts about a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// `p(c|a,d)p(d) + p(c|a,d̄)p(d̄) >= p(c̄|ā,d)p(d) + p(c̄|ā,d̄)p(d̄)`
    AdjustedPosteriorDominance,
    /// Every listed claim holds; the margin is the smallest claim margin.
    Claims(Vec<Claim>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Proposition {
    pub name: String,
    pub description: String,
    pub premises: ConstraintSet,
    pub target: Target,
}

/// `p(c|a,d)p(d) + p(c|a,d̄)p(d̄) - (p(c̄|ā,d)p(d) + p(c̄|ā,d̄)p(d̄))`
pub fn adjusted_posterior_gap(model: &ValidatedModel) -> Result<f64> {
    let t = JointTable::new(model);
    let (pd, pnd) = (t.p_d(true), t.p_d(false));
    let treated =
        t.posterior(Some(true), Some(true))? * pd + t.posterior(Some(true), Some(false))? * pnd;
    let untreated = (1.0 - t.posterior(Some(false), Some(true))?) * pd
        + (1.0 - t.posterior(Some(false), Some(false))?) * pnd;
    Ok(treated - untreated)
}

impl Proposition {
    pub fn new(
        name: impl Into<String>,
        description: impl Into<String>,
        premises: ConstraintSet,
        target: Target,
    ) -> Self {
        Proposition {
            name: name.into(),
            description: description.into(),
            premises,
            target,
        }
    }

    /// Signed slack on `model`: negative means the proposition is violated.
    pub fn margin(&self, model: &ValidatedModel) -> Result<f64> {
        match &self.target {
            Target::AdjustedPosteriorDominance => adjusted_posterior_gap(model),
            Target::Claims(claims) => Ok(claim_margins(model, claims)?
                .into_iter()
                .fold(f64::INFINITY, f64::min)),
        }
    }

    /// Looks up a shipped proposition by name (see [`propositions`]).
    pub fn named(name: &str) -> Result<Proposition> {
        propositions()
            .into_iter()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::UnknownName {
                kind: "proposition",
                name: name.to_string(),
            })
    }
}

fn set(name: &str) -> ConstraintSet {
    ConstraintSet::named(name).expect("shipped constraint set")
}

fn claims_of(id: ResultId, case: Option<EffectChain>) -> Target {
    Target::Claims(id.claims(case))
}

/// Every shipped proposition.
///
/// Besides each result's own claims under its exact premises, the list holds
/// relaxed variants that are expected to fail: betweenness and the full
/// orderings with one symmetric response equality weakened to an ordering,
/// and the `rd_obs` analogues of the crude-only bounds.
pub fn propositions() -> Vec<Proposition> {
    let mut out = vec![Proposition::new(
        "t9-key-inequality",
        "p(c|a,d)p(d) + p(c|a,~d)p(~d) >= p(~c|~a,d)p(d) + p(~c|~a,~d)p(~d)",
        set("t9"),
        Target::AdjustedPosteriorDominance,
    )];
    for (name, premises) in [
        ("t2-betweenness", "t2"),
        ("t3-betweenness", "t3"),
        ("t2-skewed-a-betweenness", "t2-skewed-a"),
        ("t2-skewed-d-betweenness", "t2-skewed-d"),
    ] {
        out.push(Proposition::new(
            name,
            "rd_obs lies between rd_true and rd_crude",
            set(premises),
            Target::Claims(vec![Claim::Between]),
        ));
    }
    for chain in EffectChain::BOTH {
        let s = chain.suffix();
        for (id, base) in [
            (ResultId::MatchedSymmetricOrdering, "t1"),
            (ResultId::SymmetricAboveOrdering, "c4"),
            (ResultId::SymmetricBelowOrdering, "c5"),
            (ResultId::SkewedTreatmentBound, "t8"),
            (ResultId::SkewedAboveBound, "t9"),
            (ResultId::SkewedBelowBound, "t10"),
            (ResultId::LowPrevalenceCrudeBound, "t11"),
            (ResultId::HighPrevalenceCrudeBound, "t12"),
        ] {
            let target = claims_of(id, Some(chain));
            let description = match &target {
                Target::Claims(c) => c
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(" and "),
                Target::AdjustedPosteriorDominance => unreachable!(),
            };
            out.push(Proposition::new(
                format!("{base}-{s}"),
                description,
                set(&format!("{base}-{s}")),
                target,
            ));
        }
        for relaxed in ["t2-skewed-a", "t2-skewed-d"] {
            let premises = set(relaxed).with_outcome(chain).expect("relaxed witness");
            out.push(Proposition::new(
                format!("c4-{s}-{}", &relaxed[3..]),
                "full ordering of the symmetric-above case under relaxed premises",
                premises,
                claims_of(ResultId::SymmetricAboveOrdering, Some(chain)),
            ));
        }
        // rd_obs analogue of the crude-only bounds
        for (base, id) in [
            ("t11", ResultId::LowPrevalenceCrudeBound),
            ("t12", ResultId::HighPrevalenceCrudeBound),
        ] {
            let obs_claims: Vec<Claim> = id
                .claims(Some(chain))
                .into_iter()
                .map(|c| match c {
                    Claim::AtLeast(Quantity::Crude, r) => Claim::AtLeast(Quantity::Obs, r),
                    Claim::AtLeast(l, Quantity::Crude) => Claim::AtLeast(l, Quantity::Obs),
                    other => other,
                })
                .collect();
            out.push(Proposition::new(
                format!("{base}-{s}-obs"),
                obs_claims
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(" and "),
                set(&format!("{base}-{s}")),
                Target::Claims(obs_claims),
            ));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub budget: u64,
    pub seed: u64,
    /// Violations need a margin below `-violation_slack`.
    pub violation_slack: f64,
    /// Margins in `[-violation_slack, near_threshold)` trigger refinement.
    pub near_threshold: f64,
    pub grid_points: usize,
    pub grid_radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl SearchConfig {
    pub fn new(budget: u64, seed: u64) -> Self {
        SearchConfig {
            budget,
            seed,
            violation_slack: CONCLUSION_SLACK,
            near_threshold: 1e-6,
            grid_points: 5,
            grid_radius: 1e-3,
            threads: None,
        }
    }
}

/// A grid point tried during refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinementStep {
    pub axis: usize,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub proposition: String,
    pub seed: u64,
    pub index: u64,
    /// Present when the violation came from refining draw `index`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refinement: Option<RefinementStep>,
    pub unit_point: UnitPoint,
    pub model: DiscreteModel,
    pub margin: f64,
}

impl Counterexample {
    /// Re-evaluates the proposition on the stored model.
    pub fn replay(&self, prop: &Proposition) -> Result<f64> {
        prop.margin(&self.model.validate()?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    ViolationFound,
    NoViolationWithinBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchReport {
    pub proposition: String,
    pub description: String,
    pub premises: Vec<String>,
    pub budget: u64,
    pub seed: u64,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

fn probe(prop: &Proposition, config: &SearchConfig, index: u64) -> Result<Option<Counterexample>> {
    let (u, model) = draw(&prop.premises, config.seed, index)?;
    let found = |refinement, unit_point, model: ValidatedModel, margin| Counterexample {
        proposition: prop.name.clone(),
        seed: config.seed,
        index,
        refinement,
        unit_point,
        model: *model,
        margin,
    };
    let Ok(margin) = prop.margin(&model) else {
        return Ok(None);
    };
    if margin < -config.violation_slack {
        return Ok(Some(found(None, u, model, margin)));
    }
    if margin >= config.near_threshold {
        return Ok(None);
    }
    for axis in active_axes(prop.premises.premises()) {
        for k in 0..config.grid_points {
            let offset = if config.grid_points == 1 {
                0.0
            } else {
                config.grid_radius * (2.0 * k as f64 / (config.grid_points - 1) as f64 - 1.0)
            };
            if offset == 0.0 {
                continue;
            }
            let mut v = u;
            v[axis] = (v[axis] + offset).clamp(0.0, 1.0);
            let Some(candidate) = admissible(prop.premises.premises(), &v) else {
                continue;
            };
            if let Ok(m) = prop.margin(&candidate) {
                if m < -config.violation_slack {
                    return Ok(Some(found(
                        Some(RefinementStep { axis, offset }),
                        v,
                        candidate,
                        m,
                    )));
                }
            }
        }
    }
    Ok(None)
}

/// Searches indices `0..budget` and returns the violation with the smallest
/// index, independent of thread count.
pub fn search(prop: &Proposition, config: &SearchConfig) -> Result<Option<Counterexample>> {
    if config.budget == 0 {
        return Err(Error::InvalidConfig("budget must be at least 1".into()));
    }
    if config.threads == Some(0) {
        return Err(Error::InvalidConfig("threads must be at least 1".into()));
    }
    let run = || {
        (0..config.budget)
            .into_par_iter()
            .find_map_first(|i| probe(prop, config, i).transpose())
            .transpose()
    };
    match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?
            .install(run),
        None => run(),
    }
}

/// [`search`] with default refinement settings.
pub fn find_violation(
    prop: &Proposition,
    budget: u64,
    seed: u64,
) -> Result<Option<Counterexample>> {
    search(prop, &SearchConfig::new(budget, seed))
}

pub fn report(prop: &Proposition, config: &SearchConfig) -> Result<SearchReport> {
    let counterexample = search(prop, config)?;
    Ok(SearchReport {
        proposition: prop.name.clone(),
        description: prop.description.clone(),
        premises: prop.premises.premises().describe(),
        budget: config.budget,
        seed: config.seed,
        outcome: if counterexample.is_some() {
            Outcome::ViolationFound
        } else {
            Outcome::NoViolationWithinBudget
        },
        counterexample,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proposition_names_are_unique_and_witnessed() {
        let props = propositions();
        let mut names: Vec<&str> = props.iter().map(|p| p.name.as_str()).collect();
        names.sort();
        let len = names.len();
        names.dedup();
        assert_eq!(names.len(), len);
        for p in &props {
            assert!(p.premises.witness().satisfies(&p.premises), "{}", p.name);
        }
    }

    #[test]
    fn key_inequality_on_symmetric_witness() {
        // with symmetric responses the two sides coincide
        let m = DiscreteModel::new(0.5, (0.7, 0.3), (0.8, 0.2), [0.3; 4])
            .validate()
            .unwrap();
        assert!(adjusted_posterior_gap(&m).unwrap().abs() < 1e-12);
    }

    #[test]
    fn exact_premises_hold_on_small_budget() {
        for name in [
            "t2-betweenness",
            "t3-betweenness",
            "c4-pos",
            "t9-neg",
            "t12-pos",
        ] {
            let p = Proposition::named(name).unwrap();
            assert!(find_violation(&p, 2_000, 1).unwrap().is_none(), "{name}");
        }
    }

    #[test]
    fn relaxed_betweenness_fails_and_replays() {
        let p = Proposition::named("t2-skewed-a-betweenness").unwrap();
        let cex = find_violation(&p, 10_000, 1).unwrap().expect("violation");
        let replayed = cex.replay(&p).unwrap();
        assert_eq!(replayed, cex.margin);
        assert!(replayed < -CONCLUSION_SLACK);
        let again = crate::sampler::sample_model(&p.premises, cex.seed, cex.index).unwrap();
        if cex.refinement.is_none() {
            assert_eq!(*again, cex.model);
        }
    }

    #[test]
    fn monotone_in_budget() {
        let p = Proposition::named("t11-pos-obs").unwrap();
        let small = find_violation(&p, 5_000, 3).unwrap().expect("violation");
        let large = find_violation(&p, 20_000, 3).unwrap().unwrap();
        assert_eq!(small, large);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let p = Proposition::named("t2-skewed-d-betweenness").unwrap();
        let mut one = SearchConfig::new(20_000, 5);
        one.threads = Some(1);
        let mut four = one;
        four.threads = Some(4);
        assert_eq!(search(&p, &one).unwrap(), search(&p, &four).unwrap());
    }

    #[test]
    fn zero_budget_is_rejected() {
        let p = Proposition::named("t2-betweenness").unwrap();
        assert!(find_violation(&p, 0, 0).is_err());
        assert!(Proposition::named("nope").is_err());
    }
}
