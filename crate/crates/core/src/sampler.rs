//! Constrained random parameterization and the Monte Carlo experiment.
//!
//! Models are drawn from a fixed nine-dimensional unit cube: axis 0 for
//! `p(c)`, axes 1-2 for the treatment response, 3-4 for the proxy response
//! and 5-8 for the four outcome means. [`model_from_unit`] maps a point of
//! the cube onto the premise set so that every probability premise holds by
//! construction and the free parameters are uniform on their constrained
//! ranges. Outcome-chain premises are enforced by rejection, as are the
//! (measure-zero) draws where a conditioning event has probability zero.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{risk_differences, JointTable};
use crate::model::{
    ConstraintSet, DiscreteModel, HalfSide, OutcomeKind, Premises, PriorConstraint,
    ResponseConstraint, ValidatedModel,
};
use crate::rng::substream;

pub const UNIT_DIMS: usize = 9;
pub type UnitPoint = [f64; UNIT_DIMS];

/// Rejection attempts per draw before a constraint set is declared
/// unsatisfiable in practice.
pub const MAX_ATTEMPTS: usize = 10_000;

/// Below this, `|rd_crude - rd_true|` is treated as zero and the relative
/// distance is left undefined.
pub const MIN_INTERVAL: f64 = 1e-12;

fn scale(u: f64, side: Option<HalfSide>) -> f64 {
    match side {
        None => u,
        Some(HalfSide::Above) => 0.5 + 0.5 * u,
        Some(HalfSide::Below) => 0.5 * u,
    }
}

/// `(p(x|c), p(x|c̄))` from two unit coordinates.
fn response(constraint: Option<ResponseConstraint>, u1: f64, u2: f64) -> (f64, f64) {
    match constraint {
        None => (u1, u2),
        Some(ResponseConstraint::Symmetric(side)) => {
            let x = scale(u1, Some(side));
            (x, 1.0 - x)
        }
        Some(ResponseConstraint::Skewed(side)) => {
            // uniform on the triangle lo <= hi with lo = p(x|c), hi = p(x̄|c̄)
            let (s1, s2) = (scale(u1, Some(side)), scale(u2, Some(side)));
            let (lo, hi) = (s1.min(s2), s1.max(s2));
            (lo, 1.0 - hi)
        }
    }
}

/// Unit-cube axes that influence the model under `premises`.
pub fn active_axes(premises: &Premises) -> Vec<usize> {
    let mut axes = Vec::new();
    if premises.prior != Some(PriorConstraint::Half) {
        axes.push(0);
    }
    let width = |r: Option<ResponseConstraint>| match r {
        Some(ResponseConstraint::Symmetric(_)) => 1,
        _ => 2,
    };
    axes.extend((1..).take(width(premises.treatment)));
    if !premises.proxy_matches_treatment {
        axes.extend((3..).take(width(premises.proxy)));
    }
    axes.extend(5..9);
    axes
}

/// Maps a point of the unit cube onto a binary-outcome model. Probability
/// premises hold by construction (up to rounding); the outcome chain is not
/// enforced.
pub fn model_from_unit(premises: &Premises, u: &UnitPoint) -> DiscreteModel {
    let p_c = match premises.prior {
        None => u[0],
        Some(PriorConstraint::Half) => 0.5,
        Some(PriorConstraint::AtMostHalf) => 0.5 * u[0],
        Some(PriorConstraint::AtLeastHalf) => 0.5 + 0.5 * u[0],
    };
    let treatment = response(premises.treatment, u[1], u[2]);
    let proxy = if premises.proxy_matches_treatment {
        treatment
    } else {
        response(premises.proxy, u[3], u[4])
    };
    DiscreteModel::new(p_c, treatment, proxy, [u[5], u[6], u[7], u[8]])
        .with_outcome_kind(OutcomeKind::Binary)
}

/// The model at `u` if it is valid, satisfies `premises` and has every
/// conditioning event the risk differences need.
pub fn admissible(premises: &Premises, u: &UnitPoint) -> Option<ValidatedModel> {
    let model = model_from_unit(premises, u).validate().ok()?;
    if !premises.hold(&model) {
        return None;
    }
    JointTable::new(&model).check_conditioning().ok()?;
    Some(model)
}

/// Draws the unit point and model for work item `index`.
pub fn draw(
    constraints: &ConstraintSet,
    seed: u64,
    index: u64,
) -> Result<(UnitPoint, ValidatedModel)> {
    let mut rng = substream(seed, index);
    for _ in 0..MAX_ATTEMPTS {
        let mut u = [0.0; UNIT_DIMS];
        for x in u.iter_mut() {
            *x = rng.random::<f64>();
        }
        if let Some(model) = admissible(constraints.premises(), &u) {
            return Ok((u, model));
        }
    }
    Err(Error::UnsatisfiableConstraints {
        name: constraints.name().to_string(),
        reason: format!("no admissible draw in {MAX_ATTEMPTS} attempts"),
    })
}

/// Deterministic function of `(constraints, seed, index)`.
pub fn sample_model(constraints: &ConstraintSet, seed: u64, index: u64) -> Result<ValidatedModel> {
    draw(constraints, seed, index).map(|(_, m)| m)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub trials: usize,
    pub seed: u64,
    pub constraint_set: String,
    pub histogram_bins: usize,
    /// Worker threads; `None` uses the global pool. Output does not depend
    /// on it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            trials: 10_000,
            seed: 0,
            constraint_set: "t2".to_string(),
            histogram_bins: 50,
            threads: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.histogram_bins == 0 {
            return Err(Error::InvalidConfig(
                "histogram_bins must be at least 1".into(),
            ));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidConfig("threads must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub model: DiscreteModel,
    pub rd_true: f64,
    pub rd_obs: f64,
    pub rd_crude: f64,
    /// `|rd_crude - rd_true|`
    pub interval_length: f64,
    /// `|rd_obs - rd_true| / interval_length`, absent for (near) empty intervals.
    pub rel_distance: Option<f64>,
    pub youden: f64,
}

impl TrialRecord {
    pub fn from_model(trial: u64, model: &ValidatedModel) -> Result<Self> {
        let rd = risk_differences(model)?;
        let interval_length = (rd.rd_crude - rd.rd_true).abs();
        let rel_distance = (interval_length >= MIN_INTERVAL)
            .then(|| (rd.rd_obs - rd.rd_true).abs() / interval_length);
        Ok(TrialRecord {
            trial,
            model: **model,
            rd_true: rd.rd_true,
            rd_obs: rd.rd_obs,
            rd_crude: rd.rd_crude,
            interval_length,
            rel_distance,
            youden: rd.youden,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Equal-width bins on `[0, max(values)]`; the maximum lands in the last bin.
    pub fn of(values: &[f64], bins: usize) -> Self {
        let hi = values.iter().copied().fold(0.0, f64::max);
        let mut counts = vec![0; bins];
        for &v in values {
            let idx = if hi > 0.0 {
                ((v / hi) * bins as f64).floor() as usize
            } else {
                0
            };
            counts[idx.min(bins - 1)] += 1;
        }
        Histogram {
            lo: 0.0,
            hi,
            counts,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub count: usize,
    pub mean: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl Quartiles {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Some(Quartiles {
            count: sorted.len(),
            mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
            q1: quantile(&sorted, 0.25),
            median: quantile(&sorted, 0.5),
            q3: quantile(&sorted, 0.75),
        })
    }
}

/// Relative-distance statistics for one quarter of the trials ranked by
/// Youden index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YoudenGroup {
    pub youden_min: f64,
    pub youden_max: f64,
    pub rel_distance: Quartiles,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub config: ExperimentConfig,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
    pub interval_length_histogram: Histogram,
    pub rel_distance: Option<Quartiles>,
    /// Four groups, lowest Youden index first.
    pub by_youden_quartile: Vec<YoudenGroup>,
    /// Trials with `rd_obs` outside `[min, max]` of the other two by more
    /// than the conclusion slack.
    pub betweenness_violations: usize,
}

impl ExperimentSummary {
    pub fn from_records(config: ExperimentConfig, records: Vec<TrialRecord>) -> Self {
        let lengths: Vec<f64> = records.iter().map(|r| r.interval_length).collect();
        let histogram = Histogram::of(&lengths, config.histogram_bins);
        let rel: Vec<f64> = records.iter().filter_map(|r| r.rel_distance).collect();

        let mut ranked: Vec<(f64, f64)> = records
            .iter()
            .filter_map(|r| r.rel_distance.map(|d| (r.youden, d)))
            .collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = ranked.len();
        let by_youden_quartile = (0..4)
            .filter_map(|g| {
                let group = &ranked[g * n / 4..(g + 1) * n / 4];
                let rel: Vec<f64> = group.iter().map(|x| x.1).collect();
                Some(YoudenGroup {
                    youden_min: group.first()?.0,
                    youden_max: group.last()?.0,
                    rel_distance: Quartiles::of(&rel)?,
                })
            })
            .collect();

        let betweenness_violations = records
            .iter()
            .filter(|r| {
                let (lo, hi) = (r.rd_true.min(r.rd_crude), r.rd_true.max(r.rd_crude));
                r.rd_obs < lo - crate::conditions::CONCLUSION_SLACK
                    || r.rd_obs > hi + crate::conditions::CONCLUSION_SLACK
            })
            .count();

        ExperimentSummary {
            config,
            interval_length_histogram: histogram,
            rel_distance: Quartiles::of(&rel),
            by_youden_quartile,
            betweenness_violations,
            records,
        }
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentSummary> {
    config.validate()?;
    let constraints = ConstraintSet::named(&config.constraint_set)?;
    let run = || {
        (0..config.trials as u64)
            .into_par_iter()
            .map(|i| TrialRecord::from_model(i, &sample_model(&constraints, config.seed, i)?))
            .collect::<Result<Vec<_>>>()
    };
    let records = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    Ok(ExperimentSummary::from_records(config.clone(), records))
}

/// Header of the per-trial CSV.
pub const CSV_HEADER: [&str; 7] = [
    "trial",
    "rd_true",
    "rd_obs",
    "rd_crude",
    "interval_length",
    "rel_distance",
    "youden",
];

#[derive(Serialize)]
struct CsvRow {
    trial: u64,
    rd_true: f64,
    rd_obs: f64,
    rd_crude: f64,
    interval_length: f64,
    rel_distance: Option<f64>,
    youden: f64,
}

/// Writes one row per trial; an undefined relative distance is an empty field.
pub fn write_csv<W: Write>(records: &[TrialRecord], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(CsvRow {
            trial: r.trial,
            rd_true: r.rd_true,
            rd_obs: r.rd_obs,
            rd_crude: r.rd_crude,
            interval_length: r.interval_length,
            rel_distance: r.rel_distance,
            youden: r.youden,
        })
        .map_err(std::io::Error::other)?;
    }
    if records.is_empty() {
        w.write_record(CSV_HEADER).map_err(std::io::Error::other)?;
    }
    w.flush()
}
