//! Exact inference on the eight-cell joint distribution of `(A, C, D)`.
//!
//! Everything here is closed-form arithmetic. Binary values are passed as
//! `bool`, with `true` standing for the unbarred value (`a`, `c`, `d`).
//! Posteriors of the confounder are evaluated through likelihood ratios so
//! that factors which cancel exactly (an uninformative treatment or proxy)
//! also cancel in floating point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DiscreteModel, HalfSide, OutcomeTable, ResponseConstraint, ValidatedModel};

/// Eight joint probabilities `p(a-val, c-val, d-val)` plus the conditional
/// means `E[Y | a-val, c-val]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointTable {
    /// `cells[a][c][d]`, index 1 is the unbarred value.
    cells: [[[f64; 2]; 2]; 2],
    /// `means[a][c]`
    means: [[f64; 2]; 2],
    model: DiscreteModel,
}

fn event(a: Option<bool>, c: Option<bool>, d: Option<bool>) -> String {
    let lit = |v: Option<bool>, name: &str| {
        v.map(|b| {
            if b {
                name.to_string()
            } else {
                format!("~{name}")
            }
        })
    };
    [lit(a, "a"), lit(c, "c"), lit(d, "d")]
        .into_iter()
        .flatten()
        .collect::<Vec<_>>()
        .join(",")
}

fn cond(p_true: f64, value: bool) -> f64 {
    if value {
        p_true
    } else {
        1.0 - p_true
    }
}

impl JointTable {
    pub fn new(model: &ValidatedModel) -> Self {
        let m = **model;
        let mut cells = [[[0.0; 2]; 2]; 2];
        for a in [false, true] {
            for c in [false, true] {
                for d in [false, true] {
                    let (p_a, p_d) = if c {
                        (m.p_a_given_c, m.p_d_given_c)
                    } else {
                        (m.p_a_given_nc, m.p_d_given_nc)
                    };
                    cells[a as usize][c as usize][d as usize] =
                        cond(m.p_c, c) * cond(p_d, d) * cond(p_a, a);
                }
            }
        }
        let means = [[m.ey_nanc, m.ey_nac], [m.ey_anc, m.ey_ac]];
        JointTable {
            cells,
            means,
            model: m,
        }
    }

    pub fn cell(&self, a: bool, c: bool, d: bool) -> f64 {
        self.cells[a as usize][c as usize][d as usize]
    }

    pub fn total(&self) -> f64 {
        self.cells.iter().flatten().flatten().sum()
    }

    pub fn mean(&self, a: bool, c: bool) -> f64 {
        self.means[a as usize][c as usize]
    }

    /// p(c-val)
    pub fn p_c(&self, c: bool) -> f64 {
        cond(self.model.p_c, c)
    }

    /// p(a-val, c-val), marginalizing the proxy.
    pub fn p_ac(&self, a: bool, c: bool) -> f64 {
        self.cell(a, c, true) + self.cell(a, c, false)
    }

    /// p(a-val, d-val), marginalizing the confounder.
    pub fn p_ad(&self, a: bool, d: bool) -> f64 {
        self.cell(a, true, d) + self.cell(a, false, d)
    }

    pub fn p_a(&self, a: bool) -> f64 {
        self.p_ac(a, true) + self.p_ac(a, false)
    }

    /// p(d-val), computed from the model rather than by summing cells.
    pub fn p_d(&self, d: bool) -> f64 {
        let m = &self.model;
        self.p_c(true) * cond(m.p_d_given_c, d) + self.p_c(false) * cond(m.p_d_given_nc, d)
    }

    /// p(c | a-val, d-val) when `a`/`d` are `Some`, marginalizing any `None`.
    pub fn posterior(&self, a: Option<bool>, d: Option<bool>) -> Result<f64> {
        let m = &self.model;
        let lik = |c: bool| {
            let (p_a, p_d) = if c {
                (m.p_a_given_c, m.p_d_given_c)
            } else {
                (m.p_a_given_nc, m.p_d_given_nc)
            };
            (
                cond(m.p_c, c),
                a.map_or(1.0, |v| cond(p_a, v)),
                d.map_or(1.0, |v| cond(p_d, v)),
            )
        };
        let (prior_c, a_c, d_c) = lik(true);
        let (prior_nc, a_nc, d_nc) = lik(false);
        let num = prior_c * a_c * d_c;
        let den = prior_nc * a_nc * d_nc;
        if num + den <= 0.0 {
            return Err(Error::DegenerateConditioning {
                event: event(a, None, d),
            });
        }
        let factors = [prior_c, a_c, d_c, prior_nc, a_nc, d_nc];
        if factors.iter().all(|&f| f > 0.0) {
            // 1 / (1 + prior ratio * treatment ratio * proxy ratio)
            let ratio = (prior_nc / prior_c) * (a_nc / a_c) * (d_nc / d_c);
            Ok(1.0 / (1.0 + ratio))
        } else {
            Ok(num / (num + den))
        }
    }

    /// E[Y | a-val, d-val] (or E[Y | a-val] when `d` is `None`).
    pub fn mean_given(&self, a: bool, d: Option<bool>) -> Result<f64> {
        let post = self.posterior(Some(a), d)?;
        let (with, without) = (self.mean(a, true), self.mean(a, false));
        Ok(without + (with - without) * post)
    }

    /// The table of E[Y | A, D].
    pub fn proxy_outcome_table(&self) -> Result<OutcomeTable> {
        Ok(OutcomeTable {
            treated_with: self.mean_given(true, Some(true))?,
            treated_without: self.mean_given(true, Some(false))?,
            untreated_with: self.mean_given(false, Some(true))?,
            untreated_without: self.mean_given(false, Some(false))?,
        })
    }

    /// Fails on the first conditioning event the risk differences need that
    /// has probability zero.
    pub fn check_conditioning(&self) -> Result<()> {
        for a in [true, false] {
            if self.p_a(a) <= 0.0 {
                return Err(Error::DegenerateConditioning {
                    event: event(Some(a), None, None),
                });
            }
            for d in [true, false] {
                if self.p_ad(a, d) <= 0.0 {
                    return Err(Error::DegenerateConditioning {
                        event: event(Some(a), None, Some(d)),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn rd_true(&self) -> f64 {
        let m = &self.model;
        (m.ey_ac - m.ey_nac) * self.p_c(true) + (m.ey_anc - m.ey_nanc) * self.p_c(false)
    }

    pub fn rd_crude(&self) -> Result<f64> {
        Ok(self.mean_given(true, None)? - self.mean_given(false, None)?)
    }

    pub fn rd_obs(&self) -> Result<f64> {
        let mut total = 0.0;
        for d in [true, false] {
            total +=
                (self.mean_given(true, Some(d))? - self.mean_given(false, Some(d))?) * self.p_d(d);
        }
        Ok(total)
    }
}

/// Free-function form of [`JointTable::new`].
pub fn joint(model: &ValidatedModel) -> JointTable {
    JointTable::new(model)
}

/// The three risk differences and derived diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskDifferences {
    pub rd_true: f64,
    pub rd_obs: f64,
    pub rd_crude: f64,
    /// `alpha` in `rd_obs = rd_true + alpha * (sum of within-arm confounder
    /// effects)`; present when the symmetric premises hold.
    pub alpha_slack: Option<f64>,
    /// `beta` in `rd_crude = rd_obs + beta * (sum of within-arm proxy
    /// effects)`; present when the symmetric premises hold.
    pub beta_slack: Option<f64>,
    pub youden: f64,
}

impl RiskDifferences {
    /// Lower and upper ends of the interval spanned by `rd_true` and `rd_crude`.
    pub fn interval(&self) -> (f64, f64) {
        (
            self.rd_true.min(self.rd_crude),
            self.rd_true.max(self.rd_crude),
        )
    }

    /// Nonnegative iff `rd_obs` lies between `rd_true` and `rd_crude`.
    pub fn betweenness_margin(&self) -> f64 {
        let (lo, hi) = self.interval();
        (self.rd_obs - lo).min(hi - self.rd_obs)
    }
}

/// Which symmetric premise family a model belongs to, if any. These are the
/// probability premises under which the alpha/beta decomposition exists.
pub fn symmetric_side(model: &DiscreteModel) -> Option<HalfSide> {
    if (model.p_c - 0.5).abs() > crate::model::EQ_TOL {
        return None;
    }
    [HalfSide::Above, HalfSide::Below]
        .into_iter()
        .find(|&side| {
            let r = ResponseConstraint::Symmetric(side);
            r.holds(model.p_a_given_c, model.p_a_given_nc)
                && r.holds(model.p_d_given_c, model.p_d_given_nc)
        })
}

fn slacks(table: &JointTable) -> Result<(f64, f64)> {
    let d = table.p_d(true);
    let nd = table.p_d(false);
    let alpha = table.posterior(Some(true), Some(true))? * d
        + table.posterior(Some(true), Some(false))? * nd
        - 0.5;
    let beta = table.p_ad(true, true) / table.p_a(true) - 0.5;
    Ok((alpha, beta))
}

pub fn risk_differences(model: &ValidatedModel) -> Result<RiskDifferences> {
    let table = JointTable::new(model);
    table.check_conditioning()?;
    let (alpha_slack, beta_slack) = match symmetric_side(model) {
        Some(_) => {
            let (a, b) = slacks(&table)?;
            (Some(a), Some(b))
        }
        None => (None, None),
    };
    Ok(RiskDifferences {
        rd_true: table.rd_true(),
        rd_obs: table.rd_obs()?,
        rd_crude: table.rd_crude()?,
        alpha_slack,
        beta_slack,
        youden: model.youden(),
    })
}

/// Risk differences with both slacks populated; only defined under the
/// symmetric premises (`p(c) = 0.5`, `p(a|c) = p(ā|c̄)`, `p(d|c) = p(d̄|c̄)`,
/// both on the same side of 0.5).
pub fn decompose(model: &ValidatedModel) -> Result<RiskDifferences> {
    if symmetric_side(model).is_none() {
        return Err(Error::ConstraintsNotMet);
    }
    risk_differences(model)
}

/// p(c | a-val, d-val)
pub fn posterior_c(model: &ValidatedModel, a: bool, d: bool) -> Result<f64> {
    JointTable::new(model).posterior(Some(a), Some(d))
}

/// Log odds of the confounder given `(a-val, d-val)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogOdds {
    pub delta: f64,
}

impl LogOdds {
    pub fn probability(self) -> f64 {
        sigmoid(self.delta)
    }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn log_odds(model: &ValidatedModel, a: bool, d: bool) -> LogOdds {
    let t = JointTable::new(model);
    LogOdds {
        delta: t.cell(a, true, d).ln() - t.cell(a, false, d).ln(),
    }
}

/// `E[Y|A,D]` for the model.
pub fn proxy_outcome_table(model: &ValidatedModel) -> Result<OutcomeTable> {
    JointTable::new(model).proxy_outcome_table()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m1(means: [f64; 4]) -> ValidatedModel {
        DiscreteModel::new(0.5, (0.7, 0.3), (0.8, 0.2), means)
            .validate()
            .unwrap()
    }

    // Independent oracle: brute-force sums over the eight cells straight from
    // the factorization, no shared helpers.
    fn oracle(m: &DiscreteModel) -> (f64, f64, f64) {
        let pr = |c: bool| if c { m.p_c } else { 1.0 - m.p_c };
        let pa = |a: bool, c: bool| {
            let p = if c { m.p_a_given_c } else { m.p_a_given_nc };
            if a {
                p
            } else {
                1.0 - p
            }
        };
        let pd = |d: bool, c: bool| {
            let p = if c { m.p_d_given_c } else { m.p_d_given_nc };
            if d {
                p
            } else {
                1.0 - p
            }
        };
        let ey = |a: bool, c: bool| match (a, c) {
            (true, true) => m.ey_ac,
            (true, false) => m.ey_anc,
            (false, true) => m.ey_nac,
            (false, false) => m.ey_nanc,
        };
        let mut sy_a = [0.0; 2];
        let mut n_a = [0.0; 2];
        let mut sy_ad = [[0.0; 2]; 2];
        let mut n_ad = [[0.0; 2]; 2];
        let mut n_d = [0.0; 2];
        for a in [false, true] {
            for c in [false, true] {
                for d in [false, true] {
                    let w = pr(c) * pa(a, c) * pd(d, c);
                    sy_a[a as usize] += w * ey(a, c);
                    n_a[a as usize] += w;
                    sy_ad[a as usize][d as usize] += w * ey(a, c);
                    n_ad[a as usize][d as usize] += w;
                    n_d[d as usize] += w;
                }
            }
        }
        let rd_true = (ey(true, true) - ey(false, true)) * pr(true)
            + (ey(true, false) - ey(false, false)) * pr(false);
        let rd_crude = sy_a[1] / n_a[1] - sy_a[0] / n_a[0];
        let rd_obs = (0..2)
            .map(|d| (sy_ad[1][d] / n_ad[1][d] - sy_ad[0][d] / n_ad[0][d]) * n_d[d])
            .sum();
        (rd_true, rd_obs, rd_crude)
    }

    #[test]
    fn uniform_joint() {
        let m = DiscreteModel::new(0.5, (0.5, 0.5), (0.5, 0.5), [0.3; 4])
            .validate()
            .unwrap();
        let t = joint(&m);
        for a in [false, true] {
            for c in [false, true] {
                for d in [false, true] {
                    assert_eq!(t.cell(a, c, d), 0.125);
                }
            }
        }
    }

    #[test]
    fn degenerate_prior_zeroes_cells() {
        let m = DiscreteModel::new(1.0, (0.5, 0.5), (0.5, 0.5), [0.3; 4])
            .validate()
            .unwrap();
        let t = joint(&m);
        for a in [false, true] {
            for d in [false, true] {
                assert_eq!(t.cell(a, false, d), 0.0);
            }
        }
        assert!((t.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn m1_cell_and_marginals() {
        let t = joint(&m1([0.3; 4]));
        assert!((t.cell(true, true, true) - 0.28).abs() < 1e-15);
        // marginalizing d gives p(c) p(a|c)
        assert!((t.p_ac(true, true) - 0.35).abs() < 1e-15);
        assert!((t.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_outcome_has_no_effect() {
        let rd = risk_differences(&m1([0.3; 4])).unwrap();
        assert_eq!((rd.rd_true, rd.rd_obs, rd.rd_crude), (0.0, 0.0, 0.0));
    }

    #[test]
    fn no_confounding_of_treatment() {
        let m = DiscreteModel::new(0.3, (0.5, 0.5), (0.9, 0.2), [0.9, 0.1, 0.4, 0.7])
            .validate()
            .unwrap();
        let rd = risk_differences(&m).unwrap();
        assert!((rd.rd_true - rd.rd_crude).abs() < 1e-12);
        assert!((rd.rd_true - rd.rd_obs).abs() < 1e-12);
    }

    #[test]
    fn m1_risk_differences_match_oracle() {
        let m = m1([1.0, 0.0, 0.5, 0.2]);
        let (t, o, c) = oracle(&m);
        // frozen from the oracle
        assert!((t - 0.15).abs() < 1e-12);
        assert!((c - 0.41).abs() < 1e-12);
        assert!((o - 0.326_570_458_404_074_6).abs() < 1e-12);
        let rd = risk_differences(&m).unwrap();
        assert!((rd.rd_true - t).abs() < 1e-12);
        assert!((rd.rd_obs - o).abs() < 1e-12);
        assert!((rd.rd_crude - c).abs() < 1e-12);
        assert!((rd.youden - 0.6).abs() < 1e-12);
    }

    #[test]
    fn m1_posteriors() {
        let m = m1([0.3; 4]);
        let p = posterior_c(&m, true, true).unwrap();
        assert!((p - 0.28 / 0.31).abs() < 1e-12);
        let p_nc = 1.0 - posterior_c(&m, false, false).unwrap();
        assert!((p_nc - p).abs() < 1e-12);
        assert!((log_odds(&m, true, true).probability() - p).abs() < 1e-12);
    }

    #[test]
    fn posterior_ignores_uninformative_treatment() {
        let m = DiscreteModel::new(0.3, (0.4, 0.4), (0.9, 0.2), [0.3; 4])
            .validate()
            .unwrap();
        let t = joint(&m);
        for d in [true, false] {
            assert_eq!(
                t.posterior(Some(true), Some(d)).unwrap(),
                t.posterior(None, Some(d)).unwrap()
            );
        }
    }

    #[test]
    fn zero_probability_event_is_an_error() {
        // p(a|c) = 1, p(a|~c) = 0 and p(d|c) = 1 leave (a, ~d) impossible
        let m = DiscreteModel::new(0.5, (1.0, 0.0), (1.0, 0.0), [0.3; 4])
            .validate()
            .unwrap();
        assert!(matches!(
            risk_differences(&m),
            Err(Error::DegenerateConditioning { .. })
        ));
        assert!(posterior_c(&m, true, false).is_err());
    }

    #[test]
    fn decomposition_slacks() {
        let m = m1([1.0, 0.0, 0.5, 0.2]);
        let rd = decompose(&m).unwrap();
        let t = joint(&m);
        let expected = t.posterior(Some(true), Some(true)).unwrap() * 0.5
            + t.posterior(Some(true), Some(false)).unwrap() * 0.5
            - 0.5;
        assert!((rd.alpha_slack.unwrap() - expected).abs() < 1e-15);
        assert!(rd.alpha_slack.unwrap() >= 0.0);
        assert!(rd.beta_slack.unwrap() >= 0.0);

        let indep = DiscreteModel::new(0.5, (0.5, 0.5), (0.8, 0.2), [1.0, 0.0, 0.5, 0.2])
            .validate()
            .unwrap();
        let rd = decompose(&indep).unwrap();
        assert!(rd.alpha_slack.unwrap().abs() < 1e-15);
        assert!(rd.beta_slack.unwrap().abs() < 1e-15);
    }

    #[test]
    fn decomposition_below_half() {
        let m = DiscreteModel::new(0.5, (0.3, 0.7), (0.2, 0.8), [1.0, 0.0, 0.5, 0.2])
            .validate()
            .unwrap();
        let rd = decompose(&m).unwrap();
        // oracle: p(c|a,d) p(d) + p(c|a,~d) p(~d) - 0.5 by enumeration
        let (num_ad, den_ad) = (0.5 * 0.3 * 0.2, 0.5 * 0.7 * 0.8);
        let (num_and, den_and) = (0.5 * 0.3 * 0.8, 0.5 * 0.7 * 0.2);
        let alpha = num_ad / (num_ad + den_ad) * 0.5 + num_and / (num_and + den_and) * 0.5 - 0.5;
        assert!((rd.alpha_slack.unwrap() - alpha).abs() < 1e-12);
        assert!(alpha < 0.0);
        assert!(rd.beta_slack.unwrap() >= 0.0);
    }

    #[test]
    fn decompose_requires_symmetric_premises() {
        let m = DiscreteModel::new(0.4, (0.7, 0.3), (0.8, 0.2), [0.3; 4])
            .validate()
            .unwrap();
        assert_eq!(decompose(&m), Err(Error::ConstraintsNotMet));
        assert!(risk_differences(&m).unwrap().alpha_slack.is_none());
    }
}
