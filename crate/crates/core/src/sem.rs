//! Standardized linear path model `A <- C -> D`, `C -> Y`, `A -> Y`.
//!
//! All variables have unit variance and the structural equations are
//!
//! ```text
//! A = beta  * C + eA
//! D = delta * C + eD
//! Y = alpha * A + gamma * C + eY
//! ```
//!
//! so `alpha` is the causal coefficient and the regression of `Y` on `A`
//! given `D` is the proxy-adjusted estimate.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditions::CONCLUSION_SLACK;
use crate::error::{Error, Result};
use crate::model::EffectChain;
use crate::rng::substream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathModel {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

/// Population regression coefficients of `Y` on `A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemCoefficients {
    /// Adjusted for the confounder: equals `alpha`.
    pub b_ya_c: f64,
    /// Unadjusted.
    pub b_ya: f64,
    /// Adjusted for the proxy.
    pub b_ya_d: f64,
}

impl SemCoefficients {
    pub fn get(&self, q: crate::conditions::Quantity) -> f64 {
        use crate::conditions::Quantity;
        match q {
            Quantity::True => self.b_ya_c,
            Quantity::Obs => self.b_ya_d,
            Quantity::Crude => self.b_ya,
        }
    }
}

/// Result of comparing the three coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingCheck {
    /// `Increasing` when `beta` and `gamma` share a sign (or one is zero):
    /// `b_ya >= b_ya_d >= b_ya_c`. `Decreasing` is the reverse.
    pub case: EffectChain,
    /// Smallest slack of the two inequalities.
    pub margin: f64,
    pub holds: bool,
}

impl PathModel {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        PathModel {
            alpha,
            beta,
            gamma,
            delta,
        }
        .validate()
    }

    pub fn validate(self) -> Result<Self> {
        for (field, value) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("delta", self.delta),
        ] {
            if !value.is_finite() {
                return Err(Error::OutOfRange { field, value });
            }
        }
        for (field, value) in [("beta", self.beta), ("delta", self.delta)] {
            if value.abs() > 1.0 {
                return Err(Error::OutOfRange { field, value });
            }
        }
        Ok(self)
    }

    /// Variance of `eY` needed for `Var(Y) = 1`.
    pub fn outcome_error_variance(&self) -> f64 {
        1.0 - self.alpha * self.alpha
            - self.gamma * self.gamma
            - 2.0 * self.alpha * self.beta * self.gamma
    }

    /// Fails when the error variances would be negative.
    pub fn check_variances(&self) -> Result<()> {
        let v = self.outcome_error_variance();
        if v < 0.0 {
            return Err(Error::InvalidVariance(format!(
                "var(eY) = 1 - alpha^2 - gamma^2 - 2 alpha beta gamma = {v} < 0"
            )));
        }
        Ok(())
    }

    pub fn coefficients(&self) -> Result<SemCoefficients> {
        let bd = self.beta * self.delta;
        let denom = 1.0 - bd * bd;
        if denom == 0.0 {
            return Err(Error::SingularDenominator);
        }
        let (a, b, g, d) = (self.alpha, self.beta, self.gamma, self.delta);
        Ok(SemCoefficients {
            b_ya_c: a,
            b_ya: a + b * g,
            b_ya_d: a + g * b * (1.0 - d * d) / denom,
        })
    }

    pub fn check_ordering(&self) -> Result<OrderingCheck> {
        let c = self.coefficients()?;
        let case = if self.beta * self.gamma >= 0.0 {
            EffectChain::Increasing
        } else {
            EffectChain::Decreasing
        };
        let margin = match case {
            EffectChain::Increasing => (c.b_ya - c.b_ya_d).min(c.b_ya_d - c.b_ya_c),
            EffectChain::Decreasing => (c.b_ya_d - c.b_ya).min(c.b_ya_c - c.b_ya_d),
        };
        Ok(OrderingCheck {
            case,
            margin,
            holds: margin >= -CONCLUSION_SLACK,
        })
    }
}

/// Least-squares estimates with their standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemEstimate {
    pub n: usize,
    pub coefficients: SemCoefficients,
    pub std_errors: SemCoefficients,
}

#[derive(Default, Clone, Copy)]
struct Moments {
    n: f64,
    sum: [f64; 4],
    // upper triangle over (A, C, D, Y)
    cross: [[f64; 4]; 4],
}

impl Moments {
    fn add(mut self, x: [f64; 4]) -> Self {
        self.n += 1.0;
        for i in 0..4 {
            self.sum[i] += x[i];
            for j in i..4 {
                self.cross[i][j] += x[i] * x[j];
            }
        }
        self
    }

    fn merge(mut self, o: Self) -> Self {
        self.n += o.n;
        for i in 0..4 {
            self.sum[i] += o.sum[i];
            for j in i..4 {
                self.cross[i][j] += o.cross[i][j];
            }
        }
        self
    }

    /// Centered cross-product sum.
    fn s(&self, i: usize, j: usize) -> f64 {
        let (i, j) = (i.min(j), i.max(j));
        self.cross[i][j] - self.sum[i] * self.sum[j] / self.n
    }
}

const A: usize = 0;
const C: usize = 1;
const D: usize = 2;
const Y: usize = 3;

/// Draws one standardized observation `(A, C, D, Y)` from substream `index`.
pub fn draw_observation(model: &PathModel, seed: u64, index: u64) -> [f64; 4] {
    let mut rng = substream(seed, index);
    let mut z = || -> f64 { rng.sample(StandardNormal) };
    let c = z();
    let a = model.beta * c + (1.0 - model.beta * model.beta).sqrt() * z();
    let d = model.delta * c + (1.0 - model.delta * model.delta).sqrt() * z();
    let y =
        model.alpha * a + model.gamma * c + model.outcome_error_variance().max(0.0).sqrt() * z();
    [a, c, d, y]
}

/// Slope of `Y` on `A` alone and its standard error.
fn simple(m: &Moments) -> (f64, f64) {
    let b = m.s(Y, A) / m.s(A, A);
    let rss = m.s(Y, Y) - b * m.s(Y, A);
    let se = (rss / (m.n - 2.0) / m.s(A, A)).sqrt();
    (b, se)
}

/// Slope of `Y` on `A` given `X` and its standard error.
fn partial(m: &Moments, x: usize) -> (f64, f64) {
    let det = m.s(A, A) * m.s(x, x) - m.s(A, x) * m.s(A, x);
    let b_a = (m.s(Y, A) * m.s(x, x) - m.s(Y, x) * m.s(A, x)) / det;
    let b_x = (m.s(Y, x) * m.s(A, A) - m.s(Y, A) * m.s(A, x)) / det;
    let rss = m.s(Y, Y) - b_a * m.s(Y, A) - b_x * m.s(Y, x);
    let se = (rss / (m.n - 3.0) * m.s(x, x) / det).sqrt();
    (b_a, se)
}

/// Simulates `n` observations and fits the three regressions.
pub fn simulate_and_estimate(model: &PathModel, n: usize, seed: u64) -> Result<SemEstimate> {
    model.validate()?;
    model.check_variances()?;
    if n < 10 {
        return Err(Error::InvalidConfig("need at least 10 observations".into()));
    }
    // fixed chunks summed in order keep the result independent of scheduling
    const CHUNK: u64 = 4096;
    let m = (0..(n as u64).div_ceil(CHUNK))
        .into_par_iter()
        .map(|k| {
            (k * CHUNK..((k + 1) * CHUNK).min(n as u64)).fold(Moments::default(), |acc, i| {
                acc.add(draw_observation(model, seed, i))
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Moments::default(), Moments::merge);
    if m.s(A, A) <= 0.0 || m.s(C, C) <= 0.0 || m.s(D, D) <= 0.0 {
        return Err(Error::InvalidVariance(
            "a regressor has zero sample variance".into(),
        ));
    }
    let (b_ya, se_ya) = simple(&m);
    let (b_ya_c, se_ya_c) = partial(&m, C);
    let (b_ya_d, se_ya_d) = partial(&m, D);
    Ok(SemEstimate {
        n,
        coefficients: SemCoefficients {
            b_ya_c,
            b_ya,
            b_ya_d,
        },
        std_errors: SemCoefficients {
            b_ya_c: se_ya_c,
            b_ya: se_ya,
            b_ya_d: se_ya_d,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_example() {
        let c = PathModel::new(0.5, 0.6, 0.4, 0.7)
            .unwrap()
            .coefficients()
            .unwrap();
        assert_eq!(c.b_ya_c, 0.5);
        assert!((c.b_ya - 0.74).abs() < 1e-15);
        // 0.5 + 0.24 * 0.51 / (1 - 0.1764)
        assert!((c.b_ya_d - 0.648_615_832_928_606_1).abs() < 1e-12);
    }

    #[test]
    fn no_treatment_confounding_means_no_bias() {
        let c = PathModel::new(0.3, 0.0, 0.5, 0.9)
            .unwrap()
            .coefficients()
            .unwrap();
        assert_eq!(c.b_ya, c.b_ya_c);
        assert_eq!(c.b_ya_d, c.b_ya_c);
    }

    #[test]
    fn perfect_proxy_recovers_alpha() {
        let c = PathModel::new(0.3, 0.6, 0.5, 1.0)
            .unwrap()
            .coefficients()
            .unwrap();
        assert!((c.b_ya_d - 0.3).abs() < 1e-15);
        let c = PathModel::new(0.3, 0.6, 0.5, -1.0)
            .unwrap()
            .coefficients()
            .unwrap();
        assert!((c.b_ya_d - 0.3).abs() < 1e-15);
    }

    #[test]
    fn singular_and_invalid() {
        let m = PathModel::new(0.1, 1.0, 0.2, 1.0).unwrap();
        assert!(matches!(m.coefficients(), Err(Error::SingularDenominator)));
        assert!(matches!(
            PathModel::new(0.1, 1.2, 0.0, 0.0),
            Err(Error::OutOfRange { field: "beta", .. })
        ));
        let m = PathModel::new(0.9, 0.5, 0.9, 0.5).unwrap();
        assert!(matches!(
            simulate_and_estimate(&m, 100, 0),
            Err(Error::InvalidVariance(_))
        ));
        let m = PathModel::new(0.1, 0.5, 0.1, 0.5).unwrap();
        assert!(simulate_and_estimate(&m, 5, 0).is_err());
    }

    #[test]
    fn ordering_cases() {
        let inc = PathModel::new(0.5, 0.6, 0.4, 0.7)
            .unwrap()
            .check_ordering()
            .unwrap();
        assert_eq!(inc.case, EffectChain::Increasing);
        assert!(inc.holds && inc.margin > 0.0);
        let dec = PathModel::new(0.5, -0.6, 0.4, 0.7)
            .unwrap()
            .check_ordering()
            .unwrap();
        assert_eq!(dec.case, EffectChain::Decreasing);
        assert!(dec.holds && dec.margin > 0.0);
    }

    #[test]
    fn estimates_match_closed_form() {
        let m = PathModel::new(0.5, 0.6, 0.4, 0.7).unwrap();
        let est = simulate_and_estimate(&m, 50_000, 11).unwrap();
        let exact = m.coefficients().unwrap();
        for (e, x, se) in [
            (est.coefficients.b_ya_c, exact.b_ya_c, est.std_errors.b_ya_c),
            (est.coefficients.b_ya, exact.b_ya, est.std_errors.b_ya),
            (est.coefficients.b_ya_d, exact.b_ya_d, est.std_errors.b_ya_d),
        ] {
            assert!((e - x).abs() < 5.0 * se, "{e} vs {x} (se {se})");
            assert!(se > 0.0 && se < 0.01);
        }
    }

    #[test]
    fn estimate_is_deterministic() {
        let m = PathModel::new(0.2, -0.3, 0.4, 0.5).unwrap();
        assert_eq!(
            simulate_and_estimate(&m, 1000, 3).unwrap(),
            simulate_and_estimate(&m, 1000, 3).unwrap()
        );
    }
}
