use proptest::prelude::*;

use proxybound::conditions::{monotone_in_c, monotone_in_d};
use proxybound::exact::{decompose, joint, log_odds, posterior_c, risk_differences, sigmoid};
use proxybound::model::{catalog, DiscreteModel, ValidatedModel};
use proxybound::sampler::{draw, sample_model};
use proxybound::sem::PathModel;

fn unit() -> impl Strategy<Value = f64> {
    0.0..=1.0f64
}

fn interior() -> impl Strategy<Value = f64> {
    0.01..=0.99f64
}

fn any_model() -> impl Strategy<Value = ValidatedModel> {
    (
        unit(),
        unit(),
        unit(),
        unit(),
        unit(),
        prop::array::uniform4(unit()),
    )
        .prop_map(|(p, ac, anc, dc, dnc, ey)| {
            DiscreteModel::new(p, (ac, anc), (dc, dnc), ey)
                .validate()
                .unwrap()
        })
}

fn interior_model() -> impl Strategy<Value = ValidatedModel> {
    (
        interior(),
        interior(),
        interior(),
        interior(),
        interior(),
        prop::array::uniform4(unit()),
    )
        .prop_map(|(p, ac, anc, dc, dnc, ey)| {
            DiscreteModel::new(p, (ac, anc), (dc, dnc), ey)
                .validate()
                .unwrap()
        })
}

/// `p_c = 0.5` with symmetric responses on the same side.
fn symmetric_model(above: bool) -> impl Strategy<Value = ValidatedModel> {
    (unit(), unit(), prop::array::uniform4(unit())).prop_map(move |(a, d, ey)| {
        let (a, d) = if above {
            (0.5 + a / 2.0, 0.5 + d / 2.0)
        } else {
            (a / 2.0, d / 2.0)
        };
        DiscreteModel::new(0.5, (a, 1.0 - a), (d, 1.0 - d), ey)
            .validate()
            .unwrap()
    })
}

proptest! {
    #[test]
    fn joint_is_normalized(m in any_model()) {
        let t = joint(&m);
        prop_assert!((t.total() - 1.0).abs() < 1e-12);
        prop_assert!((t.p_c(true) - m.p_c).abs() < 1e-12);
        for a in [false, true] {
            for c in [false, true] {
                let direct: f64 = [false, true].iter().map(|&d| t.cell(a, c, d)).sum();
                prop_assert!((direct - t.p_ac(a, c)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn posterior_is_sigmoid_of_log_odds(m in interior_model(), a: bool, d: bool) {
        let p = posterior_c(&m, a, d).unwrap();
        prop_assert!((log_odds(&m, a, d).probability() - p).abs() < 1e-12);
        prop_assert!((sigmoid(0.0) - 0.5).abs() < 1e-15);
        let t = joint(&m);
        let direct = t.cell(a, true, d) / (t.cell(a, true, d) + t.cell(a, false, d));
        prop_assert!((direct - p).abs() < 1e-12);
    }

    #[test]
    fn conditioning_on_nothing_is_identity(m in any_model()) {
        prop_assert!((joint(&m).posterior(None, None).unwrap() - m.p_c).abs() < 1e-12);
        if let Ok(rd) = risk_differences(&m) {
            prop_assert_eq!(rd.rd_true, joint(&m).rd_true());
        }
    }

    #[test]
    fn symmetric_above_identities(m in symmetric_model(true)) {
        if let Ok(rd) = decompose(&m) {
            let t = joint(&m);
            prop_assert!((t.p_d(true) - 0.5).abs() < 1e-12);
            let p = t.posterior(Some(true), Some(true)).unwrap();
            let q = 1.0 - t.posterior(Some(false), Some(false)).unwrap();
            prop_assert!((p - q).abs() < 1e-12);
            let (alpha, beta) = (rd.alpha_slack.unwrap(), rd.beta_slack.unwrap());
            prop_assert!(alpha >= -1e-12 && beta >= -1e-12);
            let c = m.outcome_table();
            prop_assert!((rd.rd_obs - rd.rd_true - alpha * (c.treated_effect() + c.untreated_effect())).abs() < 1e-12);
            prop_assert!(rd.betweenness_margin() >= -1e-9);
        }
    }

    #[test]
    fn symmetric_below_alpha_is_nonpositive(m in symmetric_model(false)) {
        if let Ok(rd) = decompose(&m) {
            prop_assert!(rd.alpha_slack.unwrap() <= 1e-12);
            prop_assert!(rd.beta_slack.unwrap() >= -1e-12);
            prop_assert!(rd.betweenness_margin() >= -1e-9);
        }
    }

    #[test]
    fn informative_proxy_keeps_monotonicity(m in interior_model()) {
        prop_assume!(m.youden() > 0.0);
        prop_assert_eq!(monotone_in_c(&m), monotone_in_d(&m).unwrap());
    }

    #[test]
    fn uninformative_proxy_flattens_d(m in interior_model()) {
        let flat = DiscreteModel { p_d_given_nc: m.p_d_given_c, ..*m }.validate().unwrap();
        let d = joint(&flat).proxy_outcome_table().unwrap();
        prop_assert_eq!(d.treated_effect(), 0.0);
        prop_assert_eq!(d.untreated_effect(), 0.0);
    }

    #[test]
    fn draws_satisfy_their_premises(seed: u64, index in 0u64..1_000_000) {
        for set in catalog() {
            let (u, m) = draw(set, seed, index).unwrap();
            prop_assert!(m.satisfies(set), "{}", set.name());
            prop_assert!(u.iter().all(|x| (0.0..=1.0).contains(x)));
            prop_assert_eq!(sample_model(set, seed, index).unwrap(), m);
        }
    }

    #[test]
    fn path_model_bounds(alpha in -0.99..0.99f64, beta in -0.99..0.99f64, gamma in -0.99..0.99f64, delta in -0.99..0.99f64) {
        let m = PathModel::new(alpha, beta, gamma, delta).unwrap();
        prop_assume!(m.check_variances().is_ok());
        let c = m.coefficients().unwrap();
        prop_assert_eq!(c.b_ya_c, alpha);
        prop_assert!((c.b_ya_d - alpha).abs() <= (beta * gamma).abs() + 1e-12);
        prop_assert!(m.check_ordering().unwrap().holds);
    }
}

/// Kolmogorov-Smirnov statistic of the sampled `p(a|c)` under the symmetric
/// premises against the uniform law on `[0.5, 1]`.
#[test]
fn treatment_response_is_uniform_above_half() {
    let set = proxybound::model::ConstraintSet::named("t2").unwrap();
    let n = 10_000;
    let mut xs: Vec<f64> = (0..n as u64)
        .map(|i| (sample_model(&set, 99, i).unwrap().p_a_given_c - 0.5) * 2.0)
        .collect();
    xs.sort_by(f64::total_cmp);
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n as f64).max((i + 1) as f64 / n as f64 - x))
        .fold(0.0, f64::max);
    // 1% critical value
    assert!(d < 1.628 / (n as f64).sqrt(), "D = {d}");
}
