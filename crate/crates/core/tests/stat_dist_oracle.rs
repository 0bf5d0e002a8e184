mod common;

use approx::assert_abs_diff_eq;
use bopi_core::stat_dist::*;
use bopi_core::intervals::{
    conventional_interval, normal_prediction_interval, normal_tolerance_interval, prediction_factor,
    tolerance_factor, tolerance_prediction_ratio, SampleSummary,
};
use proptest::prelude::*;

fn p(v: f64) -> Probability {
    Probability::new(v).unwrap()
}

fn df(v: u64) -> DegreesOfFreedom {
    DegreesOfFreedom::new(v).unwrap()
}

#[test]
fn oracle_matches_published_constants() {
    assert_abs_diff_eq!(common::normal_cdf(1.959964), 0.975, epsilon = 1e-8);
    assert_abs_diff_eq!(common::normal_quantile(0.975), 1.959964, epsilon = 1e-6);
    assert_abs_diff_eq!(common::normal_quantile(0.9), 1.281552, epsilon = 1e-6);
    assert_abs_diff_eq!(common::t_quantile(0.975, 19), 2.09302, epsilon = 1e-4);
    assert_abs_diff_eq!(common::chi2_quantile(0.05, 19), 10.1170, epsilon = 1e-3);
}

#[test]
fn golden_values_against_oracle() {
    assert_abs_diff_eq!(std_normal_cdf(1.959964), common::normal_cdf(1.959964), epsilon = 1e-12);
    assert_abs_diff_eq!(std_normal_quantile(p(0.975)), common::normal_quantile(0.975), epsilon = 1e-9);
    assert_abs_diff_eq!(std_normal_quantile(p(0.9)), common::normal_quantile(0.9), epsilon = 1e-9);
    assert_abs_diff_eq!(student_t_quantile(p(0.975), df(19)), common::t_quantile(0.975, 19), epsilon = 1e-8);
    assert_abs_diff_eq!(chi_square_quantile(p(0.05), df(19)), common::chi2_quantile(0.05, 19), epsilon = 1e-8);
    assert_abs_diff_eq!(student_t_quantile(p(0.975), df(1)), 12.7062, epsilon = 1e-3);
    assert_abs_diff_eq!(student_t_cdf(12.7062, df(1)), 0.975, epsilon = 1e-4);
    assert_abs_diff_eq!(student_t_cdf(2.09302, df(19)), 0.975, epsilon = 1e-4);
    assert_abs_diff_eq!(chi_square_quantile(p(0.5), df(2)), 1.386294, epsilon = 1e-5);
    let v = chi_square_quantile(p(0.3), df(19));
    assert_abs_diff_eq!(chi_square_cdf(v, df(19)), 0.3, epsilon = 1e-8);
}

#[test]
fn cdfs_agree_with_integrated_densities() {
    for &x in &[-3.5, -1.0, -0.2, 0.4, 1.7, 4.0] {
        assert_abs_diff_eq!(std_normal_cdf(x), common::normal_cdf(x), epsilon = 1e-12);
        for d in [1, 2, 5, 19, 60] {
            assert_abs_diff_eq!(student_t_cdf(x, df(d)), common::t_cdf(x, d), epsilon = 1e-10);
        }
    }
    for &x in &[0.01, 0.5, 3.0, 10.0, 25.0, 80.0] {
        for d in [1, 2, 3, 10, 19, 50] {
            assert_abs_diff_eq!(chi_square_cdf(x, df(d)), common::chi2_cdf(x, d), epsilon = 1e-10);
        }
    }
}

fn p_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
    g.extend([0.001, 0.005, 0.995, 0.999]);
    g
}

#[test]
fn round_trips_over_grid() {
    for &pv in &p_grid() {
        let z = std_normal_quantile(p(pv));
        assert!((std_normal_cdf(z) - pv).abs() < 1e-7, "normal p={pv}");
        for d in 1..=200 {
            let t = student_t_quantile(p(pv), df(d));
            assert!((student_t_cdf(t, df(d)) - pv).abs() < 1e-7, "t p={pv} df={d}");
            let c = chi_square_quantile(p(pv), df(d));
            assert!(c > 0.0);
            assert!((chi_square_cdf(c, df(d)) - pv).abs() < 1e-7, "chi2 p={pv} df={d}");
        }
    }
}

#[test]
fn quantiles_strictly_increasing() {
    let g = {
        let mut g = p_grid();
        g.sort_by(f64::total_cmp);
        g
    };
    for d in [1, 3, 19, 200] {
        for w in g.windows(2) {
            assert!(std_normal_quantile(p(w[0])) < std_normal_quantile(p(w[1])));
            assert!(student_t_quantile(p(w[0]), df(d)) < student_t_quantile(p(w[1]), df(d)));
            assert!(chi_square_quantile(p(w[0]), df(d)) < chi_square_quantile(p(w[1]), df(d)));
        }
        assert!(chi_square_quantile(p(0.4), df(d)) < chi_square_quantile(p(0.4), df(d + 1)));
    }
}

#[test]
fn t_approaches_normal() {
    for pv in [0.9, 0.95, 0.975, 0.995] {
        let diff = student_t_quantile(p(pv), df(10_000)) - std_normal_quantile(p(pv));
        assert!(diff.abs() < 1e-3);
    }
}

#[test]
fn interval_factors_against_oracle() {
    let z = common::normal_quantile(0.975);
    let t19 = common::t_quantile(0.975, 19);
    let chi = common::chi2_quantile(0.05, 19);
    let pf = t19 * (1.05f64).sqrt();
    assert_abs_diff_eq!(prediction_factor(20, p(0.95)).unwrap(), pf, epsilon = 1e-8);
    assert_abs_diff_eq!(pf, 2.1447, epsilon = 5e-4);
    assert_abs_diff_eq!(prediction_factor(2, p(0.5)).unwrap(), 1.5f64.sqrt(), epsilon = 1e-9);
    assert_abs_diff_eq!(prediction_factor(1_000_000, p(0.95)).unwrap(), 1.95996, epsilon = 1e-3);
    let tf = (19.0 * 1.05 * z * z / chi).sqrt();
    assert_abs_diff_eq!(tolerance_factor(20, p(0.95), p(0.95)).unwrap(), tf, epsilon = 1e-8);
    assert_abs_diff_eq!(tf, 2.7523, epsilon = 1e-3);
    assert_abs_diff_eq!(tolerance_factor(1_000_000, p(0.95), p(0.5)).unwrap(), 1.96, epsilon = 2e-3);

    let s = SampleSummary::new(0.0, 1.0, 20).unwrap();
    let pi = normal_prediction_interval(&s, p(0.95)).unwrap();
    assert_abs_diff_eq!(pi.upper(), pf, epsilon = 1e-8);
    let ti = normal_tolerance_interval(&s, p(0.95), p(0.95)).unwrap();
    assert_abs_diff_eq!(ti.lower(), -tf, epsilon = 1e-8);
    let shifted = normal_prediction_interval(&SampleSummary::new(5.0, 1.0, 20).unwrap(), p(0.95)).unwrap();
    assert_abs_diff_eq!(shifted.lower(), pi.lower() + 5.0, epsilon = 1e-12);
    let ci = conventional_interval(0.0, 1.0, p(0.95)).unwrap();
    assert_abs_diff_eq!(ci.upper(), z, epsilon = 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ratio_identity(n in 2usize..2000, b in 0.01f64..0.99, g in 0.01f64..0.99) {
        let (b, g) = (p(b), p(g));
        let lhs = tolerance_prediction_ratio(n, b, g).unwrap() * prediction_factor(n, b).unwrap();
        let rhs = tolerance_factor(n, b, g).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9 * rhs);
    }

    #[test]
    fn tolerance_factor_monotone(n in 2usize..500, b in 0.05f64..0.9, g in 0.05f64..0.9) {
        let base = tolerance_factor(n, p(b), p(g)).unwrap();
        prop_assert!(tolerance_factor(n, p(b + 0.05), p(g)).unwrap() > base);
        prop_assert!(tolerance_factor(n, p(b), p(g + 0.05)).unwrap() > base);
    }

    #[test]
    fn tolerance_interval_homogeneous(mean in -100.0f64..100.0, sd in 0.0f64..50.0, c in 0.01f64..20.0, n in 2usize..300) {
        let s = SampleSummary::new(mean, sd, n).unwrap();
        let scaled = SampleSummary::new(mean, c * sd, n).unwrap();
        let a = normal_tolerance_interval(&s, p(0.9), p(0.9)).unwrap();
        let b = normal_tolerance_interval(&scaled, p(0.9), p(0.9)).unwrap();
        prop_assert!((b.size() - c * a.size()).abs() <= 1e-9 * (1.0 + b.size()));
        prop_assert!((a.center() - mean).abs() <= 1e-12 * (1.0 + mean.abs()));
    }
}
