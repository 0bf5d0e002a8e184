use std::f64::consts::PI;

use bopi_core::simlab::{
    friedman1_mean, friedman2_mean, run_simulation, sample_raw, DgpSpec, Family, Method, SimHyper,
    SimulationConfig,
};
use bopi_core::Probability;

#[test]
fn friedman1_mean_response() {
    let spec = DgpSpec::new(Family::Friedman1, 100_000, 11);
    let (_, y) = sample_raw(&spec, 0).unwrap();
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    // 10 E sin(pi x1 x2) by quadrature, plus 20/12 + 5 + 2.5.
    let m = 400;
    let mut s = 0.0;
    for i in 0..m {
        for j in 0..m {
            let (a, b) = ((i as f64 + 0.5) / m as f64, (j as f64 + 0.5) / m as f64);
            s += (PI * a * b).sin();
        }
    }
    let expected = 10.0 * s / (m * m) as f64 + 20.0 / 12.0 + 7.5;
    assert!((expected - 14.41).abs() < 0.01);
    assert!((mean - expected).abs() < 0.05, "{mean} vs {expected}");
}

#[test]
fn friedman1_ignores_trailing_features() {
    let x: Vec<f64> = (0..10).map(|i| 0.05 + 0.09 * i as f64).collect();
    let mut swapped = x.clone();
    swapped[5..].reverse();
    assert_eq!(friedman1_mean(&x), friedman1_mean(&swapped));
}

#[test]
fn friedman2_ranges_and_minimum() {
    let spec = DgpSpec::new(Family::Friedman2, 100_000, 3);
    let (rows, _) = sample_raw(&spec, 0).unwrap();
    for r in &rows {
        assert!((0.0..=100.0).contains(&r[0]));
        assert!((40.0 * PI..=560.0 * PI).contains(&r[1]));
        assert!((0.0..=1.0).contains(&r[2]));
        assert!((1.0..=11.0).contains(&r[3]));
    }
    let x2 = 40.0 * PI;
    let second = |x3: f64, x4: f64| (x2 * x3 - 1.0 / (x2 * x4)).powi(2);
    assert!(second(0.0, 11.0) <= second(0.0, 1.0));
    assert_eq!(friedman2_mean(&[0.0, x2, 0.0, 11.0]), 1.0 / (x2 * 11.0));
}

#[test]
fn simulation_is_deterministic() {
    let dgp = DgpSpec::new(Family::Friedman1, 300, 9);
    let cfg = SimulationConfig {
        n_sim: 3,
        beta: Probability::new(0.9).unwrap(),
        gamma: Probability::new(0.95).unwrap(),
        methods: Method::ALL.to_vec(),
        hyper: SimHyper::default(),
        seed: 4,
    };
    let a = run_simulation(&dgp, &cfg).unwrap();
    let b = run_simulation(&dgp, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.records.len(), 3 * Method::ALL.len());
}
