//! Exhaustive grid search over LHNPE configurations, the reference for the
//! greedy tuner.

use bopi_core::bopi::{gamma_floor, training_fit, LhnpeConfig, TrainingFit};
use bopi_core::llr::{Dataset, ErrorSet, LoessModel};
use bopi_core::Probability;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` points with two uniform features and Gaussian noise of constant sd.
pub fn homoscedastic(n: usize, sd: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let x: [f64; 2] = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        // Box-Muller.
        let (u1, u2): (f64, f64) = (1.0 - rng.random::<f64>(), rng.random());
        let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        y.push(x[0].sin() + 0.5 * x[1] + sd * z);
        rows.push(x.to_vec());
    }
    Dataset::from_rows(&rows, y).unwrap()
}

pub fn oracle_gammas() -> Vec<f64> {
    let mut g: Vec<f64> = (0..10).map(|i| (50 + 5 * i) as f64 / 100.0).collect();
    g.push(0.99);
    g
}

/// Feasible configuration with the smallest training MIS among fixed
/// neighborhoods `20, 25, ..., max_k` (or adaptive ranges `(k, k + 10)`)
/// and every grid confidence level allowed for them.
pub fn grid_optimum(
    m: &LoessModel<'_>,
    es: &ErrorSet,
    beta: Probability,
    adaptive: bool,
    max_k: usize,
) -> Option<(LhnpeConfig, TrainingFit)> {
    let mut best: Option<(LhnpeConfig, TrainingFit)> = None;
    let top = if adaptive { max_k - 10 } else { max_k };
    for k in (20..=top).step_by(5) {
        for &g in &oracle_gammas() {
            if g < gamma_floor(beta, k) - 1e-12 {
                continue;
            }
            let gamma = Probability::new(g).unwrap();
            let cfg = if adaptive {
                LhnpeConfig::adaptive(gamma, k, k + 10)
            } else {
                LhnpeConfig::fixed(gamma, k)
            };
            let fit = training_fit(m, es, beta, &cfg).unwrap();
            if fit.coverage >= beta.value() && best.is_none_or(|(_, b)| fit.mis < b.mis) {
                best = Some((cfg, fit));
            }
        }
    }
    best
}
