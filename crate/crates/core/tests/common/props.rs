//! Property checks shared by the per-module property tests and the
//! acceptance run. Each takes a seed, builds a random instance from it and
//! returns an error describing the first violation.

use bopi_core::bopi::{eset, error_tolerance_interval, BopiPredictor, LhnpeConfig};
use bopi_core::llr::{cv_prediction_errors, knn, CvScheme, Dataset, LoessModel};
use bopi_core::metrics::{egsd, normalize_egsd};
use bopi_core::{ErrorSet, Probability};
use nalgebra::DMatrix;
use proptest::test_runner::TestCaseError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type PropResult = Result<(), TestCaseError>;

fn fail(msg: String) -> PropResult {
    Err(TestCaseError::fail(msg))
}

fn p(v: f64) -> Probability {
    Probability::new(v).unwrap()
}

/// `n` rows of `dim` features uniform on `[-2, 2]`.
pub fn random_rows(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect()
}

fn noisy_dataset(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Dataset {
    let rows = random_rows(rng, n, dim);
    let y = rows
        .iter()
        .map(|r| r.iter().map(|v| v.sin()).sum::<f64>() + rng.random_range(-0.5..0.5))
        .collect();
    Dataset::from_rows(&rows, y).unwrap()
}

pub fn linear_reproduction(seed: u64) -> PropResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = rng.random_range(1..=3);
    let n = rng.random_range(30..70);
    let rows = random_rows(&mut rng, n, dim);
    let coef: Vec<f64> = (0..=dim).map(|_| rng.random_range(-3.0..3.0)).collect();
    let truth = |x: &[f64]| coef[0] + x.iter().zip(&coef[1..]).map(|(a, b)| a * b).sum::<f64>();
    let y = rows.iter().map(|r| truth(r)).collect();
    let d = Dataset::from_rows(&rows, y).unwrap();
    let k = rng.random_range(dim + 4..=n);
    let m = LoessModel::new(&d, k).unwrap();
    for _ in 0..100 {
        let q: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let got = m.predict(&q).unwrap();
        let want = truth(&q);
        if (got - want).abs() > 1e-8 * (1.0 + want.abs()) {
            return fail(format!("linear reproduction: {got} vs {want} (K={k})"));
        }
    }
    Ok(())
}

/// Weighted SSE of `theta` on a local fit's neighborhood.
fn local_sse(d: &Dataset, x: &[f64], idx: &[usize], w: &[f64], theta: &[f64]) -> f64 {
    idx.iter()
        .zip(w)
        .map(|(&i, wi)| {
            let fit = theta[0]
                + d.row(i)
                    .iter()
                    .zip(x)
                    .zip(&theta[1..])
                    .map(|((a, b), t)| (a - b) * t)
                    .sum::<f64>();
            wi * (d.response()[i] - fit).powi(2)
        })
        .sum()
}

pub fn wls_optimality(seed: u64) -> PropResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = rng.random_range(1..=3);
    let n = rng.random_range(30..70);
    let d = noisy_dataset(&mut rng, n, dim);
    let k = rng.random_range(dim + 6..=n);
    let m = LoessModel::new(&d, k).unwrap();
    let q: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
    let fit = m.fit_local(&q).unwrap();
    let idx: Vec<usize> = fit.neighbors.iter().map(|nb| nb.index).collect();
    let base = local_sse(&d, &q, &idx, &fit.weights, &fit.coefficients);
    for j in 0..fit.coefficients.len() {
        for delta in [1e-4, -1e-4] {
            let mut theta = fit.coefficients.clone();
            theta[j] += delta;
            let sse = local_sse(&d, &q, &idx, &fit.weights, &theta);
            if sse < base - 1e-12 * base.abs().max(1.0) {
                return fail(format!("perturbing coefficient {j} by {delta} lowered SSE"));
            }
        }
    }
    // Against the explicit-inverse solve.
    let x = DMatrix::from_fn(idx.len(), dim + 1, |r, c| {
        if c == 0 {
            1.0
        } else {
            d.row(idx[r])[c - 1] - q[c - 1]
        }
    });
    let y: Vec<f64> = idx.iter().map(|&i| d.response()[i]).collect();
    if let Some(oracle) = super::dense_wls(&x, &fit.weights, &y) {
        for (a, b) in fit.coefficients.iter().zip(&oracle) {
            if (a - b).abs() > 1e-8 * (1.0 + b.abs()) {
                return fail(format!("WLS coefficients {a} vs dense oracle {b}"));
            }
        }
    }
    Ok(())
}

pub fn weight_locality(seed: u64) -> PropResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = rng.random_range(1..=3);
    let n = rng.random_range(40..80);
    let d = noisy_dataset(&mut rng, n, dim);
    let k = rng.random_range(dim + 4..n / 2);
    let m = LoessModel::new(&d, k).unwrap();
    let q: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
    let fit = m.fit_local(&q).unwrap();
    let b = fit.neighbors.last().unwrap().distance;
    for (nb, w) in fit.neighbors.iter().zip(&fit.weights) {
        if nb.distance >= b && *w != 0.0 {
            return fail(format!("weight {w} at distance {} >= bandwidth {b}", nb.distance));
        }
    }
    let inside: Vec<usize> = fit.neighbors.iter().map(|nb| nb.index).collect();
    let outside: Vec<usize> = (0..n).filter(|i| !inside.contains(i)).collect();
    let j = outside[rng.random_range(0..outside.len())];
    let mut y = d.response().to_vec();
    y[j] += rng.random_range(1.0..100.0);
    let d2 = d.with_response(y).unwrap();
    let m2 = LoessModel::new(&d2, k).unwrap();
    let (a, b) = (fit.prediction(), m2.predict(&q).unwrap());
    if a != b {
        return fail(format!("prediction moved from {a} to {b} after changing non-neighbor {j}"));
    }
    Ok(())
}

pub fn loo_independence(seed: u64) -> PropResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = rng.random_range(1..=2);
    let n = rng.random_range(30..60);
    let d = noisy_dataset(&mut rng, n, dim);
    let k = rng.random_range(dim + 4..n / 2);
    let i = rng.random_range(0..n);
    let delta = rng.random_range(-5.0..5.0);
    let mut y = d.response().to_vec();
    y[i] += delta;
    let d2 = d.with_response(y).unwrap();
    let e1 = cv_prediction_errors(&LoessModel::new(&d, k).unwrap(), CvScheme::LeaveOneOut, 0).unwrap();
    let e2 = cv_prediction_errors(&LoessModel::new(&d2, k).unwrap(), CvScheme::LeaveOneOut, 0).unwrap();
    if e1.predictions()[i] != e2.predictions()[i] {
        return fail(format!("held-out fit at {i} depends on y_{i}"));
    }
    let diff = e2.errors()[i] - e1.errors()[i];
    if (diff - delta).abs() > 1e-9 * (1.0 + delta.abs()) {
        return fail(format!("error moved by {diff}, response by {delta}"));
    }
    Ok(())
}

/// A heteroskedastic one-feature regression with its cross-validated
/// errors, plus `shift` and `scale` applied to the response.
pub struct BopiInstance {
    pub data: Dataset,
    pub k_loess: usize,
}

pub fn bopi_instance(rng: &mut ChaCha8Rng, shift: f64, scale: f64) -> BopiInstance {
    let n = 120;
    let rows: Vec<Vec<f64>> = random_rows(rng, n, 1);
    let y = rows
        .iter()
        .map(|r| {
            let noise: f64 = rng.random_range(-1.0..1.0);
            shift + scale * (r[0].sin() + (0.2 + 0.3 * (r[0] + 2.0)) * noise)
        })
        .collect();
    BopiInstance {
        data: Dataset::from_rows(&rows, y).unwrap(),
        k_loess: 50,
    }
}

fn errors_of(inst: &BopiInstance) -> (LoessModel<'_>, ErrorSet) {
    let m = LoessModel::new(&inst.data, inst.k_loess).unwrap();
    let es = cv_prediction_errors(&m, CvScheme::KFold(10), 17).unwrap();
    (m, es)
}

pub fn bopi_equivariance(seed: u64) -> PropResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift = rng.random_range(-50.0..50.0);
    let scale = rng.random_range(0.1..10.0);
    let inst_seed: u64 = rng.random();
    let base = bopi_instance(&mut ChaCha8Rng::seed_from_u64(inst_seed), 0.0, 1.0);
    let moved = bopi_instance(&mut ChaCha8Rng::seed_from_u64(inst_seed), shift, 1.0);
    let scaled = bopi_instance(&mut ChaCha8Rng::seed_from_u64(inst_seed), 0.0, scale);
    let beta = p(0.9);
    let cfgs = [LhnpeConfig::fixed(p(0.95), 30), LhnpeConfig::adaptive(p(0.95), 20, 45)];
    let (m0, e0) = errors_of(&base);
    let (m1, e1) = errors_of(&moved);
    let (m2, e2) = errors_of(&scaled);
    for cfg in cfgs {
        let b0 = BopiPredictor::new(&m0, &e0, beta, cfg).unwrap();
        let b1 = BopiPredictor::new(&m1, &e1, beta, cfg).unwrap();
        let b2 = BopiPredictor::new(&m2, &e2, beta, cfg).unwrap();
        for _ in 0..10 {
            let q = [rng.random_range(-2.0..2.0)];
            let (i0, i1, i2) = (
                b0.interval(&q).unwrap(),
                b1.interval(&q).unwrap(),
                b2.interval(&q).unwrap(),
            );
            let tol = 1e-7 * (1.0 + shift.abs()) * scale.max(1.0);
            if (i1.interval.lower() - i0.interval.lower() - shift).abs() > tol
                || (i1.interval.upper() - i0.interval.upper() - shift).abs() > tol
            {
                return fail(format!("shift by {shift} moved {:?} to {:?}", i0.interval, i1.interval));
            }
            if (i2.interval.size() - scale * i0.interval.size()).abs() > tol * (1.0 + i0.interval.size())
                || (i2.interval.center() - scale * i0.interval.center()).abs() > tol
            {
                return fail(format!("scale by {scale} mapped {:?} to {:?}", i0.interval, i2.interval));
            }
        }
    }
    Ok(())
}

pub fn adaptive_dominates_fixed(seed: u64) -> PropResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = bopi_instance(&mut rng, 0.0, 1.0);
    let (m, es) = errors_of(&inst);
    let gamma = p([0.8, 0.9, 0.95, 0.99][rng.random_range(0..4)]);
    let beta = p(0.9);
    let k_min = rng.random_range(20..35);
    let k_max = rng.random_range(k_min..=inst.k_loess);
    let k_f = rng.random_range(k_min..=k_max);
    let a = BopiPredictor::new(&m, &es, beta, LhnpeConfig::adaptive(gamma, k_min, k_max)).unwrap();
    let f = BopiPredictor::new(&m, &es, beta, LhnpeConfig::fixed(gamma, k_f)).unwrap();
    for _ in 0..10 {
        let q = [rng.random_range(-2.0..2.0)];
        let (wa, wf) = (a.interval(&q).unwrap().interval.size(), f.interval(&q).unwrap().interval.size());
        if wa > wf + 1e-12 {
            return fail(format!("A-BOPI {wa} wider than F-BOPI {wf} (K_f={k_f} in [{k_min}, {k_max}])"));
        }
    }
    Ok(())
}

/// Interval minus prediction equals the tolerance interval of the chosen
/// neighborhood's errors, found by brute force; A-BOPI's K is the first
/// minimizer of an exhaustive scan.
pub fn decomposition(seed: u64) -> PropResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = bopi_instance(&mut rng, 0.0, 1.0);
    let (m, es) = errors_of(&inst);
    let beta = p(0.9);
    let gamma = p(0.95);
    let k_min = rng.random_range(20..30);
    let k_max = rng.random_range(k_min..=inst.k_loess);
    let a = BopiPredictor::new(&m, &es, beta, LhnpeConfig::adaptive(gamma, k_min, k_max)).unwrap();
    for _ in 0..5 {
        let q = [rng.random_range(-2.0..2.0)];
        let got = a.interval(&q).unwrap();
        let fhat = m.predict(&q).unwrap();
        let mut best = (f64::INFINITY, 0);
        for k in k_min..=k_max {
            let w = error_tolerance_interval(eset(&es, &inst.data, &q, k).unwrap().errors(), beta, gamma)
                .unwrap()
                .size();
            if w < best.0 {
                best = (w, k);
            }
        }
        if got.k != best.1 {
            return fail(format!("chose K={} but the scan minimum is at {}", got.k, best.1));
        }
        let want = error_tolerance_interval(eset(&es, &inst.data, &q, got.k).unwrap().errors(), beta, gamma)
            .unwrap();
        let lo = got.interval.lower() - fhat;
        let hi = got.interval.upper() - fhat;
        if (lo - want.lower()).abs() > 1e-10 || (hi - want.upper()).abs() > 1e-10 {
            return fail(format!("[{lo}, {hi}] vs tolerance interval {want:?}"));
        }
        // The brute-force neighbor set agrees with the model's index.
        let nb = knn(&inst.data, &q, got.k).unwrap();
        let model_nb = m.neighbors(&q, got.k).unwrap();
        if nb != model_nb {
            return fail("neighbor index disagrees with brute force".into());
        }
    }
    Ok(())
}

pub fn egsd_identities(seed: u64) -> PropResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sd = rng.random_range(0.01..100.0);
    let cov = rng.random_range(0.05..0.995);
    let z = super::normal_quantile(1.0 - (1.0 - cov) / 2.0);
    let e = egsd(2.0 * z * sd, cov).unwrap();
    if (e - sd).abs() > 1e-8 * sd {
        return fail(format!("EGSD of a Gaussian interval: {e} vs {sd}"));
    }
    let mis = rng.random_range(0.01..100.0);
    let a = egsd(mis, cov).unwrap();
    if (egsd(2.0 * mis, cov).unwrap() - 2.0 * a).abs() > 1e-12 * a {
        return fail("EGSD not linear in MIS".into());
    }
    let higher = (cov + 0.004).min(0.999);
    if egsd(mis, higher).unwrap() >= a {
        return fail("EGSD not decreasing in coverage".into());
    }
    Ok(())
}

pub fn normalization_invariants(seed: u64) -> PropResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = rng.random_range(1..8);
    let v: Vec<f64> = (0..len).map(|_| rng.random_range(0.01..10.0)).collect();
    let c = rng.random_range(0.01..100.0);
    let a = normalize_egsd(&v).unwrap();
    let scaled: Vec<f64> = v.iter().map(|x| x * c).collect();
    let b = normalize_egsd(&scaled).unwrap();
    let max = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max != 1.0 || a.iter().any(|&x| x <= 0.0 || x > 1.0) {
        return fail(format!("normalized values {a:?} outside (0, 1] or max != 1"));
    }
    for (x, y) in a.iter().zip(&b) {
        if (x - y).abs() > 1e-12 {
            return fail("normalization not scale invariant".into());
        }
    }
    for i in 0..len {
        for j in 0..len {
            if (v[i] < v[j]) != (a[i] < a[j]) {
                return fail("normalization changed the ranking".into());
            }
        }
    }
    Ok(())
}
