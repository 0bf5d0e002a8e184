//! Friedman benchmark generators and the Monte Carlo protocol that compares
//! interval methods on repeated train/test splits.
//!
//! Randomness comes from ChaCha8 seeded with `DgpSpec::seed`; iteration `i`
//! of a simulation draws from stream `i`, so iterations can run in any order
//! or in parallel and still produce the same samples. Normal variates are
//! inverse-CDF transforms of uniforms.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bopi::{conventional_band, BopiPredictor, LhnpeConfig};
use crate::error::{domain, Error, Result};
use crate::intervals::IntervalBand;
use crate::llr::{cv_prediction_errors, fit_ols, ols_prediction_interval, CvScheme, Dataset, LoessModel};
use crate::metrics::{coverage, mis};
use crate::stat_dist::{std_normal_quantile, Probability};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Friedman1,
    Friedman2,
}

impl Family {
    pub fn default_noise_sd(self) -> f64 {
        match self {
            Family::Friedman1 => 1.0,
            Family::Friedman2 => 125f64.sqrt(),
        }
    }

    pub fn n_features(self) -> usize {
        match self {
            Family::Friedman1 => 10,
            Family::Friedman2 => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    pub family: Family,
    pub n: usize,
    pub noise_sd: f64,
    pub seed: u64,
}

impl DgpSpec {
    pub fn new(family: Family, n: usize, seed: u64) -> Self {
        Self {
            family,
            n,
            noise_sd: family.default_noise_sd(),
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("sample size must be positive".into()));
        }
        if !(self.noise_sd >= 0.0) || !self.noise_sd.is_finite() {
            return Err(Error::Config(format!("noise sd {} must be nonnegative", self.noise_sd)));
        }
        Ok(())
    }
}

/// Uniform on the open interval (0, 1).
fn open_uniform(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    std_normal_quantile(Probability::new(open_uniform(rng)).expect("open uniform"))
}

/// `10 sin(pi x1 x2) + 20 (x3 - 0.5)^2 + 10 x4 + 5 x5`.
pub fn friedman1_mean(x: &[f64]) -> f64 {
    10.0 * (PI * x[0] * x[1]).sin() + 20.0 * (x[2] - 0.5).powi(2) + 10.0 * x[3] + 5.0 * x[4]
}

/// `sqrt(x1^2 + (x2 x3 - 1 / (x2 x4))^2)`.
pub fn friedman2_mean(x: &[f64]) -> f64 {
    (x[0] * x[0] + (x[1] * x[2] - 1.0 / (x[1] * x[3])).powi(2)).sqrt()
}

/// Raw features and responses from stream `stream` seeded by `spec.seed`.
pub fn sample_raw(spec: &DgpSpec, stream: u64) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(stream);
    let mut rows = Vec::with_capacity(spec.n);
    let mut y = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let (x, mean) = match spec.family {
            Family::Friedman1 => {
                let x: Vec<f64> = (0..10).map(|_| open_uniform(&mut rng)).collect();
                let m = friedman1_mean(&x);
                (x, m)
            }
            Family::Friedman2 => {
                let x = vec![
                    100.0 * open_uniform(&mut rng),
                    40.0 * PI + 520.0 * PI * open_uniform(&mut rng),
                    open_uniform(&mut rng),
                    1.0 + 10.0 * open_uniform(&mut rng),
                ];
                let m = friedman2_mean(&x);
                (x, m)
            }
        };
        y.push(mean + spec.noise_sd * normal(&mut rng));
        rows.push(x);
    }
    Ok((rows, y))
}

fn standardized_sample(spec: &DgpSpec, stream: u64) -> Result<Dataset> {
    let (rows, y) = sample_raw(spec, stream)?;
    let names: Vec<String> = (1..=spec.family.n_features()).map(|i| format!("x{i}")).collect();
    Dataset::standardized(&names, &rows, y)
}

/// Friedman #1 sample with standardized features; the encoder recovers the
/// raw values on `[0, 1]`.
pub fn friedman1(spec: &DgpSpec) -> Result<Dataset> {
    if spec.family != Family::Friedman1 {
        return Err(Error::Config("friedman1 called with another family".into()));
    }
    standardized_sample(spec, 0)
}

/// Friedman #2 sample with standardized features.
pub fn friedman2(spec: &DgpSpec) -> Result<Dataset> {
    if spec.family != Family::Friedman2 {
        return Err(Error::Config("friedman2 called with another family".into()));
    }
    standardized_sample(spec, 0)
}

/// Interval method under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "OLS")]
    Ols,
    #[serde(rename = "Loess Conv.")]
    Conventional,
    #[serde(rename = "F-BOPI")]
    FBopi,
    #[serde(rename = "A-BOPI")]
    ABopi,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Ols, Method::Conventional, Method::FBopi, Method::ABopi];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ols => "OLS",
            Method::Conventional => "Loess Conv.",
            Method::FBopi => "F-BOPI",
            Method::ABopi => "A-BOPI",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect();
        match key.to_ascii_lowercase().as_str() {
            "ols" => Ok(Method::Ols),
            "conv" | "conventional" | "loessconv" => Ok(Method::Conventional),
            "fbopi" => Ok(Method::FBopi),
            "abopi" => Ok(Method::ABopi),
            _ => Err(Error::Config(format!("unknown method {s:?}"))),
        }
    }
}

/// Everything needed to build each method's intervals on a split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodSettings {
    pub k_loess: usize,
    pub cv: CvScheme,
    pub fixed: LhnpeConfig,
    pub adaptive: LhnpeConfig,
}

/// Intervals of each method at every row of `test`, after fitting on
/// `train`. Bands come back in the order of `methods`.
pub fn method_bands(
    train: &Dataset,
    test: &Dataset,
    beta: Probability,
    methods: &[Method],
    settings: &MethodSettings,
    cv_seed: u64,
) -> Result<Vec<IntervalBand>> {
    let needs_loess = methods.iter().any(|m| *m != Method::Ols);
    let k = settings.k_loess.min(train.len());
    let model = if needs_loess {
        Some(LoessModel::new(train, k)?)
    } else {
        None
    };
    let errors = match &model {
        Some(m) => Some(cv_prediction_errors(m, settings.cv, cv_seed)?),
        None => None,
    };
    methods
        .iter()
        .map(|&method| match method {
            Method::Ols => {
                let cols = train.reference_coded_columns();
                let (train, test) = (train.select_columns(&cols), test.select_columns(&cols));
                let ols = fit_ols(&train)?;
                (0..test.len())
                    .map(|i| ols_prediction_interval(&ols, test.row(i), beta))
                    .collect::<Result<Vec<_>>>()
                    .map(IntervalBand)
            }
            Method::Conventional => conventional_band(
                model.as_ref().expect("loess fitted"),
                errors.as_ref().expect("errors computed"),
                test,
                beta,
            ),
            Method::FBopi | Method::ABopi => {
                let cfg = if method == Method::FBopi {
                    settings.fixed
                } else {
                    settings.adaptive
                };
                let p = BopiPredictor::new(
                    model.as_ref().expect("loess fitted"),
                    errors.as_ref().expect("errors computed"),
                    beta,
                    cfg,
                )?;
                Ok(p.band(test)?.0)
            }
        })
        .collect()
}

/// Fixed hyper-parameters of a simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimHyper {
    pub k_loess: usize,
    pub k_fixed: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub cv: CvScheme,
}

impl Default for SimHyper {
    fn default() -> Self {
        Self {
            k_loess: 100,
            k_fixed: 40,
            k_min: 30,
            k_max: 50,
            cv: CvScheme::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub n_sim: usize,
    pub beta: Probability,
    pub gamma: Probability,
    pub methods: Vec<Method>,
    pub hyper: SimHyper,
    /// Seed of the cross-validation fold assignment.
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub method: Method,
    pub coverage: f64,
    pub mis: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodAggregate {
    pub method: Method,
    pub coverage_mean: f64,
    pub coverage_sd: f64,
    pub mis_mean: f64,
    pub mis_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    /// Ordered by iteration, then by the configured method order.
    pub records: Vec<IterationRecord>,
    /// One entry per method, in the configured order.
    pub aggregates: Vec<MethodAggregate>,
}

impl SimulationResult {
    pub fn aggregate(&self, method: Method) -> Option<&MethodAggregate> {
        self.aggregates.iter().find(|a| a.method == method)
    }

    pub fn coverages(&self, method: Method) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.method == method)
            .map(|r| r.coverage)
            .collect()
    }
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = if v.len() > 1 {
        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

/// Runs `cfg.n_sim` iterations: fresh sample, first two thirds for training
/// and the rest for testing, cross-validated errors on the training part,
/// then coverage and mean interval size of every method on the test part.
pub fn run_simulation(dgp: &DgpSpec, cfg: &SimulationConfig) -> Result<SimulationResult> {
    dgp.validate()?;
    if cfg.methods.is_empty() {
        return Err(Error::Config("no methods requested".into()));
    }
    if cfg.n_sim == 0 {
        return Err(Error::Config("n_sim must be positive".into()));
    }
    let n_train = dgp.n * 2 / 3;
    if n_train == 0 || n_train == dgp.n {
        return Err(domain(format!("sample size {} too small to split", dgp.n)));
    }
    let h = cfg.hyper;
    let settings = MethodSettings {
        k_loess: h.k_loess,
        cv: h.cv,
        fixed: LhnpeConfig::fixed(cfg.gamma, h.k_fixed),
        adaptive: LhnpeConfig::adaptive(cfg.gamma, h.k_min, h.k_max),
    };
    let per_iteration = (0..cfg.n_sim)
        .into_par_iter()
        .map(|it| {
            let data = standardized_sample(dgp, it as u64)?;
            let train_idx: Vec<usize> = (0..n_train).collect();
            let test_idx: Vec<usize> = (n_train..dgp.n).collect();
            let train = data.subset(&train_idx);
            let test = data.subset(&test_idx);
            let bands = method_bands(
                &train,
                &test,
                cfg.beta,
                &cfg.methods,
                &settings,
                cfg.seed.wrapping_add(it as u64),
            )?;
            cfg.methods
                .iter()
                .zip(&bands)
                .map(|(&method, band)| {
                    Ok(IterationRecord {
                        iteration: it,
                        method,
                        coverage: coverage(band, test.response())?,
                        mis: mis(band)?.0,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<Vec<IterationRecord>>>>()?;
    let records: Vec<IterationRecord> = per_iteration.into_iter().flatten().collect();
    let aggregates = cfg
        .methods
        .iter()
        .map(|&method| {
            let cov: Vec<f64> = records.iter().filter(|r| r.method == method).map(|r| r.coverage).collect();
            let size: Vec<f64> = records.iter().filter(|r| r.method == method).map(|r| r.mis).collect();
            let (coverage_mean, coverage_sd) = mean_sd(&cov);
            let (mis_mean, mis_sd) = mean_sd(&size);
            MethodAggregate {
                method,
                coverage_mean,
                coverage_sd,
                mis_mean,
                mis_sd,
            }
        })
        .collect();
    Ok(SimulationResult { records, aggregates })
}
