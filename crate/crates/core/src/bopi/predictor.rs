use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{LhnpeConfig, LhnpeVariant, MIN_LHNPE_K};
use crate::error::{Error, Result};
use crate::intervals::{conventional_interval, tolerance_factor, Interval, IntervalBand, SampleSummary};
use crate::llr::{knn, Dataset, ErrorSet, LoessModel, Neighbor};
use crate::stat_dist::Probability;

/// Local homoskedastic neighborhood of prediction errors: the
/// cross-validated errors of the K training points nearest to a query.
#[derive(Debug, Clone, PartialEq)]
pub struct Eset {
    errors: Vec<f64>,
    neighbors: Vec<Neighbor>,
}

impl Eset {
    fn gather(es: &ErrorSet, neighbors: Vec<Neighbor>) -> Self {
        Self {
            errors: neighbors.iter().map(|nb| es.errors()[nb.index]).collect(),
            neighbors,
        }
    }

    /// Errors ordered by increasing distance of their training point.
    pub fn errors(&self) -> &[f64] {
        &self.errors
    }

    pub fn neighbors(&self) -> &[Neighbor] {
        &self.neighbors
    }

    pub fn len(&self) -> usize {
        self.errors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.errors.is_empty()
    }
}

fn check_error_set(es: &ErrorSet, d: &Dataset) -> Result<()> {
    if es.len() != d.len() {
        return Err(Error::LengthMismatch {
            expected: d.len(),
            actual: es.len(),
        });
    }
    Ok(())
}

/// The `k` nearest training errors to `x` (brute-force search).
pub fn eset(es: &ErrorSet, d: &Dataset, x: &[f64], k: usize) -> Result<Eset> {
    check_error_set(es, d)?;
    if k < MIN_LHNPE_K || k > d.len() {
        return Err(Error::NeighborCount {
            k,
            min: MIN_LHNPE_K,
            max: d.len(),
        });
    }
    Ok(Eset::gather(es, knn(d, x, k)?))
}

/// Two-sided `beta`-content, `gamma`-confidence normal tolerance interval
/// over a set of at least [`MIN_LHNPE_K`] prediction errors.
pub fn error_tolerance_interval(errors: &[f64], beta: Probability, gamma: Probability) -> Result<Interval> {
    if errors.len() < MIN_LHNPE_K {
        return Err(Error::NeighborCount {
            k: errors.len(),
            min: MIN_LHNPE_K,
            max: usize::MAX,
        });
    }
    let s = SampleSummary::from_sample(errors)?;
    Interval::centered(s.mean, tolerance_factor(errors.len(), beta, gamma)? * s.sd)
}

/// Tolerance factors for every neighborhood size in `[k_low, k_high]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToleranceFactors {
    k_low: usize,
    factors: Vec<f64>,
}

impl ToleranceFactors {
    pub fn new(k_low: usize, k_high: usize, beta: Probability, gamma: Probability) -> Result<Self> {
        let factors = (k_low..=k_high)
            .map(|k| tolerance_factor(k, beta, gamma))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self { k_low, factors })
    }

    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        self.factors[k - self.k_low]
    }
}

/// A BOPI interval with the quantities behind it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BopiInterval {
    pub interval: Interval,
    /// Tolerance interval on the prediction errors, before shifting by the
    /// prediction.
    pub error_interval: Interval,
    pub prediction: f64,
    /// Neighborhood size that was used.
    pub k: usize,
}

/// Coverage and mean size of training-set BOPI intervals, each built from
/// the point's neighbors with the point itself left out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingFit {
    pub coverage: f64,
    pub mis: f64,
}

/// For each training row, the indices of its nearest other rows.
#[derive(Debug, Clone)]
pub struct TrainingNeighbors {
    depth: usize,
    lists: Vec<Vec<usize>>,
}

impl TrainingNeighbors {
    pub fn build(model: &LoessModel<'_>, depth: usize) -> Result<Self> {
        let d = model.data();
        let lists = (0..d.len())
            .into_par_iter()
            .map(|i| {
                model
                    .neighbors_excluding(d.row(i), depth, i)
                    .map(|nb| nb.into_iter().map(|n| n.index).collect())
            })
            .collect::<Result<Vec<Vec<usize>>>>()?;
        Ok(Self { depth, lists })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Rebuilds with a larger depth if needed.
    pub fn ensure(&mut self, model: &LoessModel<'_>, depth: usize) -> Result<()> {
        if depth > self.depth {
            *self = Self::build(model, depth)?;
        }
        Ok(())
    }
}

/// F-BOPI and A-BOPI intervals for one fitted loess model.
#[derive(Debug, Clone)]
pub struct BopiPredictor<'m, 'a> {
    model: &'m LoessModel<'a>,
    errors: &'m ErrorSet,
    beta: Probability,
    config: LhnpeConfig,
    factors: ToleranceFactors,
}

impl<'m, 'a> BopiPredictor<'m, 'a> {
    /// `errors` must be the cross-validated errors on the model's own
    /// training data.
    pub fn new(
        model: &'m LoessModel<'a>,
        errors: &'m ErrorSet,
        beta: Probability,
        config: LhnpeConfig,
    ) -> Result<Self> {
        check_error_set(errors, model.data())?;
        let config = config.validated(model.data().len(), model.k(), beta)?;
        let factors = ToleranceFactors::new(
            config.variant.k_low(),
            config.variant.k_high(),
            beta,
            config.gamma,
        )?;
        Ok(Self {
            model,
            errors,
            beta,
            config,
            factors,
        })
    }

    pub fn config(&self) -> &LhnpeConfig {
        &self.config
    }

    pub fn beta(&self) -> Probability {
        self.beta
    }

    /// Tolerance interval over the leading errors of `ordered` (nearest
    /// first), with the neighborhood size chosen by the variant.
    fn error_interval(&self, ordered: &[f64]) -> Result<(Interval, usize)> {
        let at = |k: usize| -> Result<Interval> {
            let s = SampleSummary::from_sample(&ordered[..k])?;
            Interval::centered(s.mean, self.factors.get(k) * s.sd)
        };
        match self.config.variant {
            LhnpeVariant::Fixed { k } => Ok((at(k)?, k)),
            LhnpeVariant::Adaptive { k_min, k_max } => {
                let mut best: Option<(Interval, usize)> = None;
                for k in (k_min..=k_max).step_by(self.config.k_step) {
                    let iv = at(k)?;
                    if best.is_none_or(|(b, _)| iv.size() < b.size()) {
                        best = Some((iv, k));
                    }
                }
                Ok(best.expect("scan range is nonempty"))
            }
        }
    }

    pub fn interval(&self, x: &[f64]) -> Result<BopiInterval> {
        let prediction = self.model.predict(x)?;
        let neighbors = self.model.neighbors(x, self.config.variant.k_high())?;
        let e = Eset::gather(self.errors, neighbors);
        let (error_interval, k) = self.error_interval(e.errors())?;
        Ok(BopiInterval {
            interval: error_interval.shift(prediction),
            error_interval,
            prediction,
            k,
        })
    }

    /// Intervals at every row of `queries`, with the neighborhood size used
    /// for each.
    pub fn band(&self, queries: &Dataset) -> Result<(IntervalBand, Vec<usize>)> {
        let out = (0..queries.len())
            .into_par_iter()
            .map(|i| self.interval(queries.row(i)))
            .collect::<Result<Vec<BopiInterval>>>()?;
        Ok((
            out.iter().map(|b| b.interval).collect(),
            out.iter().map(|b| b.k).collect(),
        ))
    }

    /// Training-set coverage of the cross-validated errors and mean interval
    /// size. Each row's interval is built from its nearest other rows, so
    /// its own error is out of sample.
    pub fn training_fit(&self, neighbors: &TrainingNeighbors) -> Result<TrainingFit> {
        let depth = self.config.variant.k_high();
        if neighbors.depth() < depth {
            return Err(Error::Config(format!(
                "neighbor cache depth {} below {depth}",
                neighbors.depth()
            )));
        }
        let errs = self.errors.errors();
        let (covered, total) = neighbors
            .lists
            .par_iter()
            .enumerate()
            .map(|(i, list)| {
                let ordered: Vec<f64> = list[..depth].iter().map(|&j| errs[j]).collect();
                let (iv, _) = self.error_interval(&ordered)?;
                Ok((usize::from(iv.contains(errs[i])), iv.size()))
            })
            .collect::<Result<Vec<(usize, f64)>>>()?
            .into_iter()
            .fold((0usize, 0.0), |(c, s), (ci, si)| (c + ci, s + si));
        let n = neighbors.lists.len() as f64;
        Ok(TrainingFit {
            coverage: covered as f64 / n,
            mis: total / n,
        })
    }
}

/// F-BOPI interval at `x`. `cfg` must be the fixed variant.
pub fn f_bopi_interval(
    m: &LoessModel<'_>,
    es: &ErrorSet,
    x: &[f64],
    beta: Probability,
    cfg: &LhnpeConfig,
) -> Result<Interval> {
    if !matches!(cfg.variant, LhnpeVariant::Fixed { .. }) {
        return Err(Error::Config("F-BOPI needs a fixed neighborhood".into()));
    }
    Ok(BopiPredictor::new(m, es, beta, *cfg)?.interval(x)?.interval)
}

/// A-BOPI interval at `x` and the neighborhood size it selected. `cfg` must
/// be the adaptive variant.
pub fn a_bopi_interval(
    m: &LoessModel<'_>,
    es: &ErrorSet,
    x: &[f64],
    beta: Probability,
    cfg: &LhnpeConfig,
) -> Result<(Interval, usize)> {
    if !matches!(cfg.variant, LhnpeVariant::Adaptive { .. }) {
        return Err(Error::Config("A-BOPI needs an adaptive neighborhood".into()));
    }
    let b = BopiPredictor::new(m, es, beta, *cfg)?.interval(x)?;
    Ok((b.interval, b.k))
}

/// Constant-width loess intervals `fhat(x) +/- Z * RMSE` with the RMSE of
/// the cross-validated errors.
pub fn conventional_band(
    m: &LoessModel<'_>,
    es: &ErrorSet,
    queries: &Dataset,
    beta: Probability,
) -> Result<IntervalBand> {
    if es.is_empty() {
        return Err(Error::Empty("error set".into()));
    }
    let rmse = es.rmse();
    m.predict_dataset(queries)?
        .into_iter()
        .map(|f| conventional_interval(f, rmse, beta))
        .collect::<Result<Vec<Interval>>>()
        .map(IntervalBand)
}
