//! Greedy search for the LHNPE hyper-parameters on the training set.
//!
//! Starting from the most conservative configuration (`gamma = 0.99`, the
//! smallest neighborhood), the search alternately grows the neighborhood and
//! lowers the confidence level. Each move is kept only while the training
//! coverage stays at or above `beta` and the mean interval size does not
//! increase; otherwise the previous configuration is restored and the other
//! parameter is tried.

use serde::{Deserialize, Serialize};

use super::config::{gamma_floor, LhnpeConfig, LhnpeVariant, MAX_LHNPE_K, MIN_LHNPE_K};
use super::predictor::{BopiPredictor, TrainingFit, TrainingNeighbors};
use crate::error::{Error, Result};
use crate::llr::{ErrorSet, LoessModel};
use crate::stat_dist::Probability;

/// Confidence levels tried in order: 0.99, then 0.95 down to 0.5 by 0.05.
pub fn default_gamma_grid() -> Vec<f64> {
    std::iter::once(0.99)
        .chain((0..10).map(|i| (95 - 5 * i) as f64 / 100.0))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneOptions {
    /// Starting neighborhood; also selects the variant.
    pub initial: LhnpeVariant,
    /// Descending confidence levels; the first is the start.
    pub gamma_grid: Vec<f64>,
    /// Neighborhood increment per move.
    pub k_step: usize,
    /// Stride of the adaptive scan inside each interval.
    pub scan_step: usize,
    pub outer_iterations: usize,
    /// Upper bound on the neighborhood. Defaults to the regression
    /// bandwidth.
    pub max_k: Option<usize>,
}

impl TuneOptions {
    pub fn fixed() -> Self {
        Self::starting_at(LhnpeVariant::Fixed { k: MIN_LHNPE_K })
    }

    pub fn adaptive() -> Self {
        Self::starting_at(LhnpeVariant::Adaptive {
            k_min: MIN_LHNPE_K,
            k_max: MIN_LHNPE_K + 10,
        })
    }

    pub fn starting_at(initial: LhnpeVariant) -> Self {
        Self {
            initial,
            gamma_grid: default_gamma_grid(),
            k_step: 5,
            scan_step: 1,
            outer_iterations: 3,
            max_k: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TunePhase {
    Start,
    Neighborhood,
    Confidence,
}

/// One evaluated configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuneStep {
    pub phase: TunePhase,
    pub config: LhnpeConfig,
    pub fit: TrainingFit,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneOutcome {
    pub config: LhnpeConfig,
    pub fit: TrainingFit,
    /// False when even the starting configuration missed the target
    /// coverage; the starting configuration is returned in that case.
    pub feasible: bool,
    pub trace: Vec<TuneStep>,
}

struct Search<'s, 'm, 'a> {
    model: &'s LoessModel<'a>,
    errors: &'m ErrorSet,
    beta: Probability,
    k_bound: usize,
    neighbors: TrainingNeighbors,
}

impl Search<'_, '_, '_> {
    fn evaluate(&mut self, cfg: &LhnpeConfig) -> Result<TrainingFit> {
        self.neighbors.ensure(self.model, cfg.variant.k_high())?;
        let mut cfg = *cfg;
        cfg.allow_beyond_loess = cfg.variant.k_high() > self.model.k();
        let predictor = BopiPredictor::new(self.model, self.errors, self.beta, cfg)?;
        predictor.training_fit(&self.neighbors)
    }

    fn feasible(&self, fit: &TrainingFit) -> bool {
        fit.coverage >= self.beta.value()
    }
}

/// Tunes the LHNPE configuration of one variant for a fitted model and its
/// cross-validated errors.
pub fn tune_hyperparams(
    model: &LoessModel<'_>,
    errors: &ErrorSet,
    beta: Probability,
    opts: &TuneOptions,
) -> Result<TuneOutcome> {
    let n = model.data().len();
    let mut k_bound = opts.max_k.unwrap_or(model.k()).min(n.saturating_sub(1));
    if k_bound > MAX_LHNPE_K {
        log::warn!("tuning bound {k_bound} clamped to {MAX_LHNPE_K}");
        k_bound = MAX_LHNPE_K;
    }
    let mut initial = opts.initial;
    if let LhnpeVariant::Adaptive { k_min, k_max } = initial {
        if k_max > k_bound && k_min <= k_bound {
            initial = LhnpeVariant::Adaptive {
                k_min,
                k_max: k_bound,
            };
        }
    }
    if initial.k_low() < MIN_LHNPE_K || initial.k_high() > k_bound {
        return Err(Error::Config(format!(
            "starting neighborhood [{}, {}] outside [{MIN_LHNPE_K}, {k_bound}]",
            initial.k_low(),
            initial.k_high()
        )));
    }
    if opts.gamma_grid.is_empty() || opts.k_step == 0 || opts.scan_step == 0 {
        return Err(Error::Config("empty gamma grid or zero step".into()));
    }
    let start = LhnpeConfig {
        gamma: Probability::new(opts.gamma_grid[0])?,
        variant: initial,
        k_step: opts.scan_step,
        allow_beyond_loess: false,
    };

    let mut search = Search {
        model,
        errors,
        beta,
        k_bound,
        neighbors: TrainingNeighbors::build(model, initial.k_high())?,
    };
    let mut trace = Vec::new();
    let mut current = start;
    let mut gamma_pos = 0;
    let mut fit = search.evaluate(&current)?;
    let feasible = search.feasible(&fit);
    trace.push(TuneStep {
        phase: TunePhase::Start,
        config: current,
        fit,
        accepted: true,
    });
    if !feasible {
        log::warn!(
            "no configuration reaches coverage {} on the training set (best start {:.4})",
            beta.value(),
            fit.coverage
        );
    }

    for _ in 0..opts.outer_iterations {
        if !feasible {
            break;
        }
        loop {
            let grown = current.variant.grown(opts.k_step);
            if grown.k_high() > search.k_bound {
                break;
            }
            let candidate = LhnpeConfig {
                variant: grown,
                ..current
            };
            let cand_fit = search.evaluate(&candidate)?;
            let accepted = search.feasible(&cand_fit) && cand_fit.mis <= fit.mis;
            trace.push(TuneStep {
                phase: TunePhase::Neighborhood,
                config: candidate,
                fit: cand_fit,
                accepted,
            });
            if !accepted {
                break;
            }
            current = candidate;
            fit = cand_fit;
        }
        loop {
            let Some(&next) = opts.gamma_grid.get(gamma_pos + 1) else {
                break;
            };
            if next < gamma_floor(beta, current.variant.k_low()) - 1e-12 {
                break;
            }
            let candidate = LhnpeConfig {
                gamma: Probability::new(next)?,
                ..current
            };
            let cand_fit = search.evaluate(&candidate)?;
            let accepted = search.feasible(&cand_fit) && cand_fit.mis <= fit.mis;
            trace.push(TuneStep {
                phase: TunePhase::Confidence,
                config: candidate,
                fit: cand_fit,
                accepted,
            });
            if !accepted {
                break;
            }
            current = candidate;
            fit = cand_fit;
            gamma_pos += 1;
        }
    }
    current.allow_beyond_loess = current.variant.k_high() > model.k();
    Ok(TuneOutcome {
        config: current,
        fit,
        feasible,
        trace,
    })
}

/// Training-set coverage and mean size of one configuration.
pub fn training_fit(
    model: &LoessModel<'_>,
    errors: &ErrorSet,
    beta: Probability,
    cfg: &LhnpeConfig,
) -> Result<TrainingFit> {
    let neighbors = TrainingNeighbors::build(model, cfg.variant.k_high())?;
    BopiPredictor::new(model, errors, beta, *cfg)?.training_fit(&neighbors)
}
