//! Bounded oscillation prediction intervals.
//!
//! A BOPI interval at `x` is the loess prediction `fhat(x)` plus a normal
//! tolerance interval computed over the cross-validated prediction errors of
//! the training points nearest to `x`. F-BOPI uses a fixed number of
//! neighbors; A-BOPI picks, per query, the neighborhood size in a range that
//! gives the narrowest interval.

mod config;
mod predictor;
mod tune;

pub use config::{gamma_floor, LhnpeConfig, LhnpeVariant, MAX_LHNPE_K, MIN_LHNPE_K};
pub use predictor::{
    a_bopi_interval, conventional_band, error_tolerance_interval, eset, f_bopi_interval,
    BopiInterval, BopiPredictor, Eset, ToleranceFactors, TrainingFit, TrainingNeighbors,
};
pub use tune::{
    default_gamma_grid, training_fit, tune_hyperparams, TuneOptions, TuneOutcome, TunePhase,
    TuneStep,
};
