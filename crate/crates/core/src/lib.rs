//! Bounded oscillation prediction intervals (BOPI) for degree-one loess.
//!
//! The crate is organized bottom-up:
//!
//! * [`stat_dist`]: normal, Student t and chi-square CDFs and quantiles.
//! * [`intervals`]: normal prediction and tolerance intervals.
//! * [`llr`]: datasets, neighbor search, loess, cross-validation, OLS.
//! * [`bopi`]: F-BOPI and A-BOPI interval construction and tuning.
//! * [`metrics`]: coverage, interval size, EGSD and reliability tests.
//! * [`simlab`]: Friedman data generators and the Monte Carlo harness.

pub mod bopi;
pub mod error;
pub mod intervals;
pub mod llr;
pub mod metrics;
pub mod simlab;
pub mod stat_dist;

pub use error::{Error, Result};
pub use intervals::{Interval, IntervalBand, SampleSummary};
pub use llr::{CvScheme, Dataset, ErrorSet, LoessModel};
pub use stat_dist::{DegreesOfFreedom, Probability};
