use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intervals::containment_table;
use crate::stat_dist::Probability;

/// Smallest neighborhood over which a tolerance interval is computed.
pub const MIN_LHNPE_K: usize = 20;
/// Largest neighborhood for which tolerance intervals were checked to
/// contain the prediction interval. Larger requests are clamped.
pub const MAX_LHNPE_K: usize = 10_000;

/// Neighborhood rule for the prediction errors around a query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum LhnpeVariant {
    /// F-BOPI: always the `k` nearest training points.
    Fixed { k: usize },
    /// A-BOPI: the size in `[k_min, k_max]` giving the narrowest interval.
    Adaptive { k_min: usize, k_max: usize },
}

impl LhnpeVariant {
    /// Smallest neighborhood the rule can use.
    pub fn k_low(&self) -> usize {
        match *self {
            LhnpeVariant::Fixed { k } => k,
            LhnpeVariant::Adaptive { k_min, .. } => k_min,
        }
    }

    /// Largest neighborhood the rule can use.
    pub fn k_high(&self) -> usize {
        match *self {
            LhnpeVariant::Fixed { k } => k,
            LhnpeVariant::Adaptive { k_max, .. } => k_max,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LhnpeVariant::Fixed { .. } => "F-BOPI",
            LhnpeVariant::Adaptive { .. } => "A-BOPI",
        }
    }

    /// Both bounds moved up by `step`.
    pub fn grown(&self, step: usize) -> Self {
        match *self {
            LhnpeVariant::Fixed { k } => LhnpeVariant::Fixed { k: k + step },
            LhnpeVariant::Adaptive { k_min, k_max } => LhnpeVariant::Adaptive {
                k_min: k_min + step,
                k_max: k_max + step,
            },
        }
    }
}

fn default_k_step() -> usize {
    1
}

/// Hyper-parameters of one BOPI interval rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LhnpeConfig {
    pub gamma: Probability,
    #[serde(flatten)]
    pub variant: LhnpeVariant,
    /// Stride of the adaptive neighborhood scan.
    #[serde(default = "default_k_step")]
    pub k_step: usize,
    /// Lets the neighborhood extend past the regression bandwidth.
    #[serde(default)]
    pub allow_beyond_loess: bool,
}

impl LhnpeConfig {
    pub fn fixed(gamma: Probability, k: usize) -> Self {
        Self {
            gamma,
            variant: LhnpeVariant::Fixed { k },
            k_step: 1,
            allow_beyond_loess: false,
        }
    }

    pub fn adaptive(gamma: Probability, k_min: usize, k_max: usize) -> Self {
        Self {
            gamma,
            variant: LhnpeVariant::Adaptive { k_min, k_max },
            k_step: 1,
            allow_beyond_loess: false,
        }
    }

    /// Checks the configuration against a training set of `n` rows fitted
    /// with regression bandwidth `k_loess` and content `beta`. Returns the
    /// configuration with neighborhoods above [`MAX_LHNPE_K`] clamped.
    pub fn validated(&self, n: usize, k_loess: usize, beta: Probability) -> Result<Self> {
        let mut cfg = *self;
        let clamp = |k: usize| {
            if k > MAX_LHNPE_K {
                log::warn!("LHNPE neighborhood {k} clamped to {MAX_LHNPE_K}");
                MAX_LHNPE_K
            } else {
                k
            }
        };
        cfg.variant = match cfg.variant {
            LhnpeVariant::Fixed { k } => LhnpeVariant::Fixed { k: clamp(k) },
            LhnpeVariant::Adaptive { k_min, k_max } => LhnpeVariant::Adaptive {
                k_min: clamp(k_min),
                k_max: clamp(k_max),
            },
        };
        let (lo, hi) = (cfg.variant.k_low(), cfg.variant.k_high());
        if lo < MIN_LHNPE_K || lo > hi || hi > n {
            return Err(Error::Config(format!(
                "LHNPE neighborhood [{lo}, {hi}] must satisfy {MIN_LHNPE_K} <= k_min <= k_max <= N = {n}"
            )));
        }
        let beyond_ok = cfg.allow_beyond_loess && matches!(cfg.variant, LhnpeVariant::Adaptive { .. });
        if hi > k_loess && !beyond_ok {
            return Err(Error::Config(format!(
                "LHNPE neighborhood {hi} exceeds the regression bandwidth {k_loess}"
            )));
        }
        if cfg.k_step == 0 {
            return Err(Error::Config("k_step must be positive".into()));
        }
        let floor = gamma_floor(beta, lo);
        if cfg.gamma.value() < floor - 1e-12 {
            return Err(Error::Config(format!(
                "gamma {} below the containment floor {floor} for beta {} and K = {lo}",
                cfg.gamma.value(),
                beta.value()
            )));
        }
        Ok(cfg)
    }
}

/// Smallest confidence level for which a tolerance interval over `k` points
/// is known to contain the `beta`-prediction interval, looked up in the
/// containment table. Contents between table columns use the next larger
/// column; `k` between rows uses the row whose requirement it meets.
pub fn gamma_floor(beta: Probability, k: usize) -> f64 {
    let col = containment_table::BETAS
        .iter()
        .position(|&b| b >= beta.value() - 1e-12)
        .unwrap_or(containment_table::BETAS.len() - 1);
    (0..containment_table::GAMMAS.len())
        .find(|&row| containment_table::required_n(row, col) <= k)
        .map_or(
            *containment_table::GAMMAS.last().expect("table has rows"),
            |row| containment_table::GAMMAS[row],
        )
}
