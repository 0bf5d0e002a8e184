//! Hyper-parameter tuning on a whole dataset, written as a file that
//! `evaluate` can read back.

use std::path::Path;

use bopi_core::bopi::{tune_hyperparams, LhnpeConfig, TuneOptions};
use bopi_core::llr::{cv_prediction_errors, CvScheme, LoessModel};
use bopi_core::simlab::Method;
use bopi_core::Probability;
use log::warn;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::data::load_dataset;
use crate::error::{CliError, Result};
use crate::evaluate::choose_k;
use crate::output::{ensure_dir, write_json};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunedEntry {
    pub beta: f64,
    pub method: Method,
    pub config: LhnpeConfig,
    /// Training-set coverage and mean interval size of `config`.
    pub coverage: f64,
    pub mis: f64,
    /// False when no visited configuration reached coverage `beta`.
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunedFile {
    pub dataset: String,
    pub k_loess: usize,
    pub cv: CvScheme,
    pub seed: u64,
    pub entries: Vec<TunedEntry>,
}

impl TunedFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn config_for(&self, beta: Probability, method: Method) -> Result<LhnpeConfig> {
        self.entries
            .iter()
            .find(|e| e.method == method && (e.beta - beta.value()).abs() < 1e-12)
            .map(|e| e.config)
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "tuned file has no {} entry for beta {}",
                    method.name(),
                    beta.value()
                ))
            })
    }

    pub fn any_infeasible(&self) -> bool {
        self.entries.iter().any(|e| !e.feasible)
    }
}

pub fn tune(cfg: &RunConfig) -> Result<TunedFile> {
    let seed = cfg.seed()?;
    let cv = cfg.cv()?;
    let betas = cfg.betas()?;
    let data = load_dataset(cfg.data_path()?, cfg.data.response.as_deref())?;
    let k_loess = choose_k(cfg, &data, cv, seed)?;
    let model = LoessModel::new(&data, k_loess)?;
    let errors = cv_prediction_errors(&model, cv, seed)?;
    let mut entries = Vec::new();
    for beta in betas {
        for (method, opts) in [(Method::FBopi, TuneOptions::fixed()), (Method::ABopi, TuneOptions::adaptive())] {
            let out = tune_hyperparams(&model, &errors, beta, &opts)?;
            if !out.feasible {
                warn!(
                    "{} at beta {}: no configuration reached the target coverage; keeping the starting one",
                    method.name(),
                    beta.value()
                );
            }
            entries.push(TunedEntry {
                beta: beta.value(),
                method,
                config: out.config,
                coverage: out.fit.coverage,
                mis: out.fit.mis,
                feasible: out.feasible,
            });
        }
    }
    Ok(TunedFile {
        dataset: cfg.dataset_name()?,
        k_loess,
        cv,
        seed,
        entries,
    })
}

/// Writes `tuned.json` into the output directory.
pub fn run(cfg: &RunConfig) -> Result<()> {
    let file = tune(cfg)?;
    ensure_dir(&cfg.output)?;
    let path = cfg.output.join("tuned.json");
    write_json(&path, &file)?;
    for e in &file.entries {
        println!(
            "{:>5} {:<7} gamma {} K {:?} coverage {:.4} MIS {:.4}{}",
            e.beta,
            e.method.name(),
            e.config.gamma.value(),
            e.config.variant,
            e.coverage,
            e.mis,
            if e.feasible { "" } else { " (infeasible)" }
        );
    }
    if file.any_infeasible() {
        println!("warning: some targets were not reached; see feasible = false in {}", path.display());
    }
    Ok(())
}
