//! Monte Carlo runs on a synthetic benchmark family.

use std::path::Path;

use bopi_core::simlab::{run_simulation, Method, SimulationConfig};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::Result;
use crate::output::{ensure_dir, slug, write_csv, write_json};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRow {
    pub beta: f64,
    pub gamma: f64,
    pub iteration: usize,
    pub method: Method,
    pub coverage: f64,
    pub mis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub beta: f64,
    pub gamma: f64,
    pub method: Method,
    pub coverage_mean: f64,
    pub coverage_sd: f64,
    pub mis_mean: f64,
    pub mis_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub family: String,
    pub n: usize,
    pub n_sim: usize,
    pub noise_sd: f64,
    pub seed: u64,
    pub k_loess: usize,
    pub k_fixed: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub runs: Vec<AggregateRow>,
}

#[derive(Debug, Serialize)]
struct HistogramBin {
    coverage: f64,
    count: usize,
}

/// Coverage counts in bins one percentage point wide, labelled by their
/// lower edge, from the lowest to the highest occupied bin.
fn histogram(values: &[f64]) -> Vec<HistogramBin> {
    let bins: Vec<usize> = values.iter().map(|v| ((v * 100.0 + 1e-9).floor().max(0.0) as usize).min(100)).collect();
    let (Some(&lo), Some(&hi)) = (bins.iter().min(), bins.iter().max()) else {
        return Vec::new();
    };
    (lo..=hi)
        .map(|b| HistogramBin {
            coverage: b as f64 / 100.0,
            count: bins.iter().filter(|&&x| x == b).count(),
        })
        .collect()
}

pub fn simulate(cfg: &RunConfig) -> Result<(SimulationReport, Vec<IterationRow>)> {
    let dgp = cfg.dgp()?;
    let hyper = cfg.sim_hyper()?;
    let methods = cfg.methods()?;
    let mut iterations = Vec::new();
    let mut runs = Vec::new();
    for beta in cfg.betas()? {
        for gamma in cfg.sim_gammas()? {
            let sc = SimulationConfig {
                n_sim: cfg.simulation.n_sim,
                beta,
                gamma,
                methods: methods.clone(),
                hyper,
                seed: dgp.seed,
            };
            let result = run_simulation(&dgp, &sc)?;
            iterations.extend(result.records.iter().map(|r| IterationRow {
                beta: beta.value(),
                gamma: gamma.value(),
                iteration: r.iteration,
                method: r.method,
                coverage: r.coverage,
                mis: r.mis,
            }));
            runs.extend(result.aggregates.iter().map(|a| AggregateRow {
                beta: beta.value(),
                gamma: gamma.value(),
                method: a.method,
                coverage_mean: a.coverage_mean,
                coverage_sd: a.coverage_sd,
                mis_mean: a.mis_mean,
                mis_sd: a.mis_sd,
            }));
        }
    }
    let report = SimulationReport {
        family: cfg.simulation.family.to_ascii_lowercase(),
        n: dgp.n,
        n_sim: cfg.simulation.n_sim,
        noise_sd: dgp.noise_sd,
        seed: dgp.seed,
        k_loess: hyper.k_loess,
        k_fixed: hyper.k_fixed,
        k_min: hyper.k_min,
        k_max: hyper.k_max,
        runs,
    };
    Ok((report, iterations))
}

/// Writes `iterations.csv`, `aggregate.json` and one coverage histogram per
/// (beta, gamma, method): `hist_b<beta>_g<gamma>_<method>.csv`.
pub fn write_outputs(report: &SimulationReport, iterations: &[IterationRow], out: &Path) -> Result<()> {
    ensure_dir(out)?;
    write_csv(&out.join("iterations.csv"), iterations)?;
    write_json(&out.join("aggregate.json"), report)?;
    for run in &report.runs {
        let cov: Vec<f64> = iterations
            .iter()
            .filter(|r| r.beta == run.beta && r.gamma == run.gamma && r.method == run.method)
            .map(|r| r.coverage)
            .collect();
        let name = format!("hist_b{}_g{}_{}.csv", run.beta, run.gamma, slug(run.method.name()));
        write_csv(&out.join(name), &histogram(&cov))?;
    }
    Ok(())
}

pub fn run(cfg: &RunConfig) -> Result<()> {
    let (report, iterations) = simulate(cfg)?;
    write_outputs(&report, &iterations, &cfg.output)?;
    for a in &report.runs {
        println!(
            "beta {} gamma {} {:<12} coverage {:.2} ({:.2}) MIS {:.4} ({:.4})",
            a.beta,
            a.gamma,
            a.method.name(),
            100.0 * a.coverage_mean,
            100.0 * a.coverage_sd,
            a.mis_mean,
            a.mis_sd
        );
    }
    Ok(())
}
