//! Cross-validated comparison of interval methods on a CSV dataset.

use std::fmt::Write as _;
use std::path::Path;

use bopi_core::bopi::LhnpeConfig;
use bopi_core::intervals::Interval;
use bopi_core::llr::{fold_assignment, select_bandwidth, CvScheme, Dataset};
use bopi_core::metrics::{finalize_reports, EvaluationReport};
use bopi_core::simlab::{method_bands, Method, MethodSettings};
use bopi_core::{IntervalBand, Probability};
use log::info;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::data::load_dataset;
use crate::error::{CliError, Result};
use crate::output::{ensure_dir, slug, write_csv, write_json, write_text};
use crate::tune::TunedFile;

/// One report line; the column set of `report.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub dataset: String,
    pub method: String,
    pub beta: f64,
    pub coverage: f64,
    pub mis: f64,
    pub sigma_is: f64,
    pub wilson_critical: f64,
    pub reliable: bool,
    pub egsd: Option<f64>,
    pub egsd_normalized: Option<f64>,
    pub stars: String,
}

impl From<&EvaluationReport> for ReportRow {
    fn from(r: &EvaluationReport) -> Self {
        Self {
            dataset: r.dataset.clone(),
            method: r.method.clone(),
            beta: r.beta,
            coverage: r.coverage,
            mis: r.mis,
            sigma_is: r.sigma_is,
            wilson_critical: r.wilson_critical,
            reliable: r.reliable,
            egsd: r.egsd,
            egsd_normalized: r.egsd_normalized,
            stars: r.stars.stars().to_string(),
        }
    }
}

#[derive(Debug, Serialize)]
struct CurvePoint {
    beta: f64,
    egsd_normalized: Option<f64>,
}

/// Loess bandwidth for one training set.
pub fn choose_k(cfg: &RunConfig, train: &Dataset, cv: CvScheme, seed: u64) -> Result<usize> {
    if let Some(k) = cfg.loess.k {
        return Ok(k);
    }
    let grid: Vec<usize> = cfg.loess.grid.iter().copied().filter(|&k| k <= train.len()).collect();
    if grid.is_empty() {
        return Err(CliError::Usage(format!(
            "no bandwidth candidate fits {} training rows; set loess.k",
            train.len()
        )));
    }
    let k = select_bandwidth(train, &grid, cv, seed)?;
    info!("selected loess bandwidth K={k}");
    Ok(k)
}

/// LHNPE settings for `beta`, from the tuned file if one is configured.
fn lhnpe_for(cfg: &RunConfig, tuned: Option<&TunedFile>, beta: Probability) -> Result<(LhnpeConfig, LhnpeConfig)> {
    match tuned {
        Some(t) => Ok((t.config_for(beta, Method::FBopi)?, t.config_for(beta, Method::ABopi)?)),
        None => {
            let g = cfg.gamma()?;
            Ok((cfg.fixed_config(g), cfg.adaptive_config(g)))
        }
    }
}

pub fn evaluate(cfg: &RunConfig) -> Result<Vec<ReportRow>> {
    let seed = cfg.seed()?;
    let methods = cfg.methods()?;
    let betas = cfg.betas()?;
    let cv = cfg.cv()?;
    let name = cfg.dataset_name()?;
    let data = load_dataset(cfg.data_path()?, cfg.data.response.as_deref())?;
    let tuned = match &cfg.lhnpe.tuned {
        Some(path) => Some(TunedFile::read(path)?),
        None => None,
    };
    let n = data.len();
    if cfg.folds < 2 || cfg.folds > n {
        return Err(CliError::Usage(format!("folds must lie in [2, {n}], got {}", cfg.folds)));
    }
    let labels = fold_assignment(n, cfg.folds, seed);
    let splits: Vec<(Vec<usize>, Vec<usize>)> = (0..cfg.folds)
        .map(|f| {
            let test: Vec<usize> = (0..n).filter(|&i| labels[i] == f).collect();
            let train: Vec<usize> = (0..n).filter(|&i| labels[i] != f).collect();
            (train, test)
        })
        .collect();
    let trains: Vec<Dataset> = splits.iter().map(|(tr, _)| data.subset(tr)).collect();
    let tests: Vec<Dataset> = splits.iter().map(|(_, te)| data.subset(te)).collect();
    let ks = trains
        .iter()
        .enumerate()
        .map(|(f, tr)| choose_k(cfg, tr, cv, seed.wrapping_add(f as u64)))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for &beta in &betas {
        let (fixed, adaptive) = lhnpe_for(cfg, tuned.as_ref(), beta)?;
        let mut per_point: Vec<Vec<Option<Interval>>> = vec![vec![None; n]; methods.len()];
        for (f, (_, test_idx)) in splits.iter().enumerate() {
            let settings = MethodSettings {
                k_loess: ks[f],
                cv,
                fixed,
                adaptive,
            };
            let bands = method_bands(&trains[f], &tests[f], beta, &methods, &settings, seed.wrapping_add(f as u64))?;
            for (m, band) in bands.iter().enumerate() {
                for (iv, &i) in band.iter().zip(test_idx) {
                    per_point[m][i] = Some(*iv);
                }
            }
        }
        let mut reports = Vec::new();
        let mut sizes = Vec::new();
        for (m, method) in methods.iter().enumerate() {
            let band = IntervalBand(per_point[m].iter().map(|iv| iv.expect("every row is tested once")).collect());
            reports.push(EvaluationReport::new(&name, method.name(), beta, &band, data.response())?);
            sizes.push(band.sizes());
        }
        finalize_reports(&mut reports, &sizes)?;
        rows.extend(reports.iter().map(ReportRow::from));
    }
    Ok(rows)
}

fn percent(v: f64) -> String {
    format!("{:.2}", 100.0 * v)
}

/// One table per beta in the layout of a published results table.
pub fn markdown(rows: &[ReportRow]) -> String {
    let mut out = String::new();
    let mut betas: Vec<f64> = rows.iter().map(|r| r.beta).collect();
    betas.dedup();
    for beta in betas {
        let section: Vec<&ReportRow> = rows.iter().filter(|r| r.beta == beta).collect();
        let critical = section.first().map(|r| r.wilson_critical).unwrap_or(f64::NAN);
        let _ = writeln!(out, "## beta = {beta}\n");
        let _ = writeln!(out, "F(0.05) = {}\n", percent(critical));
        let _ = writeln!(out, "| dataset | method | coverage | MIS | sigma_is | reliable | EGSD | EGSD (norm.) |");
        let _ = writeln!(out, "|---|---|---|---|---|---|---|---|");
        for r in section {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {:.4}{} | {:.4} | {} | {} | {} |",
                r.dataset,
                r.method,
                percent(r.coverage),
                r.mis,
                r.stars,
                r.sigma_is,
                if r.reliable { "yes" } else { "no" },
                r.egsd.map(|e| format!("{e:.4}")).unwrap_or_else(|| "-".into()),
                r.egsd_normalized.map(|e| format!("{e:.3}")).unwrap_or_else(|| "-".into()),
            );
        }
        out.push('\n');
    }
    out
}

/// Writes `report.csv`, `report.json`, `report.md` and one EGSD curve per
/// method (`egsd_<method>.csv`, normalized EGSD against beta).
pub fn write_reports(rows: &[ReportRow], out: &Path) -> Result<()> {
    ensure_dir(out)?;
    write_csv(&out.join("report.csv"), rows)?;
    write_json(&out.join("report.json"), rows)?;
    write_text(&out.join("report.md"), &markdown(rows))?;
    let mut methods: Vec<&str> = Vec::new();
    for r in rows {
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    for m in methods {
        let curve: Vec<CurvePoint> = rows
            .iter()
            .filter(|r| r.method == m)
            .map(|r| CurvePoint {
                beta: r.beta,
                egsd_normalized: r.egsd_normalized,
            })
            .collect();
        write_csv(&out.join(format!("egsd_{}.csv", slug(m))), &curve)?;
    }
    Ok(())
}

pub fn run(cfg: &RunConfig) -> Result<()> {
    let rows = evaluate(cfg)?;
    write_reports(&rows, &cfg.output)?;
    for r in &rows {
        println!(
            "{:>5} {:<12} coverage {:>6}% MIS {:.4}{} {}",
            r.beta,
            r.method,
            percent(r.coverage),
            r.mis,
            r.stars,
            if r.reliable { "" } else { "(unreliable)" }
        );
    }
    Ok(())
}
