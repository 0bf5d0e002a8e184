//! Run configuration: a TOML file whose keys can each be overridden by a
//! command-line flag.

use std::path::{Path, PathBuf};

use bopi_core::bopi::LhnpeConfig;
use bopi_core::llr::CvScheme;
use bopi_core::simlab::{DgpSpec, Family, Method, SimHyper};
use bopi_core::Probability;
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub output: PathBuf,
    pub methods: Vec<String>,
    pub betas: Vec<f64>,
    /// Outer cross-validation folds used by `evaluate`.
    pub folds: usize,
    pub data: DataSection,
    pub loess: LoessSection,
    pub lhnpe: LhnpeSection,
    pub simulation: SimulationSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: None,
            output: PathBuf::from("bopi-out"),
            methods: Method::ALL.iter().map(|m| m.name().to_string()).collect(),
            betas: vec![0.8, 0.9, 0.95, 0.99],
            folds: 10,
            data: DataSection::default(),
            loess: LoessSection::default(),
            lhnpe: LhnpeSection::default(),
            simulation: SimulationSection::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub path: Option<PathBuf>,
    /// Defaults to the last column.
    pub response: Option<String>,
    /// Label in reports; defaults to the file stem.
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoessSection {
    /// Fixed bandwidth in neighbors. Takes precedence over `grid`.
    pub k: Option<usize>,
    /// Candidates for cross-validated bandwidth selection.
    pub grid: Vec<usize>,
    /// `"loo"` or `"<k>-fold"`.
    pub cv: String,
}

impl Default for LoessSection {
    fn default() -> Self {
        Self {
            k: None,
            grid: vec![50, 75, 100, 150, 200, 300],
            cv: "10-fold".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LhnpeSection {
    pub gamma: f64,
    pub k_fixed: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub k_step: usize,
    pub allow_beyond_loess: bool,
    /// Output of `bopi tune`; replaces the values above per beta.
    pub tuned: Option<PathBuf>,
}

impl Default for LhnpeSection {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            k_fixed: 40,
            k_min: 30,
            k_max: 50,
            k_step: 1,
            allow_beyond_loess: false,
            tuned: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    /// `"friedman1"` or `"friedman2"`.
    pub family: String,
    pub n: usize,
    pub n_sim: usize,
    pub noise_sd: Option<f64>,
    /// Defaults to `[lhnpe.gamma]`.
    pub gammas: Vec<f64>,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            family: "friedman1".into(),
            n: 1500,
            n_sim: 50,
            noise_sd: None,
            gammas: Vec::new(),
        }
    }
}

/// Flags shared by `tune`, `evaluate` and `simulate`. Every flag overrides
/// the matching config key.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML run configuration.
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    /// Input CSV (header row required).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Response column [default: last column].
    #[arg(long)]
    pub response: Option<String>,
    /// Dataset label in reports [default: file stem].
    #[arg(long)]
    pub name: Option<String>,
    /// Output directory [default: bopi-out].
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated, e.g. "OLS,Conv,F-BOPI,A-BOPI" [default: all four].
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    /// Comma-separated content levels [default: 0.8,0.9,0.95,0.99].
    #[arg(long, value_delimiter = ',')]
    pub betas: Option<Vec<f64>>,
    /// Outer evaluation folds [default: 10].
    #[arg(long)]
    pub folds: Option<usize>,
    /// Loess bandwidth in neighbors; skips bandwidth selection.
    #[arg(long)]
    pub k_loess: Option<usize>,
    /// Bandwidth candidates [default: 50,75,100,150,200,300].
    #[arg(long, value_delimiter = ',')]
    pub k_grid: Option<Vec<usize>>,
    /// Error-set scheme: "loo" or "<k>-fold" [default: 10-fold].
    #[arg(long)]
    pub cv: Option<String>,
    /// Tolerance confidence level [default: 0.99].
    #[arg(long)]
    pub gamma: Option<f64>,
    /// F-BOPI neighborhood [default: 40].
    #[arg(long)]
    pub k_fixed: Option<usize>,
    /// A-BOPI smallest neighborhood [default: 30].
    #[arg(long)]
    pub k_min: Option<usize>,
    /// A-BOPI largest neighborhood [default: 50].
    #[arg(long)]
    pub k_max: Option<usize>,
    /// A-BOPI scan stride [default: 1].
    #[arg(long)]
    pub k_step: Option<usize>,
    /// Let A-BOPI neighborhoods exceed the loess bandwidth.
    #[arg(long)]
    pub allow_beyond_loess: bool,
    /// Tuned hyper-parameter file from `bopi tune`.
    #[arg(long)]
    pub tuned: Option<PathBuf>,
    /// Simulation family: friedman1 or friedman2 [default: friedman1].
    #[arg(long)]
    pub family: Option<String>,
    /// Simulated sample size [default: 1500].
    #[arg(long)]
    pub n: Option<usize>,
    /// Simulation iterations [default: 50].
    #[arg(long)]
    pub n_sim: Option<usize>,
    /// Simulation noise standard deviation [default: family default].
    #[arg(long)]
    pub noise_sd: Option<f64>,
    /// Comma-separated simulation confidence levels [default: gamma].
    #[arg(long, value_delimiter = ',')]
    pub gammas: Option<Vec<f64>>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// Config file (if any) with the flags applied on top.
    pub fn load(args: &RunArgs) -> Result<Self> {
        let mut cfg = match &args.config {
            Some(path) => Self::from_file(path)?,
            None => Self::default(),
        };
        cfg.apply(args);
        Ok(cfg)
    }

    pub fn apply(&mut self, a: &RunArgs) {
        fn set<T: Clone>(slot: &mut T, v: &Option<T>) {
            if let Some(v) = v {
                *slot = v.clone();
            }
        }
        fn set_opt<T: Clone>(slot: &mut Option<T>, v: &Option<T>) {
            if v.is_some() {
                *slot = v.clone();
            }
        }
        set_opt(&mut self.data.path, &a.data);
        set_opt(&mut self.data.response, &a.response);
        set_opt(&mut self.data.name, &a.name);
        set(&mut self.output, &a.out);
        set_opt(&mut self.seed, &a.seed);
        set(&mut self.methods, &a.methods);
        set(&mut self.betas, &a.betas);
        set(&mut self.folds, &a.folds);
        set_opt(&mut self.loess.k, &a.k_loess);
        set(&mut self.loess.grid, &a.k_grid);
        set(&mut self.loess.cv, &a.cv);
        set(&mut self.lhnpe.gamma, &a.gamma);
        set(&mut self.lhnpe.k_fixed, &a.k_fixed);
        set(&mut self.lhnpe.k_min, &a.k_min);
        set(&mut self.lhnpe.k_max, &a.k_max);
        set(&mut self.lhnpe.k_step, &a.k_step);
        self.lhnpe.allow_beyond_loess |= a.allow_beyond_loess;
        set_opt(&mut self.lhnpe.tuned, &a.tuned);
        set(&mut self.simulation.family, &a.family);
        set(&mut self.simulation.n, &a.n);
        set(&mut self.simulation.n_sim, &a.n_sim);
        set_opt(&mut self.simulation.noise_sd, &a.noise_sd);
        set(&mut self.simulation.gammas, &a.gammas);
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| CliError::Usage("a seed is required (config key `seed` or --seed)".into()))
    }

    pub fn methods(&self) -> Result<Vec<Method>> {
        if self.methods.is_empty() {
            return Err(CliError::Usage("no methods requested".into()));
        }
        let mut out = self
            .methods
            .iter()
            .map(|m| Method::parse(m).map_err(|e| CliError::Usage(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// Ascending and deduplicated.
    pub fn betas(&self) -> Result<Vec<Probability>> {
        probabilities("beta", &self.betas)
    }

    pub fn gamma(&self) -> Result<Probability> {
        probability("gamma", self.lhnpe.gamma)
    }

    pub fn cv(&self) -> Result<CvScheme> {
        parse_cv(&self.loess.cv)
    }

    pub fn fixed_config(&self, gamma: Probability) -> LhnpeConfig {
        LhnpeConfig::fixed(gamma, self.lhnpe.k_fixed)
    }

    pub fn adaptive_config(&self, gamma: Probability) -> LhnpeConfig {
        let mut c = LhnpeConfig::adaptive(gamma, self.lhnpe.k_min, self.lhnpe.k_max);
        c.k_step = self.lhnpe.k_step;
        c.allow_beyond_loess = self.lhnpe.allow_beyond_loess;
        c
    }

    pub fn data_path(&self) -> Result<&Path> {
        self.data
            .path
            .as_deref()
            .ok_or_else(|| CliError::Usage("no input data (config key `data.path` or --data)".into()))
    }

    pub fn dataset_name(&self) -> Result<String> {
        if let Some(n) = &self.data.name {
            return Ok(n.clone());
        }
        let path = self.data_path()?;
        Ok(path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "data".into()))
    }

    pub fn dgp(&self) -> Result<DgpSpec> {
        let family = match self.simulation.family.to_ascii_lowercase().as_str() {
            "friedman1" | "friedman#1" => Family::Friedman1,
            "friedman2" | "friedman#2" => Family::Friedman2,
            other => return Err(CliError::Usage(format!("unknown simulation family {other:?}"))),
        };
        let mut spec = DgpSpec::new(family, self.simulation.n, self.seed()?);
        if let Some(sd) = self.simulation.noise_sd {
            if !(sd >= 0.0 && sd.is_finite()) {
                return Err(CliError::Usage(format!("noise_sd {sd} must be a nonnegative number")));
            }
            spec.noise_sd = sd;
        }
        Ok(spec)
    }

    pub fn sim_gammas(&self) -> Result<Vec<Probability>> {
        if self.simulation.gammas.is_empty() {
            Ok(vec![self.gamma()?])
        } else {
            probabilities("gamma", &self.simulation.gammas)
        }
    }

    pub fn sim_hyper(&self) -> Result<SimHyper> {
        Ok(SimHyper {
            k_loess: self.loess.k.unwrap_or(SimHyper::default().k_loess),
            k_fixed: self.lhnpe.k_fixed,
            k_min: self.lhnpe.k_min,
            k_max: self.lhnpe.k_max,
            cv: self.cv()?,
        })
    }
}

fn probability(what: &str, v: f64) -> Result<Probability> {
    Probability::new(v).map_err(|_| CliError::Usage(format!("{what} {v} must lie strictly between 0 and 1")))
}

fn probabilities(what: &str, values: &[f64]) -> Result<Vec<Probability>> {
    if values.is_empty() {
        return Err(CliError::Usage(format!("empty {what} list")));
    }
    let mut v = values.iter().map(|&b| probability(what, b)).collect::<Result<Vec<_>>>()?;
    v.sort_by(|a, b| a.value().total_cmp(&b.value()));
    v.dedup();
    Ok(v)
}

pub fn parse_cv(s: &str) -> Result<CvScheme> {
    let t = s.trim().to_ascii_lowercase();
    if t == "loo" || t == "leave-one-out" {
        return Ok(CvScheme::LeaveOneOut);
    }
    let k = t
        .strip_suffix("-fold")
        .and_then(|k| k.parse::<usize>().ok())
        .filter(|&k| k >= 2)
        .ok_or_else(|| CliError::Usage(format!("cv scheme {s:?} is neither \"loo\" nor \"<k>-fold\" with k >= 2")))?;
    Ok(CvScheme::KFold(k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let mut cfg: RunConfig = toml::from_str(
            r#"
            seed = 3
            betas = [0.9]
            [lhnpe]
            gamma = 0.95
            k_fixed = 25
            "#,
        )
        .unwrap();
        assert_eq!(cfg.lhnpe.k_max, 50);
        cfg.apply(&RunArgs {
            gamma: Some(0.9),
            seed: Some(8),
            ..RunArgs::default()
        });
        assert_eq!(cfg.seed, Some(8));
        assert_eq!(cfg.lhnpe.gamma, 0.9);
        assert_eq!(cfg.lhnpe.k_fixed, 25);
        assert_eq!(cfg.betas, vec![0.9]);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<RunConfig>("sead = 1").is_err());
    }

    #[test]
    fn cv_strings() {
        assert_eq!(parse_cv("loo").unwrap(), CvScheme::LeaveOneOut);
        assert_eq!(parse_cv("5-fold").unwrap(), CvScheme::KFold(5));
        assert!(parse_cv("1-fold").is_err());
        assert!(parse_cv("ten").is_err());
    }

    #[test]
    fn betas_sorted_and_checked() {
        let cfg = RunConfig {
            betas: vec![0.95, 0.8, 0.95],
            ..RunConfig::default()
        };
        let b: Vec<f64> = cfg.betas().unwrap().iter().map(|p| p.value()).collect();
        assert_eq!(b, vec![0.8, 0.95]);
        let bad = RunConfig {
            betas: vec![1.5],
            ..RunConfig::default()
        };
        assert_eq!(bad.betas().unwrap_err().exit_code(), 1);
    }
}
