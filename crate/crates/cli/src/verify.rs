//! Containment checks for the tolerance/prediction size ratio: the
//! published smallest-sample-size table and the claim that the ratio never
//! drops below one once `gamma >= 0.7` and `n >= 20`.

use std::path::Path;

use bopi_core::intervals::{containment_table, tolerance_prediction_ratio};
use bopi_core::Probability;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::output::{ensure_dir, write_csv, write_json};

/// Ratio under test, as a function of `(n, beta, gamma)`.
pub type RatioFn<'a> = &'a dyn Fn(usize, Probability, Probability) -> bopi_core::Result<f64>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub check: &'static str,
    pub gamma: f64,
    pub beta: f64,
    pub n: usize,
    pub ratio: f64,
    /// `">=1"` or `"<1"`.
    pub expect: &'static str,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub checked: usize,
    pub failed: usize,
    pub by_check: Vec<(String, usize, usize)>,
}

fn p(v: f64) -> Probability {
    Probability::new(v).expect("grid values lie in (0, 1)")
}

/// Tabulated sizes must contain; the next smaller tabulated size must not
/// (for the cells where the table's grid pins this down).
pub const TABLE_LOWER: [(usize, f64, f64); 6] = [
    (20, 0.9, 0.55),
    (20, 0.95, 0.6),
    (40, 0.9, 0.55),
    (50, 0.99, 0.6),
    (80, 0.95, 0.55),
    (100, 0.99, 0.55),
];

pub const GRID_GAMMAS: [f64; 4] = [0.7, 0.8, 0.9, 0.99];

/// Every integer 20..=200 plus 60 log-spaced sizes up to 10000.
pub fn grid_sizes() -> Vec<usize> {
    let mut ns: Vec<usize> = (20..=200).collect();
    let (lo, hi) = (20f64.ln(), 10_000f64.ln());
    for i in 0..=60 {
        ns.push((lo + (hi - lo) * i as f64 / 60.0).exp().round() as usize);
    }
    ns.sort_unstable();
    ns.dedup();
    ns
}

pub fn run_checks(ratio: RatioFn<'_>) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    let mut push = |check, n: usize, b: f64, g: f64, at_least_one: bool| -> Result<()> {
        let r = ratio(n, p(b), p(g))?;
        rows.push(CheckRow {
            check,
            gamma: g,
            beta: b,
            n,
            ratio: r,
            expect: if at_least_one { ">=1" } else { "<1" },
            pass: if at_least_one { r >= 1.0 } else { r < 1.0 },
        });
        Ok(())
    };
    for (row, &g) in containment_table::GAMMAS.iter().enumerate() {
        for (col, &b) in containment_table::BETAS.iter().enumerate() {
            push("table", containment_table::required_n(row, col), b, g, true)?;
        }
    }
    for (n, b, g) in TABLE_LOWER {
        push("table-lower", n, b, g, false)?;
    }
    let sizes = grid_sizes();
    for &g in &GRID_GAMMAS {
        for &n in &sizes {
            for b in 1..=99 {
                push("grid", n, b as f64 / 100.0, g, true)?;
            }
        }
    }
    // Minimum over beta at the smallest grid confidence.
    for &n in &sizes {
        let mut worst = (f64::INFINITY, 0.0);
        for b in 1..=99 {
            let b = b as f64 / 100.0;
            let r = ratio(n, p(b), p(0.7))?;
            if r < worst.0 {
                worst = (r, b);
            }
        }
        push("min-over-beta", n, worst.1, 0.7, true)?;
    }
    Ok(rows)
}

pub fn summarize(rows: &[CheckRow]) -> Summary {
    let mut by_check: Vec<(String, usize, usize)> = Vec::new();
    for r in rows {
        match by_check.iter_mut().find(|(c, _, _)| c == r.check) {
            Some(e) => {
                e.1 += 1;
                e.2 += usize::from(!r.pass);
            }
            None => by_check.push((r.check.to_string(), 1, usize::from(!r.pass))),
        }
    }
    Summary {
        checked: rows.len(),
        failed: rows.iter().filter(|r| !r.pass).count(),
        by_check,
    }
}

/// Runs the checks with `ratio`, writes `verify.csv` and `verify.json` into
/// `out`, and fails with a verification error if any check failed.
pub fn verify_with(ratio: RatioFn<'_>, out: &Path) -> Result<Summary> {
    let rows = run_checks(ratio)?;
    let summary = summarize(&rows);
    ensure_dir(out)?;
    write_csv(&out.join("verify.csv"), &rows)?;
    write_json(&out.join("verify.json"), &summary)?;
    for (check, n, failed) in &summary.by_check {
        println!("{check}: {} of {n} passed", n - failed);
    }
    if summary.failed > 0 {
        return Err(CliError::Verify(format!(
            "{} of {} checks failed; see {}",
            summary.failed,
            summary.checked,
            out.join("verify.csv").display()
        )));
    }
    Ok(summary)
}

pub fn verify(out: &Path) -> Result<Summary> {
    verify_with(&tolerance_prediction_ratio, out)
}
