//! Degree-one loess: a weighted least-squares line fitted to the K nearest
//! neighbors of each query, in coordinates centered at the query so the
//! intercept is the prediction.

use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::knn::{Neighbor, NeighborIndex, SearchMethod};
use crate::error::{domain, Error, Result};

/// Pivot-to-diagonal ratio below which a Cholesky factor is treated as
/// rank deficient.
const RANK_TOLERANCE: f64 = 1e-10;
/// Ridge added to the slope block of a rank-deficient normal matrix, as a
/// multiple of `trace / p`.
const RIDGE_SCALE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    #[default]
    Tricube,
}

impl Kernel {
    /// Kernel value at scaled distance `u = d / b >= 0`.
    #[inline]
    pub fn weight(self, u: f64) -> f64 {
        match self {
            Kernel::Tricube => {
                if u < 1.0 {
                    let v = 1.0 - u * u * u;
                    v * v * v
                } else {
                    0.0
                }
            }
        }
    }
}

/// Tricube weights `(1 - (d/b)^3)^3` for `d < b`, zero otherwise. The `1/b`
/// normalization is omitted; it cancels in the weighted fit.
pub fn tricube_weights(distances: &[f64], bandwidth: f64) -> Result<Vec<f64>> {
    if !(bandwidth > 0.0) {
        return Err(domain(format!("bandwidth {bandwidth} must be positive")));
    }
    Ok(distances
        .iter()
        .map(|&d| Kernel::Tricube.weight(d / bandwidth))
        .collect())
}

/// How a local fit was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitKind {
    Linear,
    /// Weighted normal matrix was rank deficient; slopes were ridge-damped.
    Ridge,
    /// Degree-zero fallback.
    WeightedMean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalFit {
    /// Intercept (the prediction) followed by one slope per feature, in
    /// coordinates centered at the query.
    pub coefficients: Vec<f64>,
    pub neighbors: Vec<Neighbor>,
    pub weights: Vec<f64>,
    pub kind: FitKind,
}

impl LocalFit {
    #[inline]
    pub fn prediction(&self) -> f64 {
        self.coefficients[0]
    }
}

/// Degree-one loess over a borrowed training set.
#[derive(Debug)]
pub struct LoessModel<'a> {
    data: &'a Dataset,
    k: usize,
    kernel: Kernel,
    search: SearchMethod,
    index: NeighborIndex,
    fallbacks: AtomicUsize,
}

impl<'a> LoessModel<'a> {
    /// Smallest neighborhood that can support a full-rank fit on `d`: one
    /// intercept, one slope per feature, plus the zero-weight K-th neighbor.
    pub fn min_k(d: &Dataset) -> usize {
        d.n_features() + 2
    }

    pub fn new(data: &'a Dataset, k: usize) -> Result<Self> {
        Self::with_options(data, k, Kernel::default(), SearchMethod::default())
    }

    pub fn with_options(
        data: &'a Dataset,
        k: usize,
        kernel: Kernel,
        search: SearchMethod,
    ) -> Result<Self> {
        let min = Self::min_k(data);
        if k < min || k > data.len() {
            return Err(Error::NeighborCount {
                k,
                min,
                max: data.len(),
            });
        }
        Ok(Self {
            data,
            k,
            kernel,
            search,
            index: NeighborIndex::build(data, search),
            fallbacks: AtomicUsize::new(0),
        })
    }

    /// Same settings on another training set.
    pub fn refit<'b>(&self, data: &'b Dataset, k: usize) -> Result<LoessModel<'b>> {
        LoessModel::with_options(data, k, self.kernel, self.search)
    }

    #[inline]
    pub fn data(&self) -> &'a Dataset {
        self.data
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn search(&self) -> SearchMethod {
        self.search
    }

    /// Number of local fits that needed the ridge or mean fallback.
    pub fn fallback_count(&self) -> usize {
        self.fallbacks.load(Ordering::Relaxed)
    }

    pub fn neighbors(&self, x: &[f64], k: usize) -> Result<Vec<Neighbor>> {
        self.index.knn(self.data, x, k)
    }

    pub fn neighbors_excluding(&self, x: &[f64], k: usize, exclude: usize) -> Result<Vec<Neighbor>> {
        self.index.knn_excluding(self.data, x, k, exclude)
    }

    pub fn fit_local(&self, x: &[f64]) -> Result<LocalFit> {
        let neighbors = self.neighbors(x, self.k)?;
        Ok(self.fit_neighbors(x, neighbors))
    }

    /// Local fit at training row `i` without using row `i`, over `k` others.
    pub fn fit_local_without(&self, i: usize, k: usize) -> Result<LocalFit> {
        let x = self.data.row(i);
        let neighbors = self.neighbors_excluding(x, k, i)?;
        Ok(self.fit_neighbors(x, neighbors))
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(self.fit_local(x)?.prediction())
    }

    /// Predictions at every row of `queries`, in row order.
    pub fn predict_dataset(&self, queries: &Dataset) -> Result<Vec<f64>> {
        (0..queries.len())
            .into_par_iter()
            .map(|i| self.predict(queries.row(i)))
            .collect()
    }

    fn fit_neighbors(&self, x: &[f64], neighbors: Vec<Neighbor>) -> LocalFit {
        let bandwidth = neighbors.last().map_or(0.0, |nb| nb.distance);
        let mut weights: Vec<f64> = if bandwidth > 0.0 {
            neighbors
                .iter()
                .map(|nb| self.kernel.weight(nb.distance / bandwidth))
                .collect()
        } else {
            vec![0.0; neighbors.len()]
        };
        if weights.iter().all(|&w| w == 0.0) {
            // Every neighbor sits at the query; weight them equally.
            weights.iter_mut().for_each(|w| *w = 1.0);
        }
        let (coefficients, kind) = weighted_linear_fit(self.data, x, &neighbors, &weights);
        if kind != FitKind::Linear {
            self.fallbacks.fetch_add(1, Ordering::Relaxed);
        }
        LocalFit {
            coefficients,
            neighbors,
            weights,
            kind,
        }
    }
}

/// Cholesky factorization that also rejects numerically rank-deficient
/// matrices, judged by each pivot relative to its diagonal entry.
fn checked_cholesky(a: &DMatrix<f64>) -> Option<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let chol = a.clone().cholesky()?;
    let l = chol.l_dirty();
    for j in 0..a.nrows() {
        let pivot = l[(j, j)] * l[(j, j)];
        let diag = a[(j, j)];
        if !(diag > 0.0) || !(pivot > RANK_TOLERANCE * diag) {
            return None;
        }
    }
    Some(chol)
}

fn weighted_linear_fit(
    d: &Dataset,
    x: &[f64],
    neighbors: &[Neighbor],
    weights: &[f64],
) -> (Vec<f64>, FitKind) {
    let p = d.n_features() + 1;
    let mut normal = DMatrix::<f64>::zeros(p, p);
    let mut rhs = DVector::<f64>::zeros(p);
    let mut z = vec![0.0; p];
    z[0] = 1.0;
    for (nb, &w) in neighbors.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        for (zj, (xi, xq)) in z[1..].iter_mut().zip(d.row(nb.index).iter().zip(x)) {
            *zj = xi - xq;
        }
        let y = d.response()[nb.index];
        for r in 0..p {
            let wr = w * z[r];
            rhs[r] += wr * y;
            for c in 0..=r {
                normal[(r, c)] += wr * z[c];
            }
        }
    }
    for r in 0..p {
        for c in 0..r {
            normal[(c, r)] = normal[(r, c)];
        }
    }

    if let Some(chol) = checked_cholesky(&normal) {
        return (chol.solve(&rhs).as_slice().to_vec(), FitKind::Linear);
    }
    let ridge = RIDGE_SCALE * normal.trace() / p as f64;
    if ridge > 0.0 {
        let mut damped = normal.clone();
        for j in 1..p {
            damped[(j, j)] += ridge;
        }
        if let Some(chol) = damped.cholesky() {
            let sol = chol.solve(&rhs);
            if sol.iter().all(|v| v.is_finite()) {
                return (sol.as_slice().to_vec(), FitKind::Ridge);
            }
        }
    }
    let total: f64 = weights.iter().sum();
    let mean = neighbors
        .iter()
        .zip(weights)
        .map(|(nb, w)| w * d.response()[nb.index])
        .sum::<f64>()
        / total;
    let mut coefficients = vec![0.0; p];
    coefficients[0] = mean;
    (coefficients, FitKind::WeightedMean)
}
