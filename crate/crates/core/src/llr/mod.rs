//! Local linear regression: dataset encoding, neighbor search, degree-one
//! loess, cross-validated prediction errors and the OLS baseline.

mod cv;
mod dataset;
mod knn;
mod loess;
mod ols;

pub use cv::{
    cv_prediction_errors, cv_score, fold_assignment, select_bandwidth, CvScheme, ErrorSet,
    DEFAULT_FOLDS,
};
pub use dataset::{encode_dataset, ColumnKind, Dataset, EncodeReport, EncodedColumn, Encoder, RawTable};
pub use knn::{knn, knn_brute_force, KdTree, Neighbor, NeighborIndex, SearchMethod, AUTO_TREE_MAX_DIM};
pub use loess::{tricube_weights, FitKind, Kernel, LocalFit, LoessModel};
pub use ols::{fit_ols, ols_prediction_interval, OlsModel};
