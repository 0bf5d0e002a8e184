//! Euclidean k-nearest-neighbor search.
//!
//! Neighbors are ordered by `(distance, index)`, so ties at any rank go to
//! the lowest training index. The brute-force scan is the reference; the
//! kd-tree returns the identical ordered list.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Candidate ordered by squared distance, then index.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    sq: f64,
    index: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sq
            .total_cmp(&other.sq)
            .then(self.index.cmp(&other.index))
    }
}

fn finish(mut cands: Vec<Candidate>) -> Vec<Neighbor> {
    cands.sort_unstable();
    cands
        .into_iter()
        .map(|c| Neighbor {
            index: c.index,
            distance: c.sq.sqrt(),
        })
        .collect()
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::NeighborCount { k, min: 1, max: n });
    }
    Ok(())
}

/// Exhaustive scan over row-major `points` of dimension `dim`.
pub fn knn_brute_force(points: &[f64], dim: usize, query: &[f64], k: usize) -> Result<Vec<Neighbor>> {
    let n = if dim == 0 { 0 } else { points.len() / dim };
    knn_brute_force_n(points, dim, n, query, k)
}

fn knn_brute_force_n(
    points: &[f64],
    dim: usize,
    n: usize,
    query: &[f64],
    k: usize,
) -> Result<Vec<Neighbor>> {
    check_k(k, n)?;
    let mut cands: Vec<Candidate> = (0..n)
        .map(|i| Candidate {
            sq: squared_distance(&points[i * dim..(i + 1) * dim], query),
            index: i,
        })
        .collect();
    if k < n {
        cands.select_nth_unstable(k - 1);
        cands.truncate(k);
    }
    Ok(finish(cands))
}

/// The `k` nearest rows of `d` to `x`, by brute force.
pub fn knn(d: &Dataset, x: &[f64], k: usize) -> Result<Vec<Neighbor>> {
    if x.len() != d.n_features() {
        return Err(Error::LengthMismatch {
            expected: d.n_features(),
            actual: x.len(),
        });
    }
    knn_brute_force_n(d.features(), d.n_features(), d.len(), x, k)
}

const LEAF_SIZE: usize = 16;

#[derive(Debug, Clone)]
enum Node {
    Leaf { start: usize, end: usize },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Static kd-tree over row-major points. Stores only the node structure and
/// a permutation of row indices; searches read the points passed in.
#[derive(Debug, Clone)]
pub struct KdTree {
    dim: usize,
    n: usize,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl KdTree {
    pub fn build(points: &[f64], dim: usize) -> Self {
        let n = if dim == 0 { 0 } else { points.len() / dim };
        let mut tree = Self {
            dim,
            n,
            order: (0..n).collect(),
            nodes: Vec::new(),
        };
        if n > 0 {
            tree.build_node(points, 0, n);
        }
        tree
    }

    fn build_node(&mut self, points: &[f64], start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { start, end });
        if end - start <= LEAF_SIZE {
            return id;
        }
        let dim = self.dim;
        let coord = |i: usize, a: usize| points[i * dim + a];
        let (axis, spread) = (0..dim)
            .map(|a| {
                let (lo, hi) = self.order[start..end]
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                        (lo.min(coord(i, a)), hi.max(coord(i, a)))
                    });
                (a, hi - lo)
            })
            .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(spread > 0.0) {
            return id;
        }
        let mid = (end - start) / 2;
        self.order[start..end].select_nth_unstable_by(mid, |&a, &b| {
            coord(a, axis).total_cmp(&coord(b, axis)).then(a.cmp(&b))
        });
        let value = coord(self.order[start + mid], axis);
        let left = self.build_node(points, start, start + mid);
        let right = self.build_node(points, start + mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    pub fn knn(&self, points: &[f64], query: &[f64], k: usize) -> Result<Vec<Neighbor>> {
        check_k(k, self.n)?;
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.search(0, points, query, k, &mut heap);
        Ok(finish(heap.into_vec()))
    }

    fn search(
        &self,
        node: usize,
        points: &[f64],
        query: &[f64],
        k: usize,
        heap: &mut BinaryHeap<Candidate>,
    ) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let cand = Candidate {
                        sq: squared_distance(&points[i * self.dim..(i + 1) * self.dim], query),
                        index: i,
                    };
                    if heap.len() < k {
                        heap.push(cand);
                    } else if cand < *heap.peek().expect("heap is full") {
                        heap.pop();
                        heap.push(cand);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = query[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, points, query, k, heap);
                // Equality must still descend: a tie at the k-th distance may
                // be won by a lower index on the far side.
                if heap.len() < k || diff * diff <= heap.peek().expect("heap is full").sq {
                    self.search(far, points, query, k, heap);
                }
            }
        }
    }
}

/// Neighbor search strategy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMethod {
    BruteForce,
    KdTree,
    /// kd-tree for up to [`AUTO_TREE_MAX_DIM`] features, brute force above.
    #[default]
    Auto,
}

pub const AUTO_TREE_MAX_DIM: usize = 8;

/// A neighbor index over one dataset's features.
#[derive(Debug, Clone)]
pub struct NeighborIndex {
    dim: usize,
    n: usize,
    tree: Option<KdTree>,
}

impl NeighborIndex {
    pub fn build(d: &Dataset, method: SearchMethod) -> Self {
        let use_tree = match method {
            SearchMethod::BruteForce => false,
            SearchMethod::KdTree => true,
            SearchMethod::Auto => d.n_features() <= AUTO_TREE_MAX_DIM && d.n_features() > 0,
        };
        Self {
            dim: d.n_features(),
            n: d.len(),
            tree: use_tree.then(|| KdTree::build(d.features(), d.n_features())),
        }
    }

    /// `d` must be the dataset the index was built from.
    pub fn knn(&self, d: &Dataset, query: &[f64], k: usize) -> Result<Vec<Neighbor>> {
        debug_assert_eq!(d.len(), self.n);
        if query.len() != self.dim {
            return Err(Error::LengthMismatch {
                expected: self.dim,
                actual: query.len(),
            });
        }
        match &self.tree {
            Some(tree) => tree.knn(d.features(), query, k),
            None => knn_brute_force_n(d.features(), self.dim, self.n, query, k),
        }
    }

    /// The `k` nearest rows other than `exclude`.
    pub fn knn_excluding(
        &self,
        d: &Dataset,
        query: &[f64],
        k: usize,
        exclude: usize,
    ) -> Result<Vec<Neighbor>> {
        if k >= self.n {
            return Err(Error::NeighborCount {
                k,
                min: 1,
                max: self.n.saturating_sub(1),
            });
        }
        let mut found = self.knn(d, query, k + 1)?;
        found.retain(|nb| nb.index != exclude);
        found.truncate(k);
        Ok(found)
    }
}
