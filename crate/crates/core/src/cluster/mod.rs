//! Clustering of serialized similarity matrices.
//!
//! All distances are Euclidean in feature space.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::{Error, Result};

mod agglomerative;
mod assignment;
mod kmeans;
mod silhouette;

pub use agglomerative::{agglomerative, linkage_tree, Dendrogram, Linkage, Merge, Stop};
pub use assignment::{linear_sum_assignment_max, match_labels, LabelMatching};
pub use kmeans::{kmeans_pp, KMeansParams, KMeansResult};
pub use silhouette::silhouette;

/// `N` labelled feature rows of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    labels: Vec<String>,
    cols: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(labels: Vec<String>, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != labels.len() * cols {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{} values for {} rows of {cols}",
                data.len(),
                labels.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("features", "contain non-finite values"));
        }
        Ok(Self { labels, cols, data })
    }

    /// Build from rows; all rows must share one length.
    pub fn from_rows(labels: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch("feature rows differ in length".into()));
        }
        Self::new(labels, cols, rows.concat())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.cols
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub(crate) fn sq_dist(&self, i: usize, j: usize) -> f64 {
        sq_dist(self.row(i), self.row(j))
    }

    pub(crate) fn dist(&self, i: usize, j: usize) -> f64 {
        libm::sqrt(self.sq_dist(i, j))
    }
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Clustering algorithm family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "lowercase"))]
pub enum ClusterMethod {
    Agglomerative,
    KMeans,
}

impl ClusterMethod {
    pub const ALL: [ClusterMethod; 2] = [ClusterMethod::Agglomerative, ClusterMethod::KMeans];

    pub fn name(self) -> &'static str {
        match self {
            ClusterMethod::Agglomerative => "agglomerative",
            ClusterMethod::KMeans => "kmeans",
        }
    }
}

impl fmt::Display for ClusterMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClusterMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "agglomerative" | "agglo" => Ok(ClusterMethod::Agglomerative),
            "kmeans" | "kmeans++" => Ok(ClusterMethod::KMeans),
            _ => Err(Error::param("cluster_method", alloc::format!("unknown value `{s}`"))),
        }
    }
}

/// Parameters recorded with an assignment.
#[derive(Debug, Clone, PartialEq)]
pub enum ClusterParams {
    Agglomerative { linkage: Linkage, stop: Stop },
    KMeans { seed: u64, restarts: usize, max_iters: usize, inertia: f64 },
}

/// Cluster ids `0..k` for `N` points; every id is used.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub k: usize,
    pub method: ClusterMethod,
    pub params: ClusterParams,
}

impl ClusterAssignment {
    /// Validates that every id in `0..k` appears.
    pub fn new(labels: Vec<usize>, k: usize, method: ClusterMethod, params: ClusterParams) -> Result<Self> {
        let mut seen = alloc::vec![false; k];
        for &l in &labels {
            if l >= k {
                return Err(Error::IndexOutOfRange { index: l, size: k });
            }
            seen[l] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Invariant("empty cluster in assignment".into()));
        }
        Ok(Self { labels, k, method, params })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = alloc::vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

/// Renumber arbitrary group ids by order of first appearance.
pub(crate) fn relabel_by_first_appearance(groups: &[usize]) -> (Vec<usize>, usize) {
    let mut map = hashbrown::HashMap::new();
    let labels = groups
        .iter()
        .map(|g| {
            let next = map.len();
            *map.entry(*g).or_insert(next)
        })
        .collect();
    (labels, map.len())
}
