use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use super::{relabel_by_first_appearance, ClusterAssignment, ClusterMethod, ClusterParams, FeatureMatrix};
use crate::{Error, Result};

/// Inter-cluster distance rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "lowercase"))]
pub enum Linkage {
    /// `sqrt(2 |A| |B| / (|A| + |B|)) * |c_A - c_B|`.
    Ward,
    /// Mean pairwise distance.
    Average,
    /// Maximum pairwise distance.
    Complete,
}

impl Linkage {
    pub const ALL: [Linkage; 3] = [Linkage::Ward, Linkage::Average, Linkage::Complete];

    pub fn name(self) -> &'static str {
        match self {
            Linkage::Ward => "ward",
            Linkage::Average => "average",
            Linkage::Complete => "complete",
        }
    }

    /// Lance-Williams update: distance from `k` to the union of `i` and `j`.
    fn update(self, d_ik: f64, d_jk: f64, d_ij: f64, n_i: usize, n_j: usize, n_k: usize) -> f64 {
        match self {
            Linkage::Ward => {
                let (ni, nj, nk) = (n_i as f64, n_j as f64, n_k as f64);
                let sq = ((ni + nk) * d_ik * d_ik + (nj + nk) * d_jk * d_jk - nk * d_ij * d_ij) / (ni + nj + nk);
                libm::sqrt(sq.max(0.0))
            }
            Linkage::Average => (n_i as f64 * d_ik + n_j as f64 * d_jk) / (n_i + n_j) as f64,
            Linkage::Complete => d_ik.max(d_jk),
        }
    }
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Linkage {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Linkage::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::param("linkage", alloc::format!("unknown value `{s}`")))
    }
}

/// When to stop merging.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stop {
    NClusters(usize),
    /// Merges at linkage distance above the threshold are not performed.
    DistanceThreshold(f64),
}

/// One merge step. Ids follow the SciPy convention: leaves are `0..N`, the
/// cluster created by merge `s` is `N + s`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub distance: f64,
    pub size: usize,
}

/// Full merge history of `N` points (`N - 1` merges).
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    pub n: usize,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    /// Number of leading merges kept by `stop`.
    pub fn merges_kept(&self, stop: Stop) -> Result<usize> {
        match stop {
            Stop::NClusters(k) => {
                if k == 0 || k > self.n {
                    return Err(Error::param("n_clusters", alloc::format!("{k} outside 1..={}", self.n)));
                }
                Ok(self.n - k)
            }
            Stop::DistanceThreshold(t) => {
                if !(t >= 0.0) {
                    return Err(Error::param("distance_threshold", "must be non-negative"));
                }
                Ok(self.merges.iter().take_while(|m| m.distance <= t).count())
            }
        }
    }

    /// Flat cluster of every leaf after applying the first `merges` merges,
    /// numbered by first appearance.
    pub fn flat_labels(&self, merges: usize) -> Vec<usize> {
        let total = 2 * self.n - 1;
        let mut parent: Vec<usize> = (0..total.max(1)).collect();
        for (s, m) in self.merges.iter().take(merges).enumerate() {
            parent[m.left] = self.n + s;
            parent[m.right] = self.n + s;
        }
        let roots: Vec<usize> = (0..self.n)
            .map(|mut x| {
                while parent[x] != x {
                    x = parent[x];
                }
                x
            })
            .collect();
        relabel_by_first_appearance(&roots).0
    }
}

/// Bottom-up merge history under `linkage`.
///
/// Among equal linkage distances the pair with the smallest `(i, j)` is merged,
/// where a cluster is identified by its smallest member index.
pub fn linkage_tree(fm: &FeatureMatrix, linkage: Linkage) -> Result<Dendrogram> {
    let n = fm.len();
    if n < 2 {
        return Err(Error::param("features", "need at least 2 points"));
    }
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = fm.dist(i, j);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    let mut id: Vec<usize> = (0..n).collect();
    let mut nn = vec![usize::MAX; n];
    let mut nn_d = vec![f64::INFINITY; n];

    let nearest = |a: usize, dist: &[f64], active: &[bool]| -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for b in a + 1..n {
            if active[b] && dist[a * n + b] < best.1 {
                best = (b, dist[a * n + b]);
            }
        }
        best
    };
    for a in 0..n {
        (nn[a], nn_d[a]) = nearest(a, &dist, &active);
    }

    let mut merges = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        let mut i = usize::MAX;
        let mut best = f64::INFINITY;
        for a in 0..n {
            if active[a] && nn[a] != usize::MAX && (i == usize::MAX || nn_d[a] < best) {
                i = a;
                best = nn_d[a];
            }
        }
        let j = nn[i];
        let d_ij = dist[i * n + j];
        merges.push(Merge {
            left: id[i],
            right: id[j],
            distance: d_ij,
            size: size[i] + size[j],
        });
        for k in 0..n {
            if active[k] && k != i && k != j {
                let d = linkage.update(dist[i * n + k], dist[j * n + k], d_ij, size[i], size[j], size[k]);
                dist[i * n + k] = d;
                dist[k * n + i] = d;
            }
        }
        active[j] = false;
        size[i] += size[j];
        id[i] = n + step;

        (nn[i], nn_d[i]) = nearest(i, &dist, &active);
        for a in 0..n {
            if !active[a] || a == i {
                continue;
            }
            if nn[a] == j || (a < i && nn[a] == i) {
                (nn[a], nn_d[a]) = nearest(a, &dist, &active);
            } else if a < i {
                let d = dist[a * n + i];
                if d < nn_d[a] || (d == nn_d[a] && i < nn[a]) {
                    nn[a] = i;
                    nn_d[a] = d;
                }
            }
        }
    }
    Ok(Dendrogram { n, merges })
}

/// Agglomerative clustering under Euclidean distance, cut by `stop`.
pub fn agglomerative(fm: &FeatureMatrix, linkage: Linkage, stop: Stop) -> Result<ClusterAssignment> {
    if let Stop::NClusters(k) = stop {
        if k > fm.len() {
            return Err(Error::param("n_clusters", alloc::format!("{k} exceeds {} points", fm.len())));
        }
    }
    let tree = linkage_tree(fm, linkage)?;
    let kept = tree.merges_kept(stop)?;
    let labels = tree.flat_labels(kept);
    let k = fm.len() - kept;
    ClusterAssignment::new(
        labels,
        k,
        ClusterMethod::Agglomerative,
        ClusterParams::Agglomerative { linkage, stop },
    )
}
