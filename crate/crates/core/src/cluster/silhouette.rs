use alloc::vec;

use super::{ClusterAssignment, FeatureMatrix};
use crate::{Error, Result};

/// Mean silhouette `(b - a) / max(a, b)` under Euclidean distance.
///
/// `a` is the mean distance to the rest of the point's own cluster, `b` the
/// smallest mean distance to another cluster. Points in singleton clusters
/// score 0.
pub fn silhouette(fm: &FeatureMatrix, ca: &ClusterAssignment) -> Result<f64> {
    if ca.len() != fm.len() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "{} labels for {} points",
            ca.len(),
            fm.len()
        )));
    }
    if ca.k < 2 {
        return Err(Error::param("k", "silhouette needs at least 2 clusters"));
    }
    let sizes = ca.sizes();
    let n = fm.len();
    let mut total = 0.0;
    let mut sums = vec![0.0; ca.k];
    for i in 0..n {
        let own = ca.labels[i];
        if sizes[own] == 1 {
            continue;
        }
        sums.iter_mut().for_each(|s| *s = 0.0);
        for j in 0..n {
            if j != i {
                sums[ca.labels[j]] += fm.dist(i, j);
            }
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..ca.k)
            .filter(|&c| c != own)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Ok(total / n as f64)
}
