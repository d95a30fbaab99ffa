use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::{sq_dist, ClusterAssignment, ClusterMethod, ClusterParams, FeatureMatrix};
use crate::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KMeansParams {
    pub k: usize,
    pub seed: u64,
    pub restarts: usize,
    pub max_iters: usize,
}

impl KMeansParams {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            seed,
            restarts: 10,
            max_iters: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub assignment: ClusterAssignment,
    /// Row-major `k x F`.
    pub centroids: Vec<f64>,
    pub inertia: f64,
    /// Inertia of the k-means++ seeding of the winning restart.
    pub initial_inertia: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Run {
    pub labels: Vec<usize>,
    pub centroids: Vec<f64>,
    pub inertia: f64,
    pub initial_inertia: f64,
    /// Inertia after each assignment step.
    #[cfg_attr(not(test), allow(dead_code))]
    pub trace: Vec<f64>,
}

/// k-means++ seeding followed by Lloyd iterations; the best of `restarts`
/// independent runs (lowest inertia, earliest on ties) is returned.
pub fn kmeans_pp(fm: &FeatureMatrix, params: &KMeansParams) -> Result<KMeansResult> {
    let n = fm.len();
    if params.k == 0 || params.k > n {
        return Err(Error::param("k", alloc::format!("{} outside 1..={n}", params.k)));
    }
    if params.restarts == 0 {
        return Err(Error::param("restarts", "must be at least 1"));
    }
    let runs = crate::par::map_indexed(params.restarts, |r| {
        let mut rng = rng::stream(params.seed, &[0x6b, r as u64]);
        run_once(fm, params.k, &mut rng, params.max_iters)
    });
    let mut best: Option<Run> = None;
    for run in runs {
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");
    let assignment = ClusterAssignment::new(
        best.labels,
        params.k,
        ClusterMethod::KMeans,
        ClusterParams::KMeans {
            seed: params.seed,
            restarts: params.restarts,
            max_iters: params.max_iters,
            inertia: best.inertia,
        },
    )?;
    Ok(KMeansResult {
        assignment,
        centroids: best.centroids,
        inertia: best.inertia,
        initial_inertia: best.initial_inertia,
    })
}

fn seed_centers<R: Rng + ?Sized>(fm: &FeatureMatrix, k: usize, rng: &mut R) -> Vec<usize> {
    let n = fm.len();
    let mut centers = Vec::with_capacity(k);
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    centers.push(first);
    chosen[first] = true;
    let mut d2: Vec<f64> = (0..n).map(|i| fm.sq_dist(i, first)).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // Rounding can leave the target past the last positive weight.
            pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).unwrap())
        } else {
            (0..n).find(|&i| !chosen[i]).unwrap()
        };
        centers.push(next);
        chosen[next] = true;
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(fm.sq_dist(i, next));
        }
    }
    centers
}

fn assign(fm: &FeatureMatrix, centroids: &[f64], k: usize, labels: &mut [usize]) -> f64 {
    let f = fm.num_features();
    let mut inertia = 0.0;
    for (i, label) in labels.iter_mut().enumerate() {
        let row = fm.row(i);
        let mut best = (0, f64::INFINITY);
        for c in 0..k {
            let d = sq_dist(row, &centroids[c * f..(c + 1) * f]);
            if d < best.1 {
                best = (c, d);
            }
        }
        *label = best.0;
        inertia += best.1;
    }
    inertia
}

fn centroids_of(fm: &FeatureMatrix, labels: &[usize], k: usize) -> (Vec<f64>, Vec<usize>) {
    let f = fm.num_features();
    let mut sums = vec![0.0; k * f];
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for (s, x) in sums[l * f..(l + 1) * f].iter_mut().zip(fm.row(i)) {
            *s += x;
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            sums[c * f..(c + 1) * f].iter_mut().for_each(|s| *s /= counts[c] as f64);
        }
    }
    (sums, counts)
}

/// Move the point farthest from its centroid (among non-singleton clusters)
/// into each empty cluster.
fn repair_empty(fm: &FeatureMatrix, labels: &mut [usize], centroids: &mut [f64], counts: &mut [usize]) {
    let f = fm.num_features();
    for empty in 0..counts.len() {
        if counts[empty] > 0 {
            continue;
        }
        let mut far = (usize::MAX, -1.0);
        for (i, &l) in labels.iter().enumerate() {
            if counts[l] > 1 {
                let d = sq_dist(fm.row(i), &centroids[l * f..(l + 1) * f]);
                if d > far.1 {
                    far = (i, d);
                }
            }
        }
        let i = far.0;
        counts[labels[i]] -= 1;
        labels[i] = empty;
        counts[empty] = 1;
        centroids[empty * f..(empty + 1) * f].copy_from_slice(fm.row(i));
    }
}

pub(crate) fn run_once<R: Rng + ?Sized>(fm: &FeatureMatrix, k: usize, rng: &mut R, max_iters: usize) -> Run {
    let n = fm.len();
    let f = fm.num_features();
    let centers = seed_centers(fm, k, rng);
    let mut centroids: Vec<f64> = centers.iter().flat_map(|&c| fm.row(c).iter().copied()).collect();
    let mut labels = vec![0usize; n];
    let initial_inertia = assign(fm, &centroids, k, &mut labels);
    let mut trace = vec![initial_inertia];
    for _ in 0..max_iters {
        let (mut next, mut counts) = centroids_of(fm, &labels, k);
        repair_empty(fm, &mut labels, &mut next, &mut counts);
        if counts.contains(&0) {
            break;
        }
        // Repair moved points; recompute means so centroids match labels.
        let (means, _) = centroids_of(fm, &labels, k);
        centroids = means;
        let previous = labels.clone();
        let inertia = assign(fm, &centroids, k, &mut labels);
        trace.push(inertia);
        if labels == previous {
            break;
        }
    }
    let (mut means, mut counts) = centroids_of(fm, &labels, k);
    repair_empty(fm, &mut labels, &mut means, &mut counts);
    let (means, _) = centroids_of(fm, &labels, k);
    let inertia = (0..n).map(|i| sq_dist(fm.row(i), &means[labels[i] * f..(labels[i] + 1) * f])).sum();
    Run {
        labels,
        centroids: means,
        inertia,
        initial_inertia,
        trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn blobs(seed: u64) -> FeatureMatrix {
        let mut r = rng::stream(seed, &[]);
        let mut rows = Vec::new();
        for c in [[0.0, 0.0], [20.0, 20.0]] {
            for _ in 0..15 {
                rows.push(vec![c[0] + rng::standard_normal(&mut r), c[1] + rng::standard_normal(&mut r)]);
            }
        }
        FeatureMatrix::from_rows((0..30).map(|i| i.to_string()).collect(), &rows).unwrap()
    }

    #[test]
    fn k_equals_n_gives_zero_inertia() {
        let fm = blobs(1);
        let r = kmeans_pp(&fm, &KMeansParams::new(30, 5)).unwrap();
        assert_eq!(r.inertia, 0.0);
        assert_eq!(r.assignment.sizes(), vec![1; 30]);
        assert!(kmeans_pp(&fm, &KMeansParams::new(31, 5)).is_err());
        assert!(kmeans_pp(&fm, &KMeansParams::new(0, 5)).is_err());
    }

    #[test]
    fn two_blobs_match_closed_form_centroids() {
        let fm = blobs(2);
        let r = kmeans_pp(&fm, &KMeansParams::new(2, 9)).unwrap();
        let l = &r.assignment.labels;
        assert!(l[..15].iter().all(|&x| x == l[0]));
        assert!(l[15..].iter().all(|&x| x == l[15]));
        assert_ne!(l[0], l[15]);
        // Oracle: direct per-blob means and squared deviations.
        let mut expected = 0.0;
        for blob in [0..15, 15..30] {
            let mut c = [0.0; 2];
            for i in blob.clone() {
                c[0] += fm.row(i)[0] / 15.0;
                c[1] += fm.row(i)[1] / 15.0;
            }
            for i in blob {
                expected += (fm.row(i)[0] - c[0]).powi(2) + (fm.row(i)[1] - c[1]).powi(2);
            }
        }
        assert!((r.inertia - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn inertia_never_increases() {
        for seed in 0..20 {
            let fm = blobs(100 + seed);
            let mut rng = rng::stream(seed, &[]);
            let run = run_once(&fm, 5, &mut rng, 300);
            for w in run.trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "{:?}", run.trace);
            }
            assert!(run.inertia <= run.initial_inertia + 1e-9);
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let fm = blobs(3);
        let a = kmeans_pp(&fm, &KMeansParams::new(4, 11)).unwrap();
        let b = kmeans_pp(&fm, &KMeansParams::new(4, 11)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn duplicate_points_still_fill_every_cluster() {
        let rows = vec![vec![1.0], vec![1.0], vec![1.0], vec![2.0]];
        let fm = FeatureMatrix::from_rows((0..4).map(|i| i.to_string()).collect(), &rows).unwrap();
        let r = kmeans_pp(&fm, &KMeansParams::new(3, 0)).unwrap();
        assert!(r.assignment.sizes().iter().all(|&s| s > 0));
    }
}
