use alloc::vec;
use alloc::vec::Vec;

use super::ClusterAssignment;
use crate::{Error, Result};

/// Optimal cluster-to-label correspondence.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMatching {
    /// `mapping[p]` is the gold label assigned to predicted cluster `p`.
    pub mapping: Vec<usize>,
    pub matched: u64,
    pub accuracy: f64,
    /// Rows are gold labels; column `j` holds the predicted cluster mapped to gold label `j`.
    pub confusion: Vec<Vec<u64>>,
}

/// Maximum-weight perfect matching on a square matrix (Hungarian algorithm,
/// O(n^3)). Returns `assignment[row] = column`.
pub fn linear_sum_assignment_max(weights: &[Vec<i64>]) -> Vec<usize> {
    let n = weights.len();
    if n == 0 {
        return Vec::new();
    }
    debug_assert!(weights.iter().all(|r| r.len() == n));
    let top = weights.iter().flatten().copied().max().unwrap_or(0);
    // Minimize cost = top - weight with potentials; 1-based arrays, index 0 is a sentinel.
    let cost = |i: usize, j: usize| top - weights[i - 1][j - 1];
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Match predicted clusters to `n_classes` gold labels so the number of
/// agreeing points is maximal. The contingency table is padded with empty
/// rows or columns when the counts differ.
pub fn match_labels(ca: &ClusterAssignment, gold: &[usize], n_classes: usize) -> Result<LabelMatching> {
    if gold.len() != ca.len() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "{} gold labels for {} points",
            gold.len(),
            ca.len()
        )));
    }
    if let Some(&g) = gold.iter().find(|&&g| g >= n_classes) {
        return Err(Error::IndexOutOfRange { index: g, size: n_classes });
    }
    let k = ca.k.max(n_classes);
    // contingency[g][p]
    let mut contingency = vec![vec![0u64; k]; k];
    for (&g, &p) in gold.iter().zip(&ca.labels) {
        contingency[g][p] += 1;
    }
    let weights: Vec<Vec<i64>> = (0..k)
        .map(|p| (0..k).map(|g| contingency[g][p] as i64).collect())
        .collect();
    let mapping = linear_sum_assignment_max(&weights);
    let matched: u64 = mapping.iter().enumerate().map(|(p, &g)| contingency[g][p]).sum();
    let mut confusion = vec![vec![0u64; k]; k];
    for (p, &j) in mapping.iter().enumerate() {
        for g in 0..k {
            confusion[g][j] = contingency[g][p];
        }
    }
    let n = gold.len().max(1);
    Ok(LabelMatching {
        mapping,
        matched,
        accuracy: matched as f64 / n as f64,
        confusion,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{ClusterMethod, ClusterParams};
    use super::*;

    fn ca(labels: Vec<usize>, k: usize) -> ClusterAssignment {
        ClusterAssignment::new(
            labels,
            k,
            ClusterMethod::KMeans,
            ClusterParams::KMeans {
                seed: 0,
                restarts: 1,
                max_iters: 1,
                inertia: 0.0,
            },
        )
        .unwrap()
    }

    fn from_contingency(table: &[&[usize]]) -> (ClusterAssignment, Vec<usize>) {
        let mut gold = Vec::new();
        let mut pred = Vec::new();
        for (g, row) in table.iter().enumerate() {
            for (p, &count) in row.iter().enumerate() {
                for _ in 0..count {
                    gold.push(g);
                    pred.push(p);
                }
            }
        }
        (ca(pred, table[0].len()), gold)
    }

    #[test]
    fn permuted_identity_is_perfect() {
        let (a, gold) = from_contingency(&[&[0, 5], &[5, 0]]);
        let m = match_labels(&a, &gold, 2).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.mapping, [1, 0]);
        assert_eq!(m.confusion, [[5, 0], [0, 5]]);
    }

    #[test]
    fn small_contingency_prefers_identity() {
        // identity: 3 + 4 = 7; swap: 1 + 2 = 3.
        let (a, gold) = from_contingency(&[&[3, 1], &[2, 4]]);
        let m = match_labels(&a, &gold, 2).unwrap();
        assert_eq!(m.mapping, [0, 1]);
        assert!((m.accuracy - 0.7).abs() < 1e-15);
    }

    #[test]
    fn padding_and_length_errors() {
        let a = ca(vec![0, 0, 1], 2);
        let m = match_labels(&a, &[0, 1, 2], 3).unwrap();
        assert_eq!(m.confusion.len(), 3);
        assert_eq!(m.matched, 2);
        assert!(match_labels(&a, &[0, 1], 2).is_err());
        assert!(match_labels(&a, &[0, 1, 5], 3).is_err());
    }

    #[test]
    fn relabeling_predictions_keeps_accuracy() {
        let (a, gold) = from_contingency(&[&[3, 1, 0], &[2, 4, 1], &[0, 2, 5]]);
        let base = match_labels(&a, &gold, 3).unwrap().accuracy;
        let perm = [2, 0, 1];
        let b = ca(a.labels.iter().map(|&l| perm[l]).collect(), 3);
        assert_eq!(match_labels(&b, &gold, 3).unwrap().accuracy, base);
    }
}
