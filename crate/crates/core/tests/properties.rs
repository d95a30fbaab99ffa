use diachron_core::cluster::{
    agglomerative, kmeans_pp, linear_sum_assignment_max, linkage_tree, match_labels, silhouette, ClusterAssignment,
    ClusterMethod, ClusterParams, FeatureMatrix, KMeansParams, Linkage, Stop,
};
use diachron_core::cooc::{compute_ppmi, count_cooccurrences};
use diachron_core::corpus::{build_vocab, CorpusBuilder, VocabParams};
use proptest::prelude::*;

fn points(max_n: usize) -> impl Strategy<Value = (usize, Vec<f64>)> {
    (2..=max_n, 1usize..4).prop_flat_map(|(n, d)| (Just(d), prop::collection::vec(-10.0f64..10.0, n * d)))
}

fn matrix(d: usize, data: Vec<f64>) -> FeatureMatrix {
    let n = data.len() / d;
    FeatureMatrix::new((0..n).map(|i| format!("p{i}")).collect(), d, data).unwrap()
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hungarian_matches_exhaustive_search(k in 1usize..6, w in prop::collection::vec(0i64..50, 36)) {
        let weights: Vec<Vec<i64>> = (0..k).map(|i| w[i * 6..i * 6 + k].to_vec()).collect();
        let a = linear_sum_assignment_max(&weights);
        let mut seen = a.clone();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..k).collect::<Vec<_>>());
        let got: i64 = a.iter().enumerate().map(|(r, &c)| weights[r][c]).sum();
        let best = permutations(k)
            .iter()
            .map(|p| p.iter().enumerate().map(|(r, &c)| weights[r][c]).sum::<i64>())
            .max()
            .unwrap();
        prop_assert_eq!(got, best);
    }

    #[test]
    fn matching_beats_identity_and_is_label_invariant(
        labels in prop::collection::vec(0usize..4, 8..40),
        gold in prop::collection::vec(0usize..4, 40),
        shift in 1usize..4,
    ) {
        let n = labels.len();
        let mut labels = labels;
        labels[..4].copy_from_slice(&[0, 1, 2, 3]);
        let gold = &gold[..n];
        let ca = ClusterAssignment::new(labels.clone(), 4, ClusterMethod::KMeans, ClusterParams::KMeans { seed: 0, restarts: 1, max_iters: 1, inertia: 0.0 }).unwrap();
        let m = match_labels(&ca, gold, 4).unwrap();
        let identity = labels.iter().zip(gold).filter(|(a, b)| a == b).count() as u64;
        prop_assert!(m.matched >= identity);
        let rotated = ClusterAssignment::new(labels.iter().map(|l| (l + shift) % 4).collect(), 4, ca.method, ca.params.clone()).unwrap();
        prop_assert_eq!(match_labels(&rotated, gold, 4).unwrap().matched, m.matched);
        let total: u64 = m.confusion.iter().flatten().sum();
        prop_assert_eq!(total, n as u64);
        let diag: u64 = (0..4).map(|j| m.confusion[j][j]).sum();
        prop_assert_eq!(diag, m.matched);
    }

    #[test]
    fn dendrogram_heights_are_monotone_for_reducible_linkages((d, data) in points(20)) {
        let fm = matrix(d, data);
        for linkage in Linkage::ALL {
            let tree = linkage_tree(&fm, linkage).unwrap();
            prop_assert_eq!(tree.merges.len(), fm.len() - 1);
            prop_assert!(tree.merges.windows(2).all(|m| m[0].distance <= m[1].distance + 1e-9));
            prop_assert_eq!(tree.merges.last().unwrap().size, fm.len());
        }
    }

    #[test]
    fn flat_clusterings_are_valid((d, data) in points(25), k in 1usize..6, seed in any::<u64>()) {
        let fm = matrix(d, data);
        let k = k.min(fm.len());
        let a = agglomerative(&fm, Linkage::Average, Stop::NClusters(k)).unwrap();
        prop_assert_eq!(a.k, k);
        let km = kmeans_pp(&fm, &KMeansParams { restarts: 2, ..KMeansParams::new(k, seed) }).unwrap();
        prop_assert!(km.inertia <= km.initial_inertia + 1e-9);
        prop_assert!(km.assignment.sizes().iter().all(|&s| s > 0));
        if k >= 2 {
            let s = silhouette(&fm, &a).unwrap();
            prop_assert!((-1.0..=1.0).contains(&s));
        }
    }

    #[test]
    fn ppmi_entries_are_positive_and_finite(
        docs in prop::collection::vec(prop::collection::vec(0usize..6, 0..15), 2..8),
        window in 1usize..4,
    ) {
        let mut b = CorpusBuilder::new();
        for (i, doc) in docs.iter().enumerate() {
            let words: Vec<String> = doc.iter().map(|w| format!("w{w}")).collect();
            // Every period gets every word at least once.
            let mut all: Vec<String> = (0..6).map(|w| format!("w{w}")).collect();
            all.extend(words);
            b.add_document(if i % 2 == 0 { "a" } else { "b" }, all.iter().map(String::as_str));
        }
        let corpus = b.build().unwrap();
        let vocab = build_vocab(&corpus, &VocabParams::new(1)).unwrap();
        for t in 0..2 {
            let cooc = count_cooccurrences(&corpus, t, &vocab, window).unwrap();
            let p = compute_ppmi(&cooc).unwrap();
            prop_assert!(p.values.values().iter().all(|v| v.is_finite() && *v > 0.0));
            let total: u64 = cooc.counts.values().iter().sum();
            prop_assert_eq!(total, cooc.total_pairs);
        }
    }
}
