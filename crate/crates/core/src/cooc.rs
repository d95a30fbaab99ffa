//! Windowed co-occurrence counting and the PPMI transform.

use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::corpus::{TimeSlicedCorpus, Vocabulary, NO_INDEX};
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Default symmetric window radius.
pub const DEFAULT_WINDOW: usize = 5;

/// Dense accumulation is used up to this many cells (64 MiB of `u32`).
const DENSE_CELL_LIMIT: usize = 1 << 24;

/// Directed `(target, context)` pair counts for one period.
#[derive(Debug, Clone, PartialEq)]
pub struct CoocMatrix {
    pub period: usize,
    pub counts: CsrMatrix<u64>,
    pub total_pairs: u64,
}

/// Positive PMI values for one period; only entries `> 0` are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct PpmiMatrix {
    pub period: usize,
    pub values: CsrMatrix<f64>,
}

impl PpmiMatrix {
    pub fn new(period: usize, values: CsrMatrix<f64>) -> Result<Self> {
        if values.values().iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Invariant("PPMI entries must be finite and positive".into()));
        }
        Ok(Self { period, values })
    }

    pub fn num_targets(&self) -> usize {
        self.values.nrows()
    }

    pub fn num_contexts(&self) -> usize {
        self.values.ncols()
    }
}

/// Count co-occurrences in period `period`: every context token within
/// `window` positions (either side, same document) of a target token adds one
/// to `counts[target][context]`. Tokens outside the context vocabulary are skipped.
pub fn count_cooccurrences(
    corpus: &TimeSlicedCorpus,
    period: usize,
    vocab: &Vocabulary,
    window: usize,
) -> Result<CoocMatrix> {
    if window == 0 {
        return Err(Error::param("window", "must be at least 1"));
    }
    if period >= corpus.num_periods() {
        return Err(Error::IndexOutOfRange {
            index: period,
            size: corpus.num_periods(),
        });
    }
    let (target_of, context_of) = vocab.token_lookup(corpus.symbols());
    let (w, c) = (vocab.num_targets(), vocab.num_contexts());
    let slice = corpus.period(period);

    let mut accumulator = if w.saturating_mul(c) <= DENSE_CELL_LIMIT {
        Accumulator::Dense(vec![0u32; w * c], c)
    } else {
        Accumulator::Sparse(HashMap::new())
    };
    let mut ctx_buf = Vec::new();
    for doc in slice.documents() {
        ctx_buf.clear();
        ctx_buf.extend(doc.iter().map(|&t| context_of[t as usize]));
        for (i, &tok) in doc.iter().enumerate() {
            let row = target_of[tok as usize];
            if row == NO_INDEX {
                continue;
            }
            let lo = i.saturating_sub(window);
            let hi = (i + window + 1).min(doc.len());
            for (j, &col) in ctx_buf[lo..hi].iter().enumerate() {
                if lo + j != i && col != NO_INDEX {
                    accumulator.add(row, col);
                }
            }
        }
    }
    let counts = accumulator.into_csr(w, c);
    let total_pairs = counts.values().iter().sum();
    Ok(CoocMatrix {
        period,
        counts,
        total_pairs,
    })
}

enum Accumulator {
    Dense(Vec<u32>, usize),
    Sparse(HashMap<u64, u64>),
}

impl Accumulator {
    #[inline]
    fn add(&mut self, row: u32, col: u32) {
        match self {
            Accumulator::Dense(cells, ncols) => cells[row as usize * *ncols + col as usize] += 1,
            Accumulator::Sparse(map) => *map.entry(((row as u64) << 32) | col as u64).or_insert(0) += 1,
        }
    }

    fn into_csr(self, nrows: usize, ncols: usize) -> CsrMatrix<u64> {
        let triplets: Vec<(u32, u32, u64)> = match self {
            Accumulator::Dense(cells, _) => cells
                .iter()
                .enumerate()
                .filter(|(_, &n)| n > 0)
                .map(|(k, &n)| ((k / ncols) as u32, (k % ncols) as u32, n as u64))
                .collect(),
            Accumulator::Sparse(map) => map
                .into_iter()
                .map(|(key, n)| ((key >> 32) as u32, key as u32, n))
                .collect(),
        };
        CsrMatrix::from_triplets(nrows, ncols, triplets).expect("accumulator indices are in range")
    }
}

/// `M[w][c] = max(ln(p(w,c) / (p(w) p(c))), 0)` with probabilities taken
/// from the pair counts and their row and column marginals.
pub fn compute_ppmi(cooc: &CoocMatrix) -> Result<PpmiMatrix> {
    if cooc.total_pairs == 0 {
        return Err(Error::NoCooccurrences { period: cooc.period });
    }
    let counts = &cooc.counts;
    let mut row_sums = vec![0u64; counts.nrows()];
    let mut col_sums = vec![0u64; counts.ncols()];
    for (r, c, n) in counts.iter() {
        row_sums[r] += n;
        col_sums[c] += n;
    }
    let total = cooc.total_pairs;
    let values = counts.filter_map(|r, c, n| {
        // n/N > (r/N)(c/N) decided exactly in integers.
        let joint = n as u128 * total as u128;
        let indep = row_sums[r] as u128 * col_sums[c] as u128;
        if joint <= indep {
            return None;
        }
        let ratio = (n as f64 * total as f64) / (row_sums[r] as f64 * col_sums[c] as f64);
        let v = libm::log(ratio);
        (v > 0.0).then_some(v)
    });
    PpmiMatrix::new(cooc.period, values)
}

/// Dense PPMI row of target `word` (zeros where nothing is stored).
pub fn ppmi_row(ppmi: &PpmiMatrix, word: usize) -> Result<Vec<f64>> {
    if word >= ppmi.num_targets() {
        return Err(Error::IndexOutOfRange {
            index: word,
            size: ppmi.num_targets(),
        });
    }
    Ok(ppmi.values.dense_row(word))
}

/// Count and transform every period.
pub fn ppmi_all_periods(corpus: &TimeSlicedCorpus, vocab: &Vocabulary, window: usize) -> Result<Vec<PpmiMatrix>> {
    crate::par::map_indexed(corpus.num_periods(), |t| {
        count_cooccurrences(corpus, t, vocab, window).and_then(|c| compute_ppmi(&c))
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocab, CorpusBuilder, VocabParams};
    use proptest::prelude::*;

    fn corpus(p1: &[&str], p2: &[&str]) -> TimeSlicedCorpus {
        let mut b = CorpusBuilder::new();
        for (label, docs) in [("1", p1), ("2", p2)] {
            b.declare_period(label);
            for d in docs {
                b.add_line(label, d);
            }
        }
        b.build().unwrap()
    }

    #[test]
    fn xyxy_counts_and_ppmi() {
        let c = corpus(&["x y x y"], &["x y x y"]);
        let v = build_vocab(&c, &VocabParams::new(1)).unwrap();
        let (x, y) = (v.target_index("x").unwrap(), v.target_index("y").unwrap());
        let m = count_cooccurrences(&c, 0, &v, 1).unwrap();
        assert_eq!(m.counts.get(x, y), Some(3));
        assert_eq!(m.counts.get(y, x), Some(3));
        assert_eq!(m.counts.get(x, x), None);
        assert_eq!(m.total_pairs, 6);
        let p = compute_ppmi(&m).unwrap();
        let expected = libm::log(0.5 / (0.5 * 0.5));
        assert!((p.values.get(x, y).unwrap() - expected).abs() < 1e-15);
        assert!((expected - core::f64::consts::LN_2).abs() < 1e-15);
        let row = ppmi_row(&p, x).unwrap();
        assert_eq!(row.len(), v.num_contexts());
        assert_eq!(row[x], 0.0);
        assert!((row[y] - core::f64::consts::LN_2).abs() < 1e-15);
        assert!(ppmi_row(&p, 5).is_err());
    }

    #[test]
    fn degenerate_documents_contribute_nothing() {
        let c = corpus(&["x", "y"], &["x y"]);
        let v = build_vocab(&c, &VocabParams::new(1)).unwrap();
        let m = count_cooccurrences(&c, 0, &v, 3).unwrap();
        assert_eq!(m.total_pairs, 0);
        assert_eq!(m.counts.nnz(), 0);
        assert_eq!(compute_ppmi(&m).unwrap_err(), Error::NoCooccurrences { period: 0 });
        assert!(count_cooccurrences(&c, 0, &v, 0).is_err());
    }

    #[test]
    fn independent_pairs_are_not_stored() {
        // Every word co-occurs with every other equally: PMI = 0 everywhere off-diagonal
        // except the clamped negative diagonal (never observed).
        let counts = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 1), (0, 1, 1), (1, 0, 1), (1, 1, 1)]).unwrap();
        let p = compute_ppmi(&CoocMatrix {
            period: 0,
            counts,
            total_pairs: 4,
        })
        .unwrap();
        assert_eq!(p.values.nnz(), 0);
        // p(w,c) < p(w)p(c) for (0,1) here.
        let counts = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 5), (0, 1, 1), (1, 0, 1), (1, 1, 5)]).unwrap();
        let p = compute_ppmi(&CoocMatrix {
            period: 0,
            counts,
            total_pairs: 12,
        })
        .unwrap();
        assert_eq!(p.values.get(0, 1), None);
        assert!(p.values.get(0, 0).unwrap() > 0.0);
    }

    #[test]
    fn dense_and_sparse_accumulators_agree() {
        let mut dense = Accumulator::Dense(vec![0; 12], 4);
        let mut sparse = Accumulator::Sparse(HashMap::new());
        for (r, c) in [(0, 1), (2, 3), (0, 1), (1, 0), (2, 3), (2, 3)] {
            dense.add(r, c);
            sparse.add(r, c);
        }
        assert_eq!(dense.into_csr(3, 4), sparse.into_csr(3, 4));
    }

    fn docs_strategy() -> impl Strategy<Value = Vec<Vec<u8>>> {
        proptest::collection::vec(proptest::collection::vec(0u8..5, 1..15), 1..6)
    }

    fn render(docs: &[Vec<u8>]) -> Vec<alloc::string::String> {
        docs.iter()
            .map(|d| d.iter().map(|b| alloc::format!("w{b}")).collect::<Vec<_>>().join(" "))
            .collect()
    }

    proptest! {
        #[test]
        fn symmetric_counts_give_symmetric_ppmi(docs in docs_strategy(), window in 1usize..4) {
            let lines = render(&docs);
            let refs: Vec<&str> = lines.iter().map(|s| s.as_str()).collect();
            let c = corpus(&refs, &refs);
            let v = build_vocab(&c, &VocabParams::new(1)).unwrap();
            let m = count_cooccurrences(&c, 0, &v, window).unwrap();
            for (r, col, n) in m.counts.iter() {
                prop_assert_eq!(m.counts.get(col, r), Some(n));
            }
            if m.total_pairs > 0 {
                let p = compute_ppmi(&m).unwrap();
                for (r, col, x) in p.values.iter() {
                    prop_assert!(x > 0.0 && x.is_finite());
                    prop_assert_eq!(p.values.get(col, r), Some(x));
                }
            }
        }

        #[test]
        fn duplicating_the_corpus_preserves_ppmi(docs in docs_strategy(), k in 2usize..4) {
            let lines = render(&docs);
            let once: Vec<&str> = lines.iter().map(|s| s.as_str()).collect();
            let many: Vec<&str> = (0..k).flat_map(|_| once.iter().copied()).collect();
            let a = corpus(&once, &once);
            let b = corpus(&many, &many);
            let va = build_vocab(&a, &VocabParams::new(1)).unwrap();
            let vb = build_vocab(&b, &VocabParams::new(1)).unwrap();
            prop_assert_eq!(va.targets(), vb.targets());
            let ma = count_cooccurrences(&a, 0, &va, 2).unwrap();
            if ma.total_pairs > 0 {
                let pa = compute_ppmi(&ma).unwrap();
                let pb = compute_ppmi(&count_cooccurrences(&b, 0, &vb, 2).unwrap()).unwrap();
                prop_assert_eq!(pa.values.nnz(), pb.values.nnz());
                for ((ra, ca, x), (rb, cb, y)) in pa.values.iter().zip(pb.values.iter()) {
                    prop_assert_eq!((ra, ca), (rb, cb));
                    prop_assert!((x - y).abs() < 1e-12);
                }
            }
        }
    }
}
