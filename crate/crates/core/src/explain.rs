//! Ranking context words by PPMI change between two periods.

use alloc::string::String;
use alloc::vec::Vec;

use crate::cooc::PpmiMatrix;
use crate::corpus::Vocabulary;
use crate::{Error, Result};

/// One ranked context word.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedContext {
    pub context: String,
    pub delta: f64,
}

impl RankedContext {
    /// Only positive differences say something about period `t1`.
    pub fn is_informative(&self) -> bool {
        self.delta > 0.0
    }
}

/// Context words of `word` ranked by `M(t1)[word] - M(t2)[word]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftExplanation {
    pub word: String,
    pub t1: usize,
    pub t2: usize,
    pub ranked: Vec<RankedContext>,
}

/// Dense difference row `M(t1)[word] - M(t2)[word]` over all contexts.
pub fn ppmi_difference(m1: &PpmiMatrix, m2: &PpmiMatrix, word: usize) -> Result<Vec<f64>> {
    check_shapes(m1, m2)?;
    if word >= m1.num_targets() {
        return Err(Error::IndexOutOfRange {
            index: word,
            size: m1.num_targets(),
        });
    }
    let mut diff = m1.values.dense_row(word);
    let (cols, vals) = m2.values.row(word);
    for (&c, &v) in cols.iter().zip(vals) {
        diff[c as usize] -= v;
    }
    Ok(diff)
}

fn check_shapes(m1: &PpmiMatrix, m2: &PpmiMatrix) -> Result<()> {
    if m1.num_targets() != m2.num_targets() || m1.num_contexts() != m2.num_contexts() {
        return Err(Error::VocabularyMismatch(alloc::format!(
            "PPMI shapes {}x{} and {}x{}",
            m1.num_targets(),
            m1.num_contexts(),
            m2.num_targets(),
            m2.num_contexts()
        )));
    }
    Ok(())
}

/// Top `k` contexts by PPMI difference, descending, ties broken by context
/// word. Contexts with zero difference are left out, so fewer than `k`
/// entries may come back.
pub fn top_k_shifted_contexts(
    m1: &PpmiMatrix,
    m2: &PpmiMatrix,
    vocab: &Vocabulary,
    word: usize,
    k: usize,
) -> Result<ShiftExplanation> {
    if k == 0 {
        return Err(Error::param("k", "must be at least 1"));
    }
    if vocab.num_targets() != m1.num_targets() || vocab.num_contexts() != m1.num_contexts() {
        return Err(Error::VocabularyMismatch("vocabulary does not match PPMI shape".into()));
    }
    let diff = ppmi_difference(m1, m2, word)?;
    let mut nonzero: Vec<(usize, f64)> = diff.into_iter().enumerate().filter(|&(_, d)| d != 0.0).collect();
    nonzero.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| vocab.context(a.0).cmp(vocab.context(b.0)))
    });
    nonzero.truncate(k);
    Ok(ShiftExplanation {
        word: vocab.target(word).into(),
        t1: m1.period,
        t2: m2.period,
        ranked: nonzero
            .into_iter()
            .map(|(c, delta)| RankedContext {
                context: vocab.context(c).into(),
                delta,
            })
            .collect(),
    })
}

/// `(t2 -> t1, t1 -> t2)`: contexts gained in `t1`, then contexts gained in `t2`.
pub fn explain_both_directions(
    m1: &PpmiMatrix,
    m2: &PpmiMatrix,
    vocab: &Vocabulary,
    word: usize,
    k: usize,
) -> Result<(ShiftExplanation, ShiftExplanation)> {
    Ok((
        top_k_shifted_contexts(m1, m2, vocab, word, k)?,
        top_k_shifted_contexts(m2, m1, vocab, word, k)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::CsrMatrix;
    use alloc::string::ToString;
    use alloc::vec;
    use proptest::prelude::*;

    const LN2: f64 = core::f64::consts::LN_2;

    fn vocab(contexts: &[&str]) -> Vocabulary {
        let ctx: Vec<String> = contexts.iter().map(|s| s.to_string()).collect();
        Vocabulary::from_parts(
            vec![ctx[0].clone()],
            ctx.clone(),
            2,
            vec![1; 2],
            vec![1; 2 * ctx.len()],
        )
        .unwrap()
    }

    fn ppmi(period: usize, row: &[f64]) -> PpmiMatrix {
        let triplets = row
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > 0.0)
            .map(|(c, &v)| (0u32, c as u32, v))
            .collect();
        PpmiMatrix::new(period, CsrMatrix::from_triplets(1, row.len(), triplets).unwrap()).unwrap()
    }

    #[test]
    fn toy_rows_rank_by_direct_subtraction() {
        let v = vocab(&["a", "b", "c"]);
        let m1 = ppmi(0, &[0.0, LN2, 0.0]);
        let m2 = ppmi(1, &[LN2, 0.0, 0.0]);
        let (fwd, back) = explain_both_directions(&m1, &m2, &v, 0, 3).unwrap();
        assert_eq!(fwd.ranked[0], RankedContext { context: "b".into(), delta: LN2 });
        assert_eq!(back.ranked[0], RankedContext { context: "a".into(), delta: LN2 });
        // c is zero in both periods and is never listed.
        assert_eq!(fwd.ranked.len(), 2);
        assert!(!fwd.ranked[1].is_informative());
    }

    #[test]
    fn self_difference_is_zero() {
        let v = vocab(&["a", "b", "c"]);
        let m = ppmi(0, &[0.5, LN2, 0.0]);
        assert!(ppmi_difference(&m, &m, 0).unwrap().iter().all(|&d| d == 0.0));
        assert!(top_k_shifted_contexts(&m, &m, &v, 0, 5).unwrap().ranked.is_empty());
    }

    #[test]
    fn ties_fall_back_to_context_word() {
        let v = vocab(&["z", "y", "x"]);
        let m1 = ppmi(0, &[1.0, 1.0, 1.0]);
        let m2 = ppmi(1, &[0.0, 0.0, 0.0]);
        let e = top_k_shifted_contexts(&m1, &m2, &v, 0, 3).unwrap();
        let words: Vec<&str> = e.ranked.iter().map(|r| r.context.as_str()).collect();
        assert_eq!(words, ["x", "y", "z"]);
    }

    #[test]
    fn errors() {
        let v = vocab(&["a", "b"]);
        let m1 = ppmi(0, &[1.0, 0.0]);
        let m3 = ppmi(1, &[1.0, 0.0, 2.0]);
        assert!(top_k_shifted_contexts(&m1, &m1, &v, 0, 0).is_err());
        assert!(top_k_shifted_contexts(&m1, &m3, &v, 0, 1).is_err());
        assert!(top_k_shifted_contexts(&m1, &m1, &v, 1, 1).is_err());
    }

    proptest! {
        #[test]
        fn swapping_periods_negates(a in prop::collection::vec(0.0f64..3.0, 6), b in prop::collection::vec(0.0f64..3.0, 6)) {
            let m1 = ppmi(0, &a);
            let m2 = ppmi(1, &b);
            let d12 = ppmi_difference(&m1, &m2, 0).unwrap();
            let d21 = ppmi_difference(&m2, &m1, 0).unwrap();
            for (x, y) in d12.iter().zip(&d21) {
                prop_assert_eq!(*x, -*y);
            }
        }

        #[test]
        fn ranking_is_sorted_and_positive_tops_differ(a in prop::collection::vec(0.0f64..3.0, 6), b in prop::collection::vec(0.0f64..3.0, 6)) {
            let v = vocab(&["a", "b", "c", "d", "e", "f"]);
            let (fwd, back) = explain_both_directions(&ppmi(0, &a), &ppmi(1, &b), &v, 0, 6).unwrap();
            for e in [&fwd, &back] {
                for w in e.ranked.windows(2) {
                    prop_assert!(w[0].delta >= w[1].delta);
                }
            }
            if let (Some(f), Some(r)) = (fwd.ranked.first(), back.ranked.first()) {
                if f.delta > 0.0 && r.delta > 0.0 {
                    prop_assert_ne!(&f.context, &r.context);
                }
            }
        }

        #[test]
        fn common_shift_keeps_ranking(a in prop::collection::vec(0.1f64..3.0, 5), b in prop::collection::vec(0.1f64..3.0, 5), shift in 0.0f64..2.0) {
            let v = vocab(&["a", "b", "c", "d", "e"]);
            let base = top_k_shifted_contexts(&ppmi(0, &a), &ppmi(1, &b), &v, 0, 5).unwrap();
            let a2: Vec<f64> = a.iter().map(|x| x + shift).collect();
            let b2: Vec<f64> = b.iter().map(|x| x + shift).collect();
            let moved = top_k_shifted_contexts(&ppmi(0, &a2), &ppmi(1, &b2), &v, 0, 5).unwrap();
            let order = |e: &ShiftExplanation| e.ranked.iter().map(|r| r.context.clone()).collect::<Vec<_>>();
            // Rounding can reorder near-ties; compare only well-separated rankings.
            let separated = base.ranked.windows(2).all(|w| w[0].delta - w[1].delta > 1e-9)
                && base.ranked.iter().all(|r| r.delta.abs() > 1e-9);
            if separated {
                prop_assert_eq!(order(&base), order(&moved));
            }
        }
    }
}
