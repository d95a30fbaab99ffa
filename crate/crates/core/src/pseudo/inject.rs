use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::PseudoWordSpec;
use crate::corpus::{PeriodSlice, TimeSlicedCorpus, TokenId};
use crate::rng;
use crate::{Error, Result};

const NO_SENSE: (u32, u32) = (u32::MAX, u32::MAX);

/// Subsample documents and replace sense-word occurrences with pseudo tokens.
///
/// In period `t`, `round(sample_rate * n_docs)` documents are kept (in their
/// original order). Each occurrence of sense word `slot` of spec `s` is then
/// replaced by `s.pseudo_token` with probability `s.schedule.probability(t, slot)`.
/// Every document draws from its own stream keyed by `(seed, t, document)`.
pub fn inject_pseudowords(
    corpus: &TimeSlicedCorpus,
    specs: &[PseudoWordSpec],
    sample_rate: f64,
    seed: u64,
) -> Result<TimeSlicedCorpus> {
    if !(sample_rate > 0.0 && sample_rate <= 1.0) {
        return Err(Error::param("sample_rate", "must lie in (0, 1]"));
    }
    let mut symbols = corpus.symbols().clone();
    // sense[token] = (spec index, slot)
    let mut sense = vec![NO_SENSE; symbols.len()];
    let mut pseudo = Vec::with_capacity(specs.len());
    for (i, spec) in specs.iter().enumerate() {
        if spec.schedule.periods != corpus.num_periods() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{} has a {}-period schedule for a {}-period corpus",
                spec.pseudo_token,
                spec.schedule.periods,
                corpus.num_periods()
            )));
        }
        if symbols.get(&spec.pseudo_token).is_some() {
            return Err(Error::param(
                "pseudo_token",
                alloc::format!("`{}` already occurs in the corpus", spec.pseudo_token),
            ));
        }
        for (slot, w) in spec.sense_words().enumerate() {
            let id = symbols.get(w).ok_or_else(|| Error::UnknownWord(w.into()))?;
            if sense[id as usize] != NO_SENSE {
                return Err(Error::param("specs", alloc::format!("sense word `{w}` used twice")));
            }
            sense[id as usize] = (i as u32, slot as u32);
        }
    }
    for spec in specs {
        pseudo.push(symbols.intern(&spec.pseudo_token));
    }

    let periods = crate::par::map_indexed(corpus.num_periods(), |t| {
        let period = corpus.period(t);
        let n = period.num_documents();
        let kept: Vec<usize> = if sample_rate >= 1.0 {
            (0..n).collect()
        } else {
            let k = libm::round(sample_rate * n as f64) as usize;
            let mut r = rng::stream(seed, &[0xd0c, t as u64]);
            let mut idx = rand::seq::index::sample(&mut r, n, k).into_vec();
            idx.sort_unstable();
            idx
        };
        let docs = crate::par::map_indexed(kept.len(), |i| {
            let d = kept[i];
            let mut r = rng::stream(seed, &[0x1e7, t as u64, d as u64]);
            period
                .document(d)
                .iter()
                .map(|&tok| {
                    let (s, slot) = sense[tok as usize];
                    if s == u32::MAX {
                        return tok;
                    }
                    let p = specs[s as usize].schedule.probability(t, slot as usize);
                    // Always draw so the stream position does not depend on p.
                    let u: f64 = r.random();
                    if u < p {
                        pseudo[s as usize]
                    } else {
                        tok
                    }
                })
                .collect::<Vec<TokenId>>()
        });
        let mut out = PeriodSlice::new();
        for doc in docs {
            out.push_document(doc);
        }
        out
    });
    corpus.with_periods(periods, symbols)
}
