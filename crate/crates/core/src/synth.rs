//! Synthetic topical corpora with Zipfian word frequencies.
//!
//! Word `w` (0-based rank) has global weight `(w + 1)^-s` and belongs to
//! topic `w mod topics`. A document picks one topic uniformly; each token is
//! drawn from that topic's words (weights restricted to the topic) with
//! probability `topic_share` and from the global distribution otherwise.
//! Every period is drawn from the same distribution, so word meaning is
//! stable over time unless something is injected.

use alloc::string::String;
use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::corpus::{PeriodSlice, SymbolTable, TimeSlicedCorpus, TokenId};
use crate::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub periods: usize,
    pub docs_per_period: usize,
    /// Inclusive document length range.
    pub doc_len: (usize, usize),
    pub vocab_size: usize,
    pub topics: usize,
    pub topic_share: f64,
    pub zipf_exponent: f64,
    pub seed: u64,
}

impl SynthParams {
    /// 20 periods of about 900k tokens over 3,000 word types.
    pub fn new(seed: u64) -> Self {
        Self {
            periods: 20,
            docs_per_period: 15000,
            doc_len: (40, 80),
            vocab_size: 3000,
            topics: 40,
            topic_share: 0.6,
            zipf_exponent: 1.0,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.periods < 2 {
            return Err(Error::TooFewPeriods { found: self.periods });
        }
        if self.docs_per_period == 0 || self.doc_len.0 == 0 || self.doc_len.0 > self.doc_len.1 {
            return Err(Error::param("doc_len", "need at least one non-empty document"));
        }
        if self.topics == 0 || self.topics > self.vocab_size {
            return Err(Error::param("topics", "must lie in 1..=vocab_size"));
        }
        if !(0.0..=1.0).contains(&self.topic_share) {
            return Err(Error::param("topic_share", "must lie in [0, 1]"));
        }
        if !(self.zipf_exponent >= 0.0 && self.zipf_exponent.is_finite()) {
            return Err(Error::param("zipf_exponent", "must be finite and non-negative"));
        }
        Ok(())
    }
}

/// Name of the word of rank `w`.
pub fn word_name(w: usize) -> String {
    alloc::format!("w{w:04}")
}

/// Generate a corpus; periods are labelled `t00`, `t01`, ...
pub fn generate(params: &SynthParams) -> Result<TimeSlicedCorpus> {
    params.validate()?;
    let v = params.vocab_size;
    let weight = |w: usize| libm::pow((w + 1) as f64, -params.zipf_exponent);
    let global = WeightedIndex::new((0..v).map(weight)).map_err(|e| Error::param("vocab_size", alloc::format!("{e}")))?;
    let topics: Vec<(Vec<TokenId>, WeightedIndex<f64>)> = (0..params.topics)
        .map(|k| {
            let members: Vec<TokenId> = (k..v).step_by(params.topics).map(|w| w as TokenId).collect();
            let dist = WeightedIndex::new(members.iter().map(|&w| weight(w as usize))).expect("non-empty topic");
            (members, dist)
        })
        .collect();

    let mut symbols = SymbolTable::new();
    for w in 0..v {
        symbols.intern(&word_name(w));
    }
    let width = alloc::format!("{}", params.periods - 1).len().max(2);
    let labels = (0..params.periods).map(|t| alloc::format!("t{t:0width$}")).collect();
    let periods = crate::par::map_indexed(params.periods, |t| {
        let docs = crate::par::map_indexed(params.docs_per_period, |d| {
            let mut r = rng::stream(params.seed, &[0x5e7, t as u64, d as u64]);
            let len = r.random_range(params.doc_len.0..=params.doc_len.1);
            let (members, dist) = &topics[r.random_range(0..params.topics)];
            (0..len)
                .map(|_| {
                    if r.random::<f64>() < params.topic_share {
                        members[dist.sample(&mut r)]
                    } else {
                        global.sample(&mut r) as TokenId
                    }
                })
                .collect::<Vec<TokenId>>()
        });
        let mut slice = PeriodSlice::new();
        for doc in docs {
            slice.push_document(doc);
        }
        slice
    });
    TimeSlicedCorpus::new(labels, periods, symbols)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> SynthParams {
        SynthParams {
            periods: 3,
            docs_per_period: 200,
            doc_len: (10, 20),
            vocab_size: 100,
            topics: 5,
            ..SynthParams::new(seed)
        }
    }

    #[test]
    fn shape_and_determinism() {
        let c = generate(&small(1)).unwrap();
        assert_eq!(c.labels(), ["t00", "t01", "t02"]);
        for p in c.periods() {
            assert_eq!(p.num_documents(), 200);
            assert!(p.documents().all(|d| (10..=20).contains(&d.len())));
        }
        let again = generate(&small(1)).unwrap();
        assert_eq!(c.period(2).tokens(), again.period(2).tokens());
        assert_ne!(c.period(2).tokens(), generate(&small(2)).unwrap().period(2).tokens());
    }

    #[test]
    fn frequencies_follow_rank() {
        let c = generate(&SynthParams {
            topic_share: 0.0,
            zipf_exponent: 1.0,
            docs_per_period: 2000,
            ..small(3)
        })
        .unwrap();
        let counts = c.symbol_counts();
        let total: u64 = counts[0].iter().sum();
        // p(rank 0) = 1 / H_100 with H_100 ~ 5.187.
        let share = counts[0][0] as f64 / total as f64;
        assert!((share - 1.0 / 5.187).abs() < 0.01, "{share}");
        assert!(counts[0][0] > counts[0][9] && counts[0][9] > counts[0][99]);
    }

    #[test]
    fn documents_stay_on_topic() {
        let c = generate(&SynthParams {
            topic_share: 1.0,
            ..small(4)
        })
        .unwrap();
        for d in c.period(0).documents() {
            assert!(d.iter().all(|&w| w as usize % 5 == d[0] as usize % 5));
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(generate(&SynthParams { periods: 1, ..small(0) }).is_err());
        assert!(generate(&SynthParams { topics: 0, ..small(0) }).is_err());
        assert!(generate(&SynthParams { topic_share: 1.5, ..small(0) }).is_err());
    }
}
