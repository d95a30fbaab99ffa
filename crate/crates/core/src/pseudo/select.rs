use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use super::{build_schedule, Schema, ScheduleOptions, SenseSchedule, MISC_SENSES};
use crate::corpus::Vocabulary;
use crate::rng;
use crate::{Error, Result};

/// One pseudoword: its token, schema, sense words and drawn schedule.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PseudoWordSpec {
    pub pseudo_token: String,
    pub schema: Schema,
    pub quartile: usize,
    pub replica: usize,
    pub word_1: String,
    pub word_2: String,
    /// The [`MISC_SENSES`] miscellaneous sense words.
    pub misc: Vec<String>,
    pub schedule: SenseSchedule,
    /// Seed of the schedule's random draws.
    pub seed: u64,
}

impl PseudoWordSpec {
    /// All nine sense words in slot order (word 1, word 2, miscellaneous).
    pub fn sense_words(&self) -> impl Iterator<Item = &str> {
        [self.word_1.as_str(), self.word_2.as_str()]
            .into_iter()
            .chain(self.misc.iter().map(String::as_str))
    }
}

/// Benchmark layout.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkParams {
    /// Pseudowords per schema and quartile.
    pub replicas: usize,
    /// Sense words need this many occurrences in every period.
    pub min_count: u64,
    pub options: ScheduleOptions,
    pub seed: u64,
}

impl BenchmarkParams {
    pub fn new(seed: u64) -> Self {
        Self {
            replicas: 5,
            min_count: 50,
            options: ScheduleOptions::default(),
            seed,
        }
    }
}

/// Eligible target indices split into four frequency buckets, lowest first.
///
/// Words are ordered by total count (ties by word) and cut into four
/// contiguous runs of near-equal size.
pub fn frequency_quartiles(vocab: &Vocabulary, min_count: u64) -> [Vec<usize>; 4] {
    let mut eligible: Vec<usize> = (0..vocab.num_targets())
        .filter(|&w| (0..vocab.num_periods()).all(|t| vocab.count(t, w) >= min_count))
        .collect();
    eligible.sort_by(|&a, &b| {
        vocab
            .total_count(a)
            .cmp(&vocab.total_count(b))
            .then_with(|| vocab.target(a).cmp(vocab.target(b)))
    });
    let n = eligible.len();
    core::array::from_fn(|q| eligible[q * n / 4..(q + 1) * n / 4].to_vec())
}

fn draw<R: Rng + ?Sized>(pool: &mut Vec<usize>, rng: &mut R) -> usize {
    let i = rng.random_range(0..pool.len());
    pool.remove(i)
}

/// Draw the sense words of one pseudoword. Words in `used` are skipped and
/// the nine chosen words are added to it.
pub fn select_sense_words(
    vocab: &Vocabulary,
    params: &BenchmarkParams,
    schema: Schema,
    quartile: usize,
    replica: usize,
    used: &mut BTreeSet<usize>,
) -> Result<PseudoWordSpec> {
    if quartile >= 4 {
        return Err(Error::IndexOutOfRange { index: quartile, size: 4 });
    }
    let buckets = frequency_quartiles(vocab, params.min_count);
    let pseudo_token = alloc::format!("{schema}-{quartile}-{replica}");
    if vocab.context_index(&pseudo_token).is_some() {
        return Err(Error::param(
            "pseudo_token",
            alloc::format!("`{pseudo_token}` already occurs in the vocabulary"),
        ));
    }
    let mut bucket: Vec<usize> = buckets[quartile].iter().copied().filter(|w| !used.contains(w)).collect();
    if bucket.len() < 2 {
        return Err(Error::InsufficientWords(alloc::format!(
            "quartile {quartile} has {} unused eligible words, need 2",
            bucket.len()
        )));
    }
    let path = [0x5e15, schema.index() as u64, quartile as u64, replica as u64];
    let mut r = rng::stream(params.seed, &path);
    let w1 = draw(&mut bucket, &mut r);
    let w2 = draw(&mut bucket, &mut r);
    let mut pool: Vec<usize> = buckets
        .iter()
        .flatten()
        .copied()
        .filter(|w| !used.contains(w) && *w != w1 && *w != w2)
        .collect();
    pool.sort_unstable();
    if pool.len() < MISC_SENSES {
        return Err(Error::InsufficientWords(alloc::format!(
            "{} unused eligible words left, need {MISC_SENSES}",
            pool.len()
        )));
    }
    let misc: Vec<usize> = (0..MISC_SENSES).map(|_| draw(&mut pool, &mut r)).collect();
    let seed = rng::derive_seed(params.seed, &path);
    let schedule = build_schedule(schema, vocab.num_periods(), params.options, seed)?;
    used.extend([w1, w2].iter().chain(&misc));
    Ok(PseudoWordSpec {
        pseudo_token,
        schema,
        quartile,
        replica,
        word_1: vocab.target(w1).into(),
        word_2: vocab.target(w2).into(),
        misc: misc.iter().map(|&w| vocab.target(w).into()).collect(),
        schedule,
        seed,
    })
}

/// Every schema x quartile x replica pseudoword, with no sense word reused.
pub fn build_benchmark(vocab: &Vocabulary, params: &BenchmarkParams) -> Result<Vec<PseudoWordSpec>> {
    let mut used = BTreeSet::new();
    let mut specs = Vec::with_capacity(Schema::ALL.len() * 4 * params.replicas);
    for schema in Schema::ALL {
        for q in 0..4 {
            for r in 0..params.replicas {
                specs.push(select_sense_words(vocab, params, schema, q, r, &mut used)?);
            }
        }
    }
    Ok(specs)
}
