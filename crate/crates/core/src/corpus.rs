//! Time-sliced corpora, subsampling and vocabulary selection.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use hashbrown::HashMap;
use rand::Rng;

use crate::{rng, Error, Result};

/// Interned token id.
pub type TokenId = u32;

/// Marker for "token not in this index".
pub const NO_INDEX: u32 = u32::MAX;

/// Bidirectional string <-> [`TokenId`] table shared by all periods.
#[derive(Debug, Clone, Default)]
pub struct SymbolTable {
    words: Vec<String>,
    index: HashMap<String, TokenId>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, word: &str) -> TokenId {
        if let Some(&id) = self.index.get(word) {
            return id;
        }
        let id = self.words.len() as TokenId;
        self.words.push(word.to_string());
        self.index.insert(word.to_string(), id);
        id
    }

    pub fn get(&self, word: &str) -> Option<TokenId> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: TokenId) -> &str {
        &self.words[id as usize]
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// One period's documents, stored as a flat token buffer plus document offsets.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PeriodSlice {
    tokens: Vec<TokenId>,
    /// `offsets[d]..offsets[d + 1]` is document `d`; always starts with 0.
    offsets: Vec<usize>,
}

impl PeriodSlice {
    pub fn new() -> Self {
        Self {
            tokens: Vec::new(),
            offsets: vec![0],
        }
    }

    pub fn push_document<I: IntoIterator<Item = TokenId>>(&mut self, doc: I) {
        self.tokens.extend(doc);
        self.offsets.push(self.tokens.len());
    }

    pub fn token_count(&self) -> usize {
        self.tokens.len()
    }

    pub fn num_documents(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn document(&self, d: usize) -> &[TokenId] {
        &self.tokens[self.document_range(d)]
    }

    fn document_range(&self, d: usize) -> Range<usize> {
        self.offsets[d]..self.offsets[d + 1]
    }

    pub fn documents(&self) -> impl Iterator<Item = &[TokenId]> + '_ {
        self.offsets.windows(2).map(move |w| &self.tokens[w[0]..w[1]])
    }

    pub fn tokens(&self) -> &[TokenId] {
        &self.tokens
    }
}

/// An ordered sequence of `T >= 2` tokenized sub-corpora.
#[derive(Debug, Clone)]
pub struct TimeSlicedCorpus {
    labels: Vec<String>,
    periods: Vec<PeriodSlice>,
    symbols: SymbolTable,
}

impl TimeSlicedCorpus {
    /// Validates `T >= 2`, strictly increasing labels and non-empty periods.
    pub fn new(labels: Vec<String>, periods: Vec<PeriodSlice>, symbols: SymbolTable) -> Result<Self> {
        if labels.len() != periods.len() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{} labels for {} periods",
                labels.len(),
                periods.len()
            )));
        }
        if periods.len() < 2 {
            return Err(Error::TooFewPeriods { found: periods.len() });
        }
        for w in labels.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::PeriodOrder {
                    previous: w[0].clone(),
                    next: w[1].clone(),
                });
            }
        }
        for (label, p) in labels.iter().zip(&periods) {
            if p.token_count() == 0 {
                return Err(Error::EmptyPeriod { label: label.clone() });
            }
        }
        Ok(Self {
            labels,
            periods,
            symbols,
        })
    }

    pub fn num_periods(&self) -> usize {
        self.periods.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn periods(&self) -> &[PeriodSlice] {
        &self.periods
    }

    pub fn period(&self, t: usize) -> &PeriodSlice {
        &self.periods[t]
    }

    pub fn symbols(&self) -> &SymbolTable {
        &self.symbols
    }

    pub fn token_count(&self) -> usize {
        self.periods.iter().map(PeriodSlice::token_count).sum()
    }

    /// Per-period occurrence counts of every symbol (`T` rows of `symbols.len()`).
    pub fn symbol_counts(&self) -> Vec<Vec<u64>> {
        self.periods
            .iter()
            .map(|p| {
                let mut counts = vec![0u64; self.symbols.len()];
                for &tok in p.tokens() {
                    counts[tok as usize] += 1;
                }
                counts
            })
            .collect()
    }

    /// Replace the period contents while keeping labels; used by transforms
    /// that only drop or substitute tokens.
    pub(crate) fn with_periods(&self, periods: Vec<PeriodSlice>, symbols: SymbolTable) -> Result<Self> {
        Self::new(self.labels.clone(), periods, symbols)
    }
}

/// Accumulates `(period label, document)` pairs in any order.
#[derive(Debug, Default)]
pub struct CorpusBuilder {
    symbols: SymbolTable,
    periods: Vec<(String, PeriodSlice)>,
    by_label: HashMap<String, usize>,
}

impl CorpusBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register a period even if no documents follow (so validation can name it).
    pub fn declare_period(&mut self, label: &str) {
        self.slot(label);
    }

    fn slot(&mut self, label: &str) -> usize {
        if let Some(&i) = self.by_label.get(label) {
            return i;
        }
        let i = self.periods.len();
        self.periods.push((label.to_string(), PeriodSlice::new()));
        self.by_label.insert(label.to_string(), i);
        i
    }

    pub fn add_document<'a, I: IntoIterator<Item = &'a str>>(&mut self, label: &str, tokens: I) {
        let slot = self.slot(label);
        let ids: Vec<TokenId> = tokens.into_iter().map(|t| self.symbols.intern(t)).collect();
        self.periods[slot].1.push_document(ids);
    }

    /// Add a whitespace-tokenized line as one document.
    pub fn add_line(&mut self, label: &str, line: &str) {
        self.add_document(label, line.split_whitespace());
    }

    /// Sort periods by label and validate.
    pub fn build(mut self) -> Result<TimeSlicedCorpus> {
        self.periods.sort_by(|a, b| a.0.cmp(&b.0));
        let (labels, periods) = self.periods.into_iter().unzip();
        TimeSlicedCorpus::new(labels, periods, self.symbols)
    }
}

/// Probability of keeping one occurrence of a word with relative frequency
/// `freq` under subsampling threshold `threshold`.
pub fn keep_probability(freq: f64, threshold: f64) -> f64 {
    if freq <= threshold {
        1.0
    } else {
        libm::sqrt(threshold / freq)
    }
}

/// Randomly drop frequent tokens: an occurrence of a word with within-period
/// relative frequency `f` is discarded with probability `max(0, 1 - sqrt(threshold / f))`.
///
/// Each period draws from its own stream derived from `seed`.
pub fn subsample(corpus: &TimeSlicedCorpus, threshold: f64, seed: u64) -> Result<TimeSlicedCorpus> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::param("threshold", "must lie in (0, 1)"));
    }
    let counts = corpus.symbol_counts();
    let periods = crate::par::map_indexed(corpus.num_periods(), |t| {
        let period = corpus.period(t);
        let total = period.token_count() as f64;
        let keep: Vec<f64> = counts[t]
            .iter()
            .map(|&c| if c == 0 { 1.0 } else { keep_probability(c as f64 / total, threshold) })
            .collect();
        let mut rng = rng::stream(seed, &[0x5ab5, t as u64]);
        let mut out = PeriodSlice::new();
        for doc in period.documents() {
            let kept: Vec<TokenId> = doc
                .iter()
                .copied()
                .filter(|&tok| {
                    let p = keep[tok as usize];
                    p >= 1.0 || rng.random::<f64>() < p
                })
                .collect();
            out.push_document(kept);
        }
        out
    });
    corpus.with_periods(periods, corpus.symbols().clone())
}

/// Vocabulary selection parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct VocabParams {
    /// Target words need at least this many occurrences in every period.
    pub min_count: u64,
    /// Context threshold; `None` uses `min_count`, giving a square PPMI matrix.
    pub context_min_count: Option<u64>,
    /// Words admitted as targets (and contexts) regardless of counts, if they occur at all.
    pub forced: Vec<String>,
}

impl VocabParams {
    pub fn new(min_count: u64) -> Self {
        Self {
            min_count,
            context_min_count: None,
            forced: Vec::new(),
        }
    }
}

/// Target and context word indices plus per-period target counts.
///
/// Indices are dense and 0-based. Both lists are sorted by total frequency
/// descending with ties broken lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    targets: Vec<String>,
    contexts: Vec<String>,
    target_index: HashMap<String, usize>,
    context_index: HashMap<String, usize>,
    periods: usize,
    /// Row-major `T x W`.
    target_counts: Vec<u64>,
    /// Row-major `T x C`.
    context_counts: Vec<u64>,
}

impl Vocabulary {
    /// Assemble a vocabulary from explicit word lists and row-major `T x len` counts.
    pub fn from_parts(
        targets: Vec<String>,
        contexts: Vec<String>,
        periods: usize,
        target_counts: Vec<u64>,
        context_counts: Vec<u64>,
    ) -> Result<Self> {
        if target_counts.len() != periods * targets.len() || context_counts.len() != periods * contexts.len() {
            return Err(Error::ShapeMismatch("vocabulary counts do not match word lists".into()));
        }
        let target_index = index_of(&targets)?;
        let context_index = index_of(&contexts)?;
        if let Some(w) = targets.iter().find(|w| !context_index.contains_key(*w)) {
            return Err(Error::VocabularyMismatch(alloc::format!(
                "target `{w}` missing from context words"
            )));
        }
        Ok(Self {
            targets,
            contexts,
            target_index,
            context_index,
            periods,
            target_counts,
            context_counts,
        })
    }

    pub fn num_targets(&self) -> usize {
        self.targets.len()
    }

    pub fn num_contexts(&self) -> usize {
        self.contexts.len()
    }

    pub fn num_periods(&self) -> usize {
        self.periods
    }

    pub fn targets(&self) -> &[String] {
        &self.targets
    }

    pub fn contexts(&self) -> &[String] {
        &self.contexts
    }

    pub fn target(&self, w: usize) -> &str {
        &self.targets[w]
    }

    pub fn context(&self, c: usize) -> &str {
        &self.contexts[c]
    }

    pub fn target_index(&self, word: &str) -> Option<usize> {
        self.target_index.get(word).copied()
    }

    pub fn context_index(&self, word: &str) -> Option<usize> {
        self.context_index.get(word).copied()
    }

    /// Like [`Self::target_index`] but with a lookup error.
    pub fn require_target(&self, word: &str) -> Result<usize> {
        self.target_index(word).ok_or_else(|| Error::UnknownWord(word.to_string()))
    }

    pub fn count(&self, period: usize, w: usize) -> u64 {
        self.target_counts[period * self.targets.len() + w]
    }

    pub fn context_count(&self, period: usize, c: usize) -> u64 {
        self.context_counts[period * self.contexts.len() + c]
    }

    /// Target counts of one period.
    pub fn period_counts(&self, period: usize) -> &[u64] {
        let w = self.targets.len();
        &self.target_counts[period * w..(period + 1) * w]
    }

    pub fn period_context_counts(&self, period: usize) -> &[u64] {
        let c = self.contexts.len();
        &self.context_counts[period * c..(period + 1) * c]
    }

    pub fn total_count(&self, w: usize) -> u64 {
        (0..self.periods).map(|t| self.count(t, w)).sum()
    }

    /// Map corpus token ids to target and context indices ([`NO_INDEX`] if absent).
    pub fn token_lookup(&self, symbols: &SymbolTable) -> (Vec<u32>, Vec<u32>) {
        let mut targets = vec![NO_INDEX; symbols.len()];
        let mut contexts = vec![NO_INDEX; symbols.len()];
        for (i, w) in self.targets.iter().enumerate() {
            if let Some(id) = symbols.get(w) {
                targets[id as usize] = i as u32;
            }
        }
        for (i, w) in self.contexts.iter().enumerate() {
            if let Some(id) = symbols.get(w) {
                contexts[id as usize] = i as u32;
            }
        }
        (targets, contexts)
    }
}

fn index_of(words: &[String]) -> Result<HashMap<String, usize>> {
    let mut map = HashMap::with_capacity(words.len());
    for (i, w) in words.iter().enumerate() {
        if map.insert(w.clone(), i).is_some() {
            return Err(Error::VocabularyMismatch(alloc::format!("duplicate word `{w}`")));
        }
    }
    Ok(map)
}

/// Select target and context words by per-period minimum counts.
pub fn build_vocab(corpus: &TimeSlicedCorpus, params: &VocabParams) -> Result<Vocabulary> {
    if params.min_count == 0 {
        return Err(Error::param("min_count", "must be at least 1"));
    }
    let counts = corpus.symbol_counts();
    let n = corpus.symbols().len();
    let min_over_periods: Vec<u64> = (0..n)
        .map(|s| counts.iter().map(|c| c[s]).min().unwrap_or(0))
        .collect();
    let totals: Vec<u64> = (0..n).map(|s| counts.iter().map(|c| c[s]).sum()).collect();
    let symbols = corpus.symbols();

    let mut forced = vec![false; n];
    for w in &params.forced {
        if let Some(id) = symbols.get(w) {
            forced[id as usize] = true;
        }
    }
    let context_min = params.context_min_count.unwrap_or(params.min_count);
    let is_target = |s: usize| forced[s] || min_over_periods[s] >= params.min_count;
    let is_context = |s: usize| is_target(s) || min_over_periods[s] >= context_min;

    let order = |mut ids: Vec<usize>| {
        ids.sort_by(|&a, &b| {
            totals[b]
                .cmp(&totals[a])
                .then_with(|| symbols.word(a as TokenId).cmp(symbols.word(b as TokenId)))
        });
        ids
    };
    let target_ids = order((0..n).filter(|&s| is_target(s)).collect());
    if target_ids.is_empty() {
        return Err(Error::EmptyVocabulary {
            min_count: params.min_count,
        });
    }
    let context_ids = order((0..n).filter(|&s| is_context(s)).collect());

    let gather = |ids: &[usize]| -> Vec<u64> {
        counts
            .iter()
            .flat_map(|c| ids.iter().map(move |&s| c[s]))
            .collect()
    };
    let names = |ids: &[usize]| -> Vec<String> {
        ids.iter().map(|&s| symbols.word(s as TokenId).to_string()).collect()
    };
    Vocabulary::from_parts(
        names(&target_ids),
        names(&context_ids),
        corpus.num_periods(),
        gather(&target_ids),
        gather(&context_ids),
    )
}
