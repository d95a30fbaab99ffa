//! Per-word diachronic similarity matrices and their serialized features.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::embed::EmbeddingTensor;
use crate::linalg::{dot, norm};
use crate::{Error, Result};

/// Pairwise measure between two embeddings of the same word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "lowercase"))]
pub enum Metric {
    Cosine,
    Euclidean,
}

impl Metric {
    pub const ALL: [Metric; 2] = [Metric::Cosine, Metric::Euclidean];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Cosine => "cosine",
            Metric::Euclidean => "euclidean",
        }
    }

    pub fn eval(self, u: &[f64], v: &[f64]) -> f64 {
        match self {
            Metric::Cosine => cosine(u, v),
            Metric::Euclidean => euclidean(u, v),
        }
    }
}

/// How a similarity matrix is serialized into a feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum FeatureMode {
    /// `S[i][i+1]` for consecutive periods.
    Adjacent,
    /// `S[0][j]` for `j >= 1`.
    Period0,
    /// Row-major `S[i][j]` for all `i < j`.
    UpperTri,
}

impl FeatureMode {
    pub const ALL: [FeatureMode; 3] = [FeatureMode::Adjacent, FeatureMode::Period0, FeatureMode::UpperTri];

    pub fn name(self) -> &'static str {
        match self {
            FeatureMode::Adjacent => "adjacent",
            FeatureMode::Period0 => "period0",
            FeatureMode::UpperTri => "upper_tri",
        }
    }

    /// Feature length for `periods` periods.
    pub fn len(self, periods: usize) -> usize {
        match self {
            FeatureMode::Adjacent | FeatureMode::Period0 => periods.saturating_sub(1),
            FeatureMode::UpperTri => periods * periods.saturating_sub(1) / 2,
        }
    }
}

macro_rules! named_enum {
    ($ty:ty, $($variant:path),+) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                $(if s == $variant.name() { return Ok($variant); })+
                Err(Error::param(stringify!($ty), alloc::format!("unknown value `{s}`")))
            }
        }
    };
}
named_enum!(Metric, Metric::Cosine, Metric::Euclidean);
named_enum!(FeatureMode, FeatureMode::Adjacent, FeatureMode::Period0, FeatureMode::UpperTri);

/// Cosine similarity, defined as 0 when either vector is zero.
pub fn cosine(u: &[f64], v: &[f64]) -> f64 {
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    (dot(u, v) / (nu * nv)).clamp(-1.0, 1.0)
}

pub fn euclidean(u: &[f64], v: &[f64]) -> f64 {
    libm::sqrt(u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum())
}

/// Symmetric `T x T` matrix of one word's cross-period similarities.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pub word: usize,
    pub metric: Metric,
    periods: usize,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    /// Wrap raw row-major values; the matrix must be square and symmetric.
    pub fn from_values(word: usize, metric: Metric, periods: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != periods * periods {
            return Err(Error::ShapeMismatch(alloc::format!("{} values for {periods}x{periods}", values.len())));
        }
        for i in 0..periods {
            for j in 0..i {
                if values[i * periods + j] != values[j * periods + i] {
                    return Err(Error::ShapeMismatch("similarity matrix is not symmetric".into()));
                }
            }
        }
        Ok(Self {
            word,
            metric,
            periods,
            values,
        })
    }

    pub fn num_periods(&self) -> usize {
        self.periods
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.periods + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.periods..(i + 1) * self.periods]
    }

    /// Mean off-diagonal entry inside the first `block` and last `block`
    /// periods versus the mean entry between them.
    pub fn block_contrast(&self, block: usize) -> Result<(f64, f64)> {
        let t = self.periods;
        if block == 0 || 2 * block > t {
            return Err(Error::param("block", alloc::format!("{block} does not fit {t} periods")));
        }
        let head = 0..block;
        let tail = t - block..t;
        let mut within = (0.0, 0usize);
        for range in [head.clone(), tail.clone()] {
            for i in range.clone() {
                for j in range.clone() {
                    if i != j {
                        within.0 += self.get(i, j);
                        within.1 += 1;
                    }
                }
            }
        }
        let mut cross = (0.0, 0usize);
        for i in head {
            for j in tail.clone() {
                cross.0 += self.get(i, j);
                cross.1 += 1;
            }
        }
        Ok((within.0 / within.1 as f64, cross.0 / cross.1 as f64))
    }
}

/// `S[i][j] = metric(e_i(w), e_j(w))`, each unordered pair computed once.
pub fn similarity_matrix(embeds: &EmbeddingTensor, word: usize, metric: Metric) -> Result<SimilarityMatrix> {
    if word >= embeds.num_words() {
        return Err(Error::IndexOutOfRange {
            index: word,
            size: embeds.num_words(),
        });
    }
    let t = embeds.num_periods();
    let mut values = vec![0.0; t * t];
    for i in 0..t {
        let ei = embeds.vector(i, word);
        values[i * t + i] = match metric {
            Metric::Cosine if norm(ei) > 0.0 => 1.0,
            _ => 0.0,
        };
        for j in i + 1..t {
            let s = metric.eval(ei, embeds.vector(j, word));
            values[i * t + j] = s;
            values[j * t + i] = s;
        }
    }
    Ok(SimilarityMatrix {
        word,
        metric,
        periods: t,
        values,
    })
}

/// Similarity matrices for the given words, in input order.
pub fn similarity_matrices(embeds: &EmbeddingTensor, words: &[usize], metric: Metric) -> Result<Vec<SimilarityMatrix>> {
    crate::par::map_indexed(words.len(), |k| similarity_matrix(embeds, words[k], metric))
        .into_iter()
        .collect()
}

/// A serialized similarity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub word: usize,
    pub mode: FeatureMode,
    pub values: Vec<f64>,
    pub standardized: bool,
}

/// Serialize the matrix according to `mode`.
pub fn extract_features(simmat: &SimilarityMatrix, mode: FeatureMode) -> FeatureVector {
    let t = simmat.num_periods();
    let values = match mode {
        FeatureMode::Adjacent => (0..t.saturating_sub(1)).map(|i| simmat.get(i, i + 1)).collect(),
        FeatureMode::Period0 => (1..t).map(|j| simmat.get(0, j)).collect(),
        FeatureMode::UpperTri => (0..t)
            .flat_map(|i| (i + 1..t).map(move |j| (i, j)))
            .map(|(i, j)| simmat.get(i, j))
            .collect(),
    };
    FeatureVector {
        word: simmat.word,
        mode,
        values,
        standardized: false,
    }
}

/// Population mean and standard deviation.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, libm::sqrt(var))
}

/// Z-score within the vector (population SD); a constant vector becomes all zeros.
pub fn standardize(features: &FeatureVector) -> FeatureVector {
    FeatureVector {
        values: zscore(&features.values),
        standardized: true,
        ..features.clone()
    }
}

fn zscore(values: &[f64]) -> Vec<f64> {
    let (mean, sd) = mean_sd(values);
    // Spread below rounding noise of the mean counts as constant.
    if sd <= mean.abs() * 1e-14 || sd == 0.0 {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - mean) / sd).collect()
}

/// Per-dimension z-scoring across rows of a row-major `n x f` matrix
/// (the alternative to per-word standardization).
pub fn standardize_columns(data: &mut [f64], n: usize, f: usize) {
    for j in 0..f {
        let col: Vec<f64> = (0..n).map(|i| data[i * f + j]).collect();
        for (i, v) in zscore(&col).into_iter().enumerate() {
            data[i * f + j] = v;
        }
    }
}
