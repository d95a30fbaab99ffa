//! Pipeline configuration: a flat `key = value` file.
//!
//! Blank lines and lines starting with `#` are ignored. Every key has a
//! default; [`PipelineConfig`]'s `Display` writes every key, and parsing that
//! output gives back an identical config.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use diachron_core::cluster::{ClusterMethod, Linkage};
use diachron_core::simmat::{FeatureMode, Metric};

/// A config problem, located by line and key where possible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "`{key}`: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    fn at(line: Option<usize>, key: &str, message: impl Into<String>) -> Self {
        Self {
            line,
            key: Some(key.to_string()),
            message: message.into(),
        }
    }

    pub fn invalid(key: &str, message: impl Into<String>) -> Self {
        Self::at(None, key, message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    /// Directory: a directory per period, named by label.
    Dir,
    /// `label<TAB>document` lines.
    Tsv,
    /// `Dir` for directories, `Tsv` otherwise.
    Auto,
}

impl CorpusFormat {
    fn name(self) -> &'static str {
        match self {
            CorpusFormat::Dir => "dir",
            CorpusFormat::Tsv => "tsv",
            CorpusFormat::Auto => "auto",
        }
    }
}

impl FromStr for CorpusFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "dir" => Ok(CorpusFormat::Dir),
            "tsv" => Ok(CorpusFormat::Tsv),
            "auto" => Ok(CorpusFormat::Auto),
            _ => Err(format!("expected dir, tsv or auto, got `{s}`")),
        }
    }
}

/// Every knob of the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub corpus: Option<PathBuf>,
    pub corpus_format: CorpusFormat,
    pub subsample: Option<f64>,
    pub min_count: u64,
    pub context_min_count: Option<u64>,
    pub window: usize,
    pub dim: usize,
    pub svd_oversample: usize,
    pub svd_power_iters: usize,
    pub svd_tol: Option<f64>,
    pub metric: Metric,
    pub features: FeatureMode,
    pub standardize: bool,
    pub cluster_method: ClusterMethod,
    pub linkage: Linkage,
    pub n_clusters: usize,
    pub distance_threshold: Option<f64>,
    pub kmeans_restarts: usize,
    pub kmeans_max_iters: usize,
    pub seed: u64,
    pub output: PathBuf,
    pub words: Vec<String>,
    pub explain_word: Option<String>,
    pub t1: Option<String>,
    pub t2: Option<String>,
    pub top_k: usize,
    pub pseudo_min_count: u64,
    pub sample_rate: f64,
    pub replicas: usize,
    pub d1_increasing: bool,
    pub scale_spikes: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            corpus: None,
            corpus_format: CorpusFormat::Auto,
            subsample: None,
            min_count: 100,
            context_min_count: None,
            window: 5,
            dim: 100,
            svd_oversample: 10,
            svd_power_iters: 7,
            svd_tol: Some(1e-12),
            metric: Metric::Cosine,
            features: FeatureMode::UpperTri,
            standardize: true,
            cluster_method: ClusterMethod::Agglomerative,
            linkage: Linkage::Ward,
            n_clusters: 7,
            distance_threshold: None,
            kmeans_restarts: 10,
            kmeans_max_iters: 300,
            seed: 0,
            output: PathBuf::from("out"),
            words: Vec::new(),
            explain_word: None,
            t1: None,
            t2: None,
            top_k: 10,
            pseudo_min_count: 50,
            sample_rate: 0.7,
            replicas: 5,
            d1_increasing: false,
            scale_spikes: true,
        }
    }
}

/// Name and help text of every key, in file order.
pub const KEYS: &[(&str, &str)] = &[
    ("corpus", "corpus directory or TSV file"),
    ("corpus_format", "dir, tsv or auto"),
    ("subsample", "frequent-word subsampling threshold, or none"),
    ("min_count", "target words need this many occurrences in every period"),
    ("context_min_count", "context threshold (none = min_count)"),
    ("window", "symmetric co-occurrence window radius"),
    ("dim", "embedding dimension"),
    ("svd_oversample", "extra randomized SVD sketch columns"),
    ("svd_power_iters", "randomized SVD power iterations"),
    ("svd_tol", "relative singular value tolerance for extra iterations, or none"),
    ("metric", "cosine or euclidean"),
    ("features", "adjacent, period0 or upper_tri"),
    ("standardize", "z-score each feature vector (true/false)"),
    ("cluster_method", "agglomerative or kmeans"),
    ("linkage", "ward, average or complete"),
    ("n_clusters", "number of clusters"),
    ("distance_threshold", "agglomerative merge height cut, or none (overrides n_clusters)"),
    ("kmeans_restarts", "k-means++ restarts"),
    ("kmeans_max_iters", "Lloyd iteration cap"),
    ("seed", "master random seed"),
    ("output", "output directory"),
    ("words", "comma-separated words for per-word exports"),
    ("explain_word", "word to explain"),
    ("t1", "first period label for explain"),
    ("t2", "second period label for explain"),
    ("top_k", "ranked context words per direction"),
    ("pseudo_min_count", "min count per period for sense words and the evaluation vocabulary"),
    ("sample_rate", "share of documents kept per period in pseudo corpora"),
    ("replicas", "pseudowords per schema and frequency quartile"),
    ("d1_increasing", "D1 sense 1 rises instead of falling (true/false)"),
    ("scale_spikes", "rescale spike periods when T != 20 (true/false)"),
];

fn parse<T: FromStr>(value: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    value.parse::<T>().map_err(|e| format!("cannot parse `{value}`: {e}"))
}

fn optional<T: FromStr>(value: &str) -> Result<Option<T>, String>
where
    T::Err: fmt::Display,
{
    if value == "none" {
        Ok(None)
    } else {
        parse(value).map(Some)
    }
}

fn boolean(value: &str) -> Result<bool, String> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got `{value}`")),
    }
}

fn show<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "none".to_string(), T::to_string)
}

impl PipelineConfig {
    /// Assign one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        let r: Result<(), String> = (|| {
            match key {
                "corpus" => self.corpus = optional::<PathBuf>(v)?,
                "corpus_format" => self.corpus_format = v.parse()?,
                "subsample" => self.subsample = optional(v)?,
                "min_count" => self.min_count = parse(v)?,
                "context_min_count" => self.context_min_count = optional(v)?,
                "window" => self.window = parse(v)?,
                "dim" => self.dim = parse(v)?,
                "svd_oversample" => self.svd_oversample = parse(v)?,
                "svd_power_iters" => self.svd_power_iters = parse(v)?,
                "svd_tol" => self.svd_tol = optional(v)?,
                "metric" => self.metric = parse(v)?,
                "features" => self.features = parse(v)?,
                "standardize" => self.standardize = boolean(v)?,
                "cluster_method" => self.cluster_method = parse(v)?,
                "linkage" => self.linkage = parse(v)?,
                "n_clusters" => self.n_clusters = parse(v)?,
                "distance_threshold" => self.distance_threshold = optional(v)?,
                "kmeans_restarts" => self.kmeans_restarts = parse(v)?,
                "kmeans_max_iters" => self.kmeans_max_iters = parse(v)?,
                "seed" => self.seed = parse(v)?,
                "output" => self.output = parse(v)?,
                "words" => {
                    self.words = v
                        .split(',')
                        .map(str::trim)
                        .filter(|w| !w.is_empty())
                        .map(String::from)
                        .collect()
                }
                "explain_word" => self.explain_word = optional(v)?,
                "t1" => self.t1 = optional(v)?,
                "t2" => self.t2 = optional(v)?,
                "top_k" => self.top_k = parse(v)?,
                "pseudo_min_count" => self.pseudo_min_count = parse(v)?,
                "sample_rate" => self.sample_rate = parse(v)?,
                "replicas" => self.replicas = parse(v)?,
                "d1_increasing" => self.d1_increasing = boolean(v)?,
                "scale_spikes" => self.scale_spikes = boolean(v)?,
                _ => return Err("unknown key".into()),
            }
            Ok(())
        })();
        r.map_err(|m| ConfigError::invalid(key, m))
    }

    /// Textual value of `key`, as written by `Display`.
    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "corpus" => show(&self.corpus.as_ref().map(|p| p.display())),
            "corpus_format" => self.corpus_format.name().into(),
            "subsample" => show(&self.subsample),
            "min_count" => self.min_count.to_string(),
            "context_min_count" => show(&self.context_min_count),
            "window" => self.window.to_string(),
            "dim" => self.dim.to_string(),
            "svd_oversample" => self.svd_oversample.to_string(),
            "svd_power_iters" => self.svd_power_iters.to_string(),
            "svd_tol" => show(&self.svd_tol),
            "metric" => self.metric.to_string(),
            "features" => self.features.to_string(),
            "standardize" => self.standardize.to_string(),
            "cluster_method" => self.cluster_method.to_string(),
            "linkage" => self.linkage.to_string(),
            "n_clusters" => self.n_clusters.to_string(),
            "distance_threshold" => show(&self.distance_threshold),
            "kmeans_restarts" => self.kmeans_restarts.to_string(),
            "kmeans_max_iters" => self.kmeans_max_iters.to_string(),
            "seed" => self.seed.to_string(),
            "output" => self.output.display().to_string(),
            "words" => self.words.join(","),
            "explain_word" => show(&self.explain_word),
            "t1" => show(&self.t1),
            "t2" => show(&self.t2),
            "top_k" => self.top_k.to_string(),
            "pseudo_min_count" => self.pseudo_min_count.to_string(),
            "sample_rate" => self.sample_rate.to_string(),
            "replicas" => self.replicas.to_string(),
            "d1_increasing" => self.d1_increasing.to_string(),
            "scale_spikes" => self.scale_spikes.to_string(),
            _ => return None,
        })
    }

    /// Apply the lines of a config file on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = Some(i + 1);
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(ConfigError {
                    line,
                    key: None,
                    message: "expected `key = value`".into(),
                });
            };
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(ConfigError::at(line, key, "duplicate key"));
            }
            self.set(key, value).map_err(|e| ConfigError { line, ..e })?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut c = Self::default();
        c.apply_text(text)?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, crate::CliError> {
        let text = crate::io::read_to_string(path)?;
        Self::from_text(&text).map_err(|error| crate::CliError::Config {
            file: Some(path.to_path_buf()),
            error,
        })
    }

    /// Cross-field checks that a single `set` cannot make.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("window", self.window),
            ("dim", self.dim),
            ("n_clusters", self.n_clusters),
            ("kmeans_restarts", self.kmeans_restarts),
            ("top_k", self.top_k),
            ("replicas", self.replicas),
        ];
        for (key, v) in positive {
            if v == 0 {
                return Err(ConfigError::invalid(key, "must be at least 1"));
            }
        }
        if self.min_count == 0 || self.pseudo_min_count == 0 {
            return Err(ConfigError::invalid("min_count", "must be at least 1"));
        }
        if let Some(s) = self.subsample {
            if !(s > 0.0 && s < 1.0) {
                return Err(ConfigError::invalid("subsample", "must lie in (0, 1)"));
            }
        }
        if !(self.sample_rate > 0.0 && self.sample_rate <= 1.0) {
            return Err(ConfigError::invalid("sample_rate", "must lie in (0, 1]"));
        }
        if let Some(d) = self.distance_threshold {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(ConfigError::invalid("distance_threshold", "must be finite and non-negative"));
            }
        }
        if let Some(t) = self.svd_tol {
            if !(t > 0.0) {
                return Err(ConfigError::invalid("svd_tol", "must be positive"));
            }
        }
        Ok(())
    }
}

impl fmt::Display for PipelineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (key, _) in KEYS {
            writeln!(f, "{key} = {}", self.get(key).expect("listed key"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_key_round_trips() {
        let c = PipelineConfig::default();
        for (key, _) in KEYS {
            let v = c.get(key).unwrap();
            let mut d = PipelineConfig::default();
            d.set(key, &v).unwrap();
            assert_eq!(d, c, "{key}");
        }
        assert_eq!(PipelineConfig::from_text(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn diagnostics_name_line_and_key() {
        let e = PipelineConfig::from_text("# comment\nwindow = 5\nwindow = 6\n").unwrap_err();
        assert_eq!((e.line, e.key.as_deref()), (Some(3), Some("window")));
        let e = PipelineConfig::from_text("\nmetric = manhattan").unwrap_err();
        assert_eq!((e.line, e.key.as_deref()), (Some(2), Some("metric")));
        assert!(e.to_string().starts_with("line 2: `metric`:"));
        let e = PipelineConfig::from_text("bogus = 1").unwrap_err();
        assert_eq!(e.message, "unknown key");
        assert!(PipelineConfig::from_text("no equals sign").unwrap_err().key.is_none());
    }

    #[test]
    fn validation() {
        let mut c = PipelineConfig::default();
        assert!(c.validate().is_ok());
        c.sample_rate = 0.0;
        assert_eq!(c.validate().unwrap_err().key.as_deref(), Some("sample_rate"));
        let c = PipelineConfig {
            subsample: Some(1.5),
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }
}
