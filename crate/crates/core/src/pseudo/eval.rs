use alloc::string::String;
use alloc::vec::Vec;

use super::{PseudoWordSpec, Schema};
use crate::cluster::{
    agglomerative, kmeans_pp, match_labels, ClusterAssignment, ClusterMethod, FeatureMatrix, KMeansParams, LabelMatching,
    Linkage, Stop,
};
use crate::cooc::{ppmi_all_periods, DEFAULT_WINDOW};
use crate::corpus::{build_vocab, TimeSlicedCorpus, VocabParams};
use crate::embed::{embeddings_from_svd, stack_ppmi, truncated_svd, DEFAULT_DIM};
use crate::linalg::RsvdParams;
use crate::simmat::{extract_features, similarity_matrices, standardize, FeatureMode, Metric, SimilarityMatrix};
use crate::{rng, Result};

/// Pipeline settings for a benchmark evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub min_count: u64,
    pub window: usize,
    pub dim: usize,
    pub rsvd: RsvdParams,
    pub linkage: Linkage,
    pub kmeans_restarts: usize,
    pub kmeans_max_iters: usize,
    pub seed: u64,
}

impl EvalConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            min_count: 50,
            window: DEFAULT_WINDOW,
            dim: DEFAULT_DIM,
            rsvd: RsvdParams {
                tol: None,
                ..RsvdParams::default()
            },
            linkage: Linkage::Ward,
            kmeans_restarts: 10,
            kmeans_max_iters: 300,
            seed,
        }
    }
}

/// One cell of the evaluation grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridConfig {
    pub metric: Metric,
    pub mode: FeatureMode,
    pub method: ClusterMethod,
    pub standardized: bool,
}

impl GridConfig {
    /// All 24 configurations, metric-major.
    pub fn all() -> Vec<GridConfig> {
        let mut out = Vec::with_capacity(24);
        for metric in Metric::ALL {
            for mode in FeatureMode::ALL {
                for method in ClusterMethod::ALL {
                    for standardized in [false, true] {
                        out.push(GridConfig {
                            metric,
                            mode,
                            method,
                            standardized,
                        });
                    }
                }
            }
        }
        out
    }

    /// Short identifier such as `cosine-upper_tri-agglomerative-std`.
    pub fn id(&self) -> String {
        alloc::format!(
            "{}-{}-{}-{}",
            self.metric,
            self.mode,
            self.method,
            if self.standardized { "std" } else { "raw" }
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub config: GridConfig,
    pub assignment: ClusterAssignment,
    pub matching: LabelMatching,
}

impl GridResult {
    pub fn accuracy(&self) -> f64 {
        self.matching.accuracy
    }
}

/// Outcome of one benchmark evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub seed: u64,
    pub tokens: Vec<String>,
    /// Schema index of each pseudoword.
    pub gold: Vec<usize>,
    pub results: Vec<GridResult>,
    /// Cosine similarity matrix of each pseudoword.
    pub cosine: Vec<SimilarityMatrix>,
    pub euclidean: Vec<SimilarityMatrix>,
}

impl EvalReport {
    pub fn result(&self, config: GridConfig) -> Option<&GridResult> {
        self.results.iter().find(|r| r.config == config)
    }
}

/// Gold class of each spec: the position of its schema in [`Schema::ALL`].
pub fn gold_labels(specs: &[PseudoWordSpec]) -> Vec<usize> {
    specs.iter().map(|s| s.schema.index()).collect()
}

/// Run the pipeline on an injected corpus and score every grid configuration
/// by optimal cluster-to-schema matching with `k = 7`.
pub fn run_schema_eval(corpus: &TimeSlicedCorpus, specs: &[PseudoWordSpec], config: &EvalConfig) -> Result<EvalReport> {
    let tokens: Vec<String> = specs.iter().map(|s| s.pseudo_token.clone()).collect();
    let vocab = build_vocab(
        corpus,
        &VocabParams {
            forced: tokens.clone(),
            ..VocabParams::new(config.min_count)
        },
    )
    .map_err(|e| e.context("vocabulary"))?;
    let words = tokens
        .iter()
        .map(|t| vocab.require_target(t))
        .collect::<Result<Vec<_>>>()?;
    let ppmi = ppmi_all_periods(corpus, &vocab, config.window).map_err(|e| e.context("ppmi"))?;
    let stacked = stack_ppmi(ppmi)?;
    let factors = truncated_svd(&stacked, config.dim, &config.rsvd, rng::derive_seed(config.seed, &[0xe5d]))
        .map_err(|e| e.context("svd"))?;
    let embeds = embeddings_from_svd(&factors, stacked.num_periods(), stacked.num_words())?;
    let cosine = similarity_matrices(&embeds, &words, Metric::Cosine)?;
    let euclidean = similarity_matrices(&embeds, &words, Metric::Euclidean)?;

    let gold = gold_labels(specs);
    let k = Schema::ALL.len();
    let grid = GridConfig::all();
    let results = crate::par::map_indexed(grid.len(), |i| {
        let cfg = grid[i];
        let mats = match cfg.metric {
            Metric::Cosine => &cosine,
            Metric::Euclidean => &euclidean,
        };
        let rows: Vec<Vec<f64>> = mats
            .iter()
            .map(|m| {
                let f = extract_features(m, cfg.mode);
                if cfg.standardized {
                    standardize(&f).values
                } else {
                    f.values
                }
            })
            .collect();
        let run = || -> Result<GridResult> {
            let fm = FeatureMatrix::from_rows(tokens.clone(), &rows)?;
            let assignment = match cfg.method {
                ClusterMethod::Agglomerative => agglomerative(&fm, config.linkage, Stop::NClusters(k))?,
                ClusterMethod::KMeans => {
                    let params = KMeansParams {
                        k,
                        seed: rng::derive_seed(config.seed, &[0x9c, i as u64]),
                        restarts: config.kmeans_restarts,
                        max_iters: config.kmeans_max_iters,
                    };
                    kmeans_pp(&fm, &params)?.assignment
                }
            };
            let matching = match_labels(&assignment, &gold, k)?;
            Ok(GridResult {
                config: cfg,
                assignment,
                matching,
            })
        };
        run().map_err(|e| e.context(cfg.id()))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport {
        seed: config.seed,
        tokens,
        gold,
        results,
        cosine,
        euclidean,
    })
}
