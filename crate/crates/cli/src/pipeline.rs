//! Subcommands. Each stage reads its inputs from the output directory,
//! writes its artifacts there and records both in `manifest.json`.
//!
//! | stage          | reads                              | writes |
//! |----------------|------------------------------------|--------|
//! | `ingest`       | the corpus                         | `corpus.tsv`, `periods.txt`, `vocab.tsv`, `contexts.tsv` |
//! | `ppmi`         | ingest                             | `ppmi/period_NNN.mtx` |
//! | `embed`        | ingest, ppmi                       | `embeddings.bin`, `singular_values.txt` |
//! | `simmat`       | ingest, embed                      | `simmat.bin`, `simmat/<word>.csv` |
//! | `cluster`      | ingest, simmat                     | `features.csv`, `clusters.tsv`, `cluster_summary.json`, `dendrogram.json` |
//! | `explain`      | ingest, ppmi                       | `explain.tsv` |
//! | `heatmap`      | ingest, simmat                     | `heatmaps/<word>.svg` |
//! | `pseudo-gen`   | ingest                             | `pseudo/specs.json`, `pseudo/gold.tsv`, `pseudo/corpus.tsv` |
//! | `eval-schemas` | pseudo-gen                         | `eval/eval_grid.csv`, `eval/gold.tsv`, `eval/confusion/<config>.csv` |
//! | `synth`        | nothing                            | `synth_corpus.tsv` |

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use diachron_core::cluster::{
    agglomerative, kmeans_pp, linkage_tree, silhouette, ClusterAssignment, ClusterMethod, FeatureMatrix, KMeansParams,
    Stop,
};
use diachron_core::cooc::{ppmi_all_periods, PpmiMatrix};
use diachron_core::corpus::{build_vocab, subsample, TimeSlicedCorpus, VocabParams, Vocabulary};
use diachron_core::embed::{embeddings_from_svd, stack_ppmi, truncated_svd, EmbeddingTensor};
use diachron_core::explain::explain_both_directions;
use diachron_core::linalg::RsvdParams;
use diachron_core::pseudo::{build_benchmark, inject_pseudowords, run_schema_eval, BenchmarkParams, EvalConfig, ScheduleOptions};
use diachron_core::rng::derive_seed;
use diachron_core::simmat::{extract_features, similarity_matrices, standardize, SimilarityMatrix};
use diachron_core::synth::{generate, SynthParams};

use crate::config::PipelineConfig;
use crate::formats;
use crate::heatmap::render_svg;
use crate::io::{file_stem, load_corpus, parse_corpus_tsv, ArtifactReader, ArtifactWriter};
use crate::manifest::{RunManifest, StageRecord};
use crate::{CliError, Result};

// Stream ids for the master seed.
const SEED_SUBSAMPLE: u64 = 1;
const SEED_SVD: u64 = 2;
const SEED_KMEANS: u64 = 3;
const SEED_INJECT: u64 = 4;
const SEED_EVAL: u64 = 5;

const SVD_MAX_ITERS: usize = 200;

/// Size of a generated synthetic corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthOptions {
    pub periods: usize,
    pub docs_per_period: usize,
    pub vocab_size: usize,
}

impl Default for SynthOptions {
    fn default() -> Self {
        let p = SynthParams::new(0);
        Self {
            periods: p.periods,
            docs_per_period: p.docs_per_period,
            vocab_size: p.vocab_size,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Ingest,
    Ppmi,
    Embed,
    Simmat,
    Cluster,
    Explain,
    PseudoGen,
    EvalSchemas,
    Heatmap,
    Synth(SynthOptions),
}

impl Command {
    pub const NAMES: [&'static str; 10] = [
        "ingest",
        "ppmi",
        "embed",
        "simmat",
        "cluster",
        "explain",
        "pseudo-gen",
        "eval-schemas",
        "heatmap",
        "synth",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest => "ingest",
            Command::Ppmi => "ppmi",
            Command::Embed => "embed",
            Command::Simmat => "simmat",
            Command::Cluster => "cluster",
            Command::Explain => "explain",
            Command::PseudoGen => "pseudo-gen",
            Command::EvalSchemas => "eval-schemas",
            Command::Heatmap => "heatmap",
            Command::Synth(_) => "synth",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ingest" => Command::Ingest,
            "ppmi" => Command::Ppmi,
            "embed" => Command::Embed,
            "simmat" => Command::Simmat,
            "cluster" => Command::Cluster,
            "explain" => Command::Explain,
            "pseudo-gen" => Command::PseudoGen,
            "eval-schemas" => Command::EvalSchemas,
            "heatmap" => Command::Heatmap,
            "synth" => Command::Synth(SynthOptions::default()),
            _ => return Err(CliError::Usage(format!("unknown subcommand `{s}`"))),
        })
    }
}

/// Run one stage and update the manifest in the output directory.
pub fn run_command(cmd: Command, config: &PipelineConfig) -> Result<RunManifest> {
    config.validate()?;
    let started = Instant::now();
    let mut st = Stage {
        config,
        input: ArtifactReader::new(&config.output),
        output: ArtifactWriter::new(&config.output),
    };
    match cmd {
        Command::Ingest => st.ingest()?,
        Command::Ppmi => st.ppmi()?,
        Command::Embed => st.embed()?,
        Command::Simmat => st.simmat()?,
        Command::Cluster => st.cluster()?,
        Command::Explain => st.explain()?,
        Command::PseudoGen => st.pseudo_gen()?,
        Command::EvalSchemas => st.eval_schemas()?,
        Command::Heatmap => st.heatmap()?,
        Command::Synth(opts) => st.synth(opts)?,
    }
    let mut manifest = RunManifest::load_or_new(&config.output, config);
    manifest.stages.insert(
        cmd.name().to_string(),
        StageRecord {
            seconds: started.elapsed().as_secs_f64(),
            inputs: st.input.into_records(),
            outputs: st.output.into_records(),
        },
    );
    manifest.write(&config.output)?;
    Ok(manifest)
}

struct Stage<'a> {
    config: &'a PipelineConfig,
    input: ArtifactReader,
    output: ArtifactWriter,
}

impl Stage<'_> {
    // ---- upstream readers ----

    fn periods(&mut self) -> Result<Vec<String>> {
        let (_, text) = self.input.text("periods.txt", "ingest")?;
        Ok(formats::parse_periods(&text))
    }

    fn vocab(&mut self, labels: &[String]) -> Result<Vocabulary> {
        let (vp, vt) = self.input.text("vocab.tsv", "ingest")?;
        let (cp, ct) = self.input.text("contexts.tsv", "ingest")?;
        formats::parse_vocab(&vt, &vp, &ct, &cp, labels)
    }

    fn corpus(&mut self, rel: &str, producer: &'static str) -> Result<TimeSlicedCorpus> {
        let (path, text) = self.input.text(rel, producer)?;
        parse_corpus_tsv(&text, &path)
    }

    fn ppmi_matrix(&mut self, t: usize) -> Result<PpmiMatrix> {
        let (path, text) = self.input.text(&ppmi_path(t), "ppmi")?;
        formats::parse_ppmi_mtx(&text, &path, t)
    }

    fn embeddings(&mut self) -> Result<EmbeddingTensor> {
        let (path, bytes) = self.input.get("embeddings.bin", "embed")?;
        formats::parse_embeddings_bin(&bytes, &path)
    }

    fn simmats(&mut self, words: usize, periods: usize) -> Result<Vec<SimilarityMatrix>> {
        let (path, bytes) = self.input.get("simmat.bin", "simmat")?;
        let (metric, mats) = formats::parse_simmat_bin(&bytes, &path)?;
        if metric != self.config.metric {
            return Err(CliError::Usage(format!(
                "simmat.bin holds {metric} matrices but metric = {}; rerun `diachron simmat`",
                self.config.metric
            )));
        }
        if mats.len() != words || mats.first().is_some_and(|m| m.num_periods() != periods) {
            return Err(CliError::Usage("simmat.bin does not match vocab.tsv; rerun `diachron simmat`".into()));
        }
        Ok(mats)
    }

    /// Target indices of `config.words`.
    fn selected_words(&self, vocab: &Vocabulary) -> Result<Vec<usize>> {
        Ok(self
            .config
            .words
            .iter()
            .map(|w| vocab.require_target(w))
            .collect::<diachron_core::Result<_>>()?)
    }

    // ---- stages ----

    fn ingest(&mut self) -> Result<()> {
        let c = self.config;
        let path = c
            .corpus
            .as_ref()
            .ok_or_else(|| CliError::Usage("`corpus` is not set".into()))?;
        let mut corpus = load_corpus(path, c.corpus_format)?;
        if let Some(threshold) = c.subsample {
            corpus = subsample(&corpus, threshold, derive_seed(c.seed, &[SEED_SUBSAMPLE]))?;
        }
        let vocab = build_vocab(
            &corpus,
            &VocabParams {
                min_count: c.min_count,
                context_min_count: c.context_min_count,
                forced: Vec::new(),
            },
        )?;
        let labels = corpus.labels();
        self.output.put("corpus.tsv", &formats::corpus_tsv(&corpus))?;
        self.output.put("periods.txt", &formats::periods_txt(labels))?;
        self.output.put("vocab.tsv", &formats::vocab_tsv(&vocab, labels))?;
        self.output.put("contexts.tsv", &formats::contexts_tsv(&vocab, labels))?;
        Ok(())
    }

    fn ppmi(&mut self) -> Result<()> {
        let labels = self.periods()?;
        let vocab = self.vocab(&labels)?;
        let corpus = self.corpus("corpus.tsv", "ingest")?;
        if corpus.labels() != labels.as_slice() {
            return Err(CliError::Usage("corpus.tsv does not match periods.txt; rerun `diachron ingest`".into()));
        }
        for (t, m) in ppmi_all_periods(&corpus, &vocab, self.config.window)?.iter().enumerate() {
            self.output.put(&ppmi_path(t), &formats::ppmi_mtx(m, &labels[t]))?;
        }
        Ok(())
    }

    fn embed(&mut self) -> Result<()> {
        let c = self.config;
        let labels = self.periods()?;
        let vocab = self.vocab(&labels)?;
        let blocks = (0..labels.len()).map(|t| self.ppmi_matrix(t)).collect::<Result<Vec<_>>>()?;
        let stacked = stack_ppmi(blocks)?;
        if stacked.num_words() != vocab.num_targets() || stacked.num_contexts() != vocab.num_contexts() {
            return Err(CliError::Usage("PPMI matrices do not match vocab.tsv; rerun `diachron ppmi`".into()));
        }
        let params = RsvdParams {
            oversample: c.svd_oversample,
            power_iters: c.svd_power_iters,
            tol: c.svd_tol,
            max_iters: SVD_MAX_ITERS.max(c.svd_power_iters),
        };
        let factors = truncated_svd(&stacked, c.dim, &params, derive_seed(c.seed, &[SEED_SVD]))?;
        let embeds = embeddings_from_svd(&factors, labels.len(), vocab.num_targets())?;
        self.output.put("embeddings.bin", &formats::embeddings_bin(&embeds))?;
        let sigma: String = factors.sigma.iter().map(|s| format!("{s}\n")).collect();
        self.output.put("singular_values.txt", sigma.as_bytes())?;
        Ok(())
    }

    fn simmat(&mut self) -> Result<()> {
        let labels = self.periods()?;
        let vocab = self.vocab(&labels)?;
        let embeds = self.embeddings()?;
        if embeds.num_words() != vocab.num_targets() || embeds.num_periods() != labels.len() {
            return Err(CliError::Usage("embeddings.bin does not match vocab.tsv; rerun `diachron embed`".into()));
        }
        let all: Vec<usize> = (0..vocab.num_targets()).collect();
        let mats = similarity_matrices(&embeds, &all, self.config.metric)?;
        self.output
            .put("simmat.bin", &formats::simmat_bin(&mats, self.config.metric, labels.len()))?;
        for w in self.selected_words(&vocab)? {
            let rel = format!("simmat/{}.csv", file_stem(vocab.target(w)));
            self.output.put(&rel, &formats::simmat_csv(&mats[w], &labels))?;
        }
        Ok(())
    }

    fn cluster(&mut self) -> Result<()> {
        let c = self.config;
        let labels = self.periods()?;
        let vocab = self.vocab(&labels)?;
        let mats = self.simmats(vocab.num_targets(), labels.len())?;
        let rows: Vec<Vec<f64>> = mats
            .iter()
            .map(|m| {
                let f = extract_features(m, c.features);
                if c.standardize {
                    standardize(&f).values
                } else {
                    f.values
                }
            })
            .collect();
        let fm = FeatureMatrix::from_rows(vocab.targets().to_vec(), &rows)?;
        self.output.put("features.csv", &formats::features_csv(&fm))?;

        let assignment: ClusterAssignment = match c.cluster_method {
            ClusterMethod::Agglomerative => {
                let stop = match c.distance_threshold {
                    Some(d) => Stop::DistanceThreshold(d),
                    None => Stop::NClusters(c.n_clusters),
                };
                let tree = linkage_tree(&fm, c.linkage)?;
                self.output.put(
                    "dendrogram.json",
                    &formats::dendrogram_json(&tree, vocab.targets(), c.linkage.name()),
                )?;
                agglomerative(&fm, c.linkage, stop)?
            }
            ClusterMethod::KMeans => {
                let params = KMeansParams {
                    k: c.n_clusters,
                    seed: derive_seed(c.seed, &[SEED_KMEANS]),
                    restarts: c.kmeans_restarts,
                    max_iters: c.kmeans_max_iters,
                };
                kmeans_pp(&fm, &params)?.assignment
            }
        };
        self.output.put("clusters.tsv", &formats::clusters_tsv(vocab.targets(), &assignment))?;
        let score = if assignment.k >= 2 && assignment.k < fm.len() {
            Some(silhouette(&fm, &assignment)?)
        } else {
            None
        };
        let summary = serde_json::json!({
            "method": assignment.method.name(),
            "k": assignment.k,
            "sizes": assignment.sizes(),
            "silhouette": score,
        });
        let mut bytes = serde_json::to_vec_pretty(&summary).expect("summary serializes");
        bytes.push(b'\n');
        self.output.put("cluster_summary.json", &bytes)?;
        Ok(())
    }

    fn explain(&mut self) -> Result<()> {
        let c = self.config;
        let need = |v: &Option<String>, key: &str| {
            v.clone().ok_or_else(|| CliError::Usage(format!("explain needs `{key}`")))
        };
        let (word, l1, l2) = (need(&c.explain_word, "explain_word")?, need(&c.t1, "t1")?, need(&c.t2, "t2")?);
        let labels = self.periods()?;
        let vocab = self.vocab(&labels)?;
        let find = |l: &str| {
            labels
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| CliError::Usage(format!("unknown period `{l}`")))
        };
        let (t1, t2) = (find(&l1)?, find(&l2)?);
        let w = vocab.require_target(&word)?;
        let m1 = self.ppmi_matrix(t1)?;
        let m2 = self.ppmi_matrix(t2)?;
        let (gained_t1, gained_t2) = explain_both_directions(&m1, &m2, &vocab, w, c.top_k)?;
        self.output
            .put("explain.tsv", &formats::explain_tsv(&[&gained_t1, &gained_t2], &labels))?;
        Ok(())
    }

    fn heatmap(&mut self) -> Result<()> {
        if self.config.words.is_empty() {
            return Err(CliError::Usage("heatmap needs `words`".into()));
        }
        let labels = self.periods()?;
        let vocab = self.vocab(&labels)?;
        let mats = self.simmats(vocab.num_targets(), labels.len())?;
        for w in self.selected_words(&vocab)? {
            let word = vocab.target(w);
            let svg = render_svg(&mats[w], &labels, &format!("{word} ({})", self.config.metric))?;
            self.output.put(&format!("heatmaps/{}.svg", file_stem(word)), svg.as_bytes())?;
        }
        Ok(())
    }

    fn pseudo_gen(&mut self) -> Result<()> {
        let c = self.config;
        let corpus = self.corpus("corpus.tsv", "ingest")?;
        let vocab = build_vocab(&corpus, &VocabParams::new(c.pseudo_min_count))?;
        let params = BenchmarkParams {
            replicas: c.replicas,
            min_count: c.pseudo_min_count,
            options: ScheduleOptions {
                d1_increasing: c.d1_increasing,
                scale_spikes: c.scale_spikes,
            },
            seed: c.seed,
        };
        let specs = build_benchmark(&vocab, &params)?;
        let injected = inject_pseudowords(&corpus, &specs, c.sample_rate, derive_seed(c.seed, &[SEED_INJECT]))?;
        self.output.put("pseudo/specs.json", &formats::specs_json(&specs))?;
        self.output.put("pseudo/gold.tsv", &formats::gold_tsv(&specs))?;
        self.output.put("pseudo/corpus.tsv", &formats::corpus_tsv(&injected))?;
        Ok(())
    }

    fn eval_schemas(&mut self) -> Result<()> {
        let c = self.config;
        let (path, bytes) = self.input.get("pseudo/specs.json", "pseudo-gen")?;
        let specs = formats::parse_specs_json(&bytes, &path)?;
        let corpus = self.corpus("pseudo/corpus.tsv", "pseudo-gen")?;
        let eval = EvalConfig {
            min_count: c.pseudo_min_count,
            window: c.window,
            dim: c.dim,
            rsvd: RsvdParams {
                oversample: c.svd_oversample,
                power_iters: c.svd_power_iters,
                tol: c.svd_tol,
                max_iters: SVD_MAX_ITERS.max(c.svd_power_iters),
            },
            linkage: c.linkage,
            kmeans_restarts: c.kmeans_restarts,
            kmeans_max_iters: c.kmeans_max_iters,
            seed: derive_seed(c.seed, &[SEED_EVAL]),
        };
        let report = run_schema_eval(&corpus, &specs, &eval)?;
        self.output.put("eval/eval_grid.csv", &formats::eval_grid_csv(&report))?;
        self.output.put("eval/gold.tsv", &formats::gold_tsv(&specs))?;
        for r in &report.results {
            self.output.put(
                &format!("eval/confusion/{}.csv", r.config.id()),
                &formats::confusion_csv(&r.matching),
            )?;
        }
        Ok(())
    }

    fn synth(&mut self, opts: SynthOptions) -> Result<()> {
        let params = SynthParams {
            periods: opts.periods,
            docs_per_period: opts.docs_per_period,
            vocab_size: opts.vocab_size,
            topics: SynthParams::new(0).topics.min(opts.vocab_size),
            ..SynthParams::new(self.config.seed)
        };
        let corpus = generate(&params)?;
        self.output.put("synth_corpus.tsv", &formats::corpus_tsv(&corpus))?;
        Ok(())
    }
}

fn ppmi_path(t: usize) -> String {
    format!("ppmi/period_{t:03}.mtx")
}

