//! Text and binary encodings of pipeline artifacts.
//!
//! Floats in text files use Rust's shortest round-trip representation, so
//! parsing a written file gives back the exact values.

use std::fmt::Write as _;
use std::path::Path;

use diachron_core::cluster::{ClusterAssignment, Dendrogram, FeatureMatrix, LabelMatching};
use diachron_core::cooc::PpmiMatrix;
use diachron_core::corpus::{TimeSlicedCorpus, Vocabulary};
use diachron_core::embed::EmbeddingTensor;
use diachron_core::explain::ShiftExplanation;
use diachron_core::pseudo::{EvalReport, PseudoWordSpec, Schema};
use diachron_core::simmat::{Metric, SimilarityMatrix};
use diachron_core::sparse::CsrMatrix;

use crate::{CliError, Result};

fn format_err(path: &Path, line: usize, message: impl Into<String>) -> CliError {
    CliError::Format {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_field<T: std::str::FromStr>(s: &str, path: &Path, line: usize, what: &str) -> Result<T> {
    s.parse().map_err(|_| format_err(path, line, format!("invalid {what} `{s}`")))
}

// ---- corpus -------------------------------------------------------------

/// One `label<TAB>document` line per document, in period order.
pub fn corpus_tsv(corpus: &TimeSlicedCorpus) -> Vec<u8> {
    let symbols = corpus.symbols();
    let mut out = String::new();
    for (label, period) in corpus.labels().iter().zip(corpus.periods()) {
        for doc in period.documents() {
            out.push_str(label);
            out.push('\t');
            for (i, &tok) in doc.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                out.push_str(symbols.word(tok));
            }
            out.push('\n');
        }
    }
    out.into_bytes()
}

pub fn periods_txt(labels: &[String]) -> Vec<u8> {
    let mut out = String::new();
    for l in labels {
        out.push_str(l);
        out.push('\n');
    }
    out.into_bytes()
}

pub fn parse_periods(text: &str) -> Vec<String> {
    text.lines().filter(|l| !l.is_empty()).map(str::to_string).collect()
}

// ---- vocabulary ---------------------------------------------------------

fn word_table(labels: &[String], words: &[String], count: impl Fn(usize, usize) -> u64) -> Vec<u8> {
    let mut out = String::from("word\tindex");
    for l in labels {
        out.push('\t');
        out.push_str(l);
    }
    out.push('\n');
    for (i, w) in words.iter().enumerate() {
        write!(out, "{w}\t{i}").unwrap();
        for t in 0..labels.len() {
            write!(out, "\t{}", count(t, i)).unwrap();
        }
        out.push('\n');
    }
    out.into_bytes()
}

/// `vocab.tsv`: targets with per-period counts.
pub fn vocab_tsv(vocab: &Vocabulary, labels: &[String]) -> Vec<u8> {
    word_table(labels, vocab.targets(), |t, w| vocab.count(t, w))
}

/// `contexts.tsv`: context words with per-period counts.
pub fn contexts_tsv(vocab: &Vocabulary, labels: &[String]) -> Vec<u8> {
    word_table(labels, vocab.contexts(), |t, c| vocab.context_count(t, c))
}

/// Parse a word table into words and row-major `T x len` counts.
fn parse_word_table(text: &str, path: &Path, labels: &[String]) -> Result<(Vec<String>, Vec<u64>)> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split('\t').collect();
    if header.len() != labels.len() + 2 || header[0] != "word" || header[1] != "index" || header[2..] != *labels {
        return Err(format_err(path, 1, "header does not match periods.txt"));
    }
    let mut words = Vec::new();
    let mut by_word: Vec<Vec<u64>> = Vec::new();
    for (i, line) in lines.enumerate() {
        let n = i + 2;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != labels.len() + 2 {
            return Err(format_err(path, n, format!("expected {} columns", labels.len() + 2)));
        }
        if parse_field::<usize>(fields[1], path, n, "index")? != words.len() {
            return Err(format_err(path, n, "indices must be 0, 1, 2, ..."));
        }
        words.push(fields[0].to_string());
        by_word.push(
            fields[2..]
                .iter()
                .map(|f| parse_field(f, path, n, "count"))
                .collect::<Result<_>>()?,
        );
    }
    let counts = (0..labels.len()).flat_map(|t| by_word.iter().map(move |row| row[t])).collect();
    Ok((words, counts))
}

pub fn parse_vocab(
    vocab_text: &str,
    vocab_path: &Path,
    contexts_text: &str,
    contexts_path: &Path,
    labels: &[String],
) -> Result<Vocabulary> {
    let (targets, target_counts) = parse_word_table(vocab_text, vocab_path, labels)?;
    let (contexts, context_counts) = parse_word_table(contexts_text, contexts_path, labels)?;
    Ok(Vocabulary::from_parts(
        targets,
        contexts,
        labels.len(),
        target_counts,
        context_counts,
    )?)
}

// ---- PPMI ---------------------------------------------------------------

/// MatrixMarket coordinate file with 1-based indices.
pub fn ppmi_mtx(m: &PpmiMatrix, label: &str) -> Vec<u8> {
    let mut out = String::from("%%MatrixMarket matrix coordinate real general\n");
    writeln!(out, "% period {label}").unwrap();
    writeln!(out, "{} {} {}", m.num_targets(), m.num_contexts(), m.values.nnz()).unwrap();
    for (r, c, v) in m.values.iter() {
        writeln!(out, "{} {} {v}", r + 1, c + 1).unwrap();
    }
    out.into_bytes()
}

pub fn parse_ppmi_mtx(text: &str, path: &Path, period: usize) -> Result<PpmiMatrix> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.starts_with('%'));
    let (n, size) = lines.next().ok_or_else(|| format_err(path, 1, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|f| parse_field(f, path, n + 1, "size"))
        .collect::<Result<_>>()?;
    let [rows, cols, nnz] = dims[..] else {
        return Err(format_err(path, n + 1, "size line needs `rows cols nnz`"));
    };
    let mut triplets = Vec::with_capacity(nnz);
    for (n, line) in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(format_err(path, n + 1, "entry needs `row col value`"));
        }
        let r: usize = parse_field(f[0], path, n + 1, "row")?;
        let c: usize = parse_field(f[1], path, n + 1, "column")?;
        if r == 0 || r > rows || c == 0 || c > cols {
            return Err(format_err(path, n + 1, "index out of range"));
        }
        triplets.push(((r - 1) as u32, (c - 1) as u32, parse_field::<f64>(f[2], path, n + 1, "value")?));
    }
    if triplets.len() != nnz {
        return Err(format_err(path, 0, format!("{} entries, header says {nnz}", triplets.len())));
    }
    Ok(PpmiMatrix::new(period, CsrMatrix::from_triplets(rows, cols, triplets)?)?)
}

// ---- binary tensors -----------------------------------------------------

const EMBED_MAGIC: &[u8; 8] = b"DIAEMBD\0";
const SIMMAT_MAGIC: &[u8; 8] = b"DIASIMM\0";
const VERSION: u64 = 1;

fn push_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

struct Cursor<'a> {
    bytes: &'a [u8],
    path: &'a Path,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.bytes.len() < n {
            return Err(format_err(self.path, 0, "file is truncated"));
        }
        let (head, rest) = self.bytes.split_at(n);
        self.bytes = rest;
        Ok(head)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn header(&mut self, magic: &[u8; 8]) -> Result<()> {
        if self.take(8)? != magic {
            return Err(format_err(self.path, 0, "wrong file type"));
        }
        let v = self.u64()?;
        if v != VERSION {
            return Err(format_err(self.path, 0, format!("unsupported version {v}")));
        }
        Ok(())
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n.checked_mul(8).ok_or_else(|| format_err(self.path, 0, "size overflow"))?)?;
        let out = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        if !self.bytes.is_empty() {
            return Err(format_err(self.path, 0, "trailing bytes"));
        }
        Ok(out)
    }
}

/// Magic, version, `T`, `W`, `D` as little-endian `u64`, then `T*W*D`
/// little-endian `f64` values in `[t][w][d]` order.
pub fn embeddings_bin(e: &EmbeddingTensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(40 + e.values().len() * 8);
    out.extend_from_slice(EMBED_MAGIC);
    push_u64(&mut out, VERSION);
    for v in [e.num_periods(), e.num_words(), e.dim()] {
        push_u64(&mut out, v as u64);
    }
    for v in e.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn parse_embeddings_bin(bytes: &[u8], path: &Path) -> Result<EmbeddingTensor> {
    let mut c = Cursor { bytes, path };
    c.header(EMBED_MAGIC)?;
    let (t, w, d) = (c.u64()? as usize, c.u64()? as usize, c.u64()? as usize);
    let values = c.f64s(t * w * d)?;
    Ok(EmbeddingTensor::new(t, w, d, values)?)
}

/// Magic, version, metric (0 cosine, 1 euclidean), `T`, `W` as `u64`, then
/// `W` row-major `T x T` blocks of `f64`.
pub fn simmat_bin(mats: &[SimilarityMatrix], metric: Metric, periods: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(48 + mats.len() * periods * periods * 8);
    out.extend_from_slice(SIMMAT_MAGIC);
    push_u64(&mut out, VERSION);
    push_u64(&mut out, (metric == Metric::Euclidean) as u64);
    push_u64(&mut out, periods as u64);
    push_u64(&mut out, mats.len() as u64);
    for m in mats {
        for v in m.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn parse_simmat_bin(bytes: &[u8], path: &Path) -> Result<(Metric, Vec<SimilarityMatrix>)> {
    let mut c = Cursor { bytes, path };
    c.header(SIMMAT_MAGIC)?;
    let metric = match c.u64()? {
        0 => Metric::Cosine,
        1 => Metric::Euclidean,
        m => return Err(format_err(path, 0, format!("unknown metric code {m}"))),
    };
    let (t, w) = (c.u64()? as usize, c.u64()? as usize);
    let values = c.f64s(t * t * w)?;
    let mats = values
        .chunks_exact((t * t).max(1))
        .take(w)
        .enumerate()
        .map(|(i, block)| SimilarityMatrix::from_values(i, metric, t, block.to_vec()))
        .collect::<diachron_core::Result<_>>()?;
    Ok((metric, mats))
}

// ---- CSV / TSV exports --------------------------------------------------

/// `T x T` matrix with period labels on both axes.
pub fn simmat_csv(m: &SimilarityMatrix, labels: &[String]) -> Vec<u8> {
    let mut out = String::from("period");
    for l in labels {
        write!(out, ",{l}").unwrap();
    }
    out.push('\n');
    for (i, l) in labels.iter().enumerate() {
        out.push_str(l);
        for v in m.row(i) {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    out.into_bytes()
}

pub fn features_csv(fm: &FeatureMatrix) -> Vec<u8> {
    let mut out = String::from("word");
    for j in 0..fm.num_features() {
        write!(out, ",f{j}").unwrap();
    }
    out.push('\n');
    for (i, w) in fm.labels().iter().enumerate() {
        out.push_str(w);
        for v in fm.row(i) {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    out.into_bytes()
}

pub fn clusters_tsv(words: &[String], ca: &ClusterAssignment) -> Vec<u8> {
    let mut out = String::from("word\tcluster\n");
    for (w, l) in words.iter().zip(&ca.labels) {
        writeln!(out, "{w}\t{l}").unwrap();
    }
    out.into_bytes()
}

pub fn dendrogram_json(d: &Dendrogram, words: &[String], linkage: &str) -> Vec<u8> {
    let value = serde_json::json!({
        "n": d.n,
        "linkage": linkage,
        "labels": words,
        "merges": d.merges,
    });
    let mut out = serde_json::to_vec_pretty(&value).expect("dendrogram serializes");
    out.push(b'\n');
    out
}

/// Both directions of an explanation as
/// `word, t1_label, t2_label, rank, context, delta_ppmi` rows.
pub fn explain_tsv(explanations: &[&ShiftExplanation], labels: &[String]) -> Vec<u8> {
    let mut out = String::from("word\tt1_label\tt2_label\trank\tcontext\tdelta_ppmi\n");
    for e in explanations {
        for (rank, r) in e.ranked.iter().enumerate() {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                e.word,
                labels[e.t1],
                labels[e.t2],
                rank + 1,
                r.context,
                r.delta
            )
            .unwrap();
        }
    }
    out.into_bytes()
}

// ---- pseudowords --------------------------------------------------------

pub fn specs_json(specs: &[PseudoWordSpec]) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(specs).expect("specs serialize");
    out.push(b'\n');
    out
}

pub fn parse_specs_json(bytes: &[u8], path: &Path) -> Result<Vec<PseudoWordSpec>> {
    let specs: Vec<PseudoWordSpec> = serde_json::from_slice(bytes).map_err(|e| format_err(path, e.line(), e.to_string()))?;
    for s in &specs {
        s.schedule.validate()?;
    }
    Ok(specs)
}

pub fn gold_tsv(specs: &[PseudoWordSpec]) -> Vec<u8> {
    let mut out = String::from("pseudo_token\tschema\n");
    for s in specs {
        writeln!(out, "{}\t{}", s.pseudo_token, s.schema).unwrap();
    }
    out.into_bytes()
}

/// One row per grid configuration.
pub fn eval_grid_csv(report: &EvalReport) -> Vec<u8> {
    let mut out = String::from("config,metric,features,method,standardized,accuracy,matched,total\n");
    for r in &report.results {
        let c = r.config;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            c.id(),
            c.metric,
            c.mode,
            c.method,
            c.standardized,
            r.accuracy(),
            r.matching.matched,
            report.gold.len()
        )
        .unwrap();
    }
    out.into_bytes()
}

/// Rows are gold schemas; column `j` counts members of the cluster matched to schema `j`.
pub fn confusion_csv(m: &LabelMatching) -> Vec<u8> {
    let mut out = String::from("gold");
    for s in Schema::ALL {
        write!(out, ",{s}").unwrap();
    }
    out.push('\n');
    for (s, row) in Schema::ALL.iter().zip(&m.confusion) {
        write!(out, "{s}").unwrap();
        for v in row {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    out.into_bytes()
}
