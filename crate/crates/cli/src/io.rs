//! Corpus loading and hashed artifact output.

use std::fs;
use std::path::{Path, PathBuf};

use diachron_core::corpus::{CorpusBuilder, TimeSlicedCorpus};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::CorpusFormat;
use crate::{CliError, Result};

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Load a pre-tokenized corpus.
///
/// `Dir`: every subdirectory of `root` is a period named after the
/// directory; each non-blank line of each file inside it is a document.
/// `Tsv`: one `label<TAB>document` pair per line. `Auto` picks `Dir` for
/// directories and `Tsv` otherwise. Tokens are split on whitespace only.
pub fn load_corpus(root: &Path, format: CorpusFormat) -> Result<TimeSlicedCorpus> {
    let meta = fs::metadata(root).map_err(|e| CliError::io(root, e))?;
    let format = match format {
        CorpusFormat::Auto if meta.is_dir() => CorpusFormat::Dir,
        CorpusFormat::Auto => CorpusFormat::Tsv,
        f => f,
    };
    match format {
        CorpusFormat::Dir => load_dir(root),
        _ => parse_corpus_tsv(&read_to_string(root)?, root),
    }
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        out.push(entry.map_err(|e| CliError::io(dir, e))?.path());
    }
    out.sort();
    Ok(out)
}

fn load_dir(root: &Path) -> Result<TimeSlicedCorpus> {
    let mut builder = CorpusBuilder::new();
    for period_dir in sorted_entries(root)?.into_iter().filter(|p| p.is_dir()) {
        let label = period_dir
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| CliError::Usage(format!("{}: period directory name is not UTF-8", period_dir.display())))?
            .to_string();
        builder.declare_period(&label);
        for file in sorted_entries(&period_dir)?.into_iter().filter(|p| p.is_file()) {
            for line in read_to_string(&file)?.lines().filter(|l| !l.trim().is_empty()) {
                builder.add_line(&label, line);
            }
        }
    }
    Ok(builder.build()?)
}

/// Parse `label<TAB>document` lines. Blank lines are skipped; a line with an
/// empty document keeps an empty document.
pub fn parse_corpus_tsv(text: &str, path: &Path) -> Result<TimeSlicedCorpus> {
    let mut builder = CorpusBuilder::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (label, doc) = line.split_once('\t').ok_or_else(|| CliError::Format {
            path: path.to_path_buf(),
            line: i + 1,
            message: "expected `label<TAB>document`".into(),
        })?;
        builder.add_line(label, doc);
    }
    Ok(builder.build()?)
}

/// One written file, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Writes files under one directory and remembers their hashes.
#[derive(Debug)]
pub struct ArtifactWriter {
    root: PathBuf,
    records: Vec<ArtifactRecord>,
}

impl ArtifactWriter {
    pub fn new(root: &Path) -> Self {
        Self {
            root: root.to_path_buf(),
            records: Vec::new(),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Write `bytes` to `root/rel` through a temporary file and record its hash.
    pub fn put(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        let tmp = path.with_extension("partial");
        fs::write(&tmp, bytes).map_err(|e| CliError::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| CliError::io(&path, e))?;
        self.records.retain(|r| r.path != rel);
        self.records.push(ArtifactRecord {
            path: rel.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    pub fn into_records(mut self) -> Vec<ArtifactRecord> {
        self.records.sort_by(|a, b| a.path.cmp(&b.path));
        self.records
    }
}

/// Reads upstream artifacts and remembers their hashes.
#[derive(Debug)]
pub struct ArtifactReader {
    root: PathBuf,
    records: Vec<ArtifactRecord>,
}

impl ArtifactReader {
    pub fn new(root: &Path) -> Self {
        Self {
            root: root.to_path_buf(),
            records: Vec::new(),
        }
    }

    /// Read `root/rel`; a missing file names the subcommand that produces it.
    pub fn get(&mut self, rel: &str, producer: &'static str) -> Result<(PathBuf, Vec<u8>)> {
        let path = self.root.join(rel);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(CliError::MissingArtifact { path, producer });
            }
            Err(e) => return Err(CliError::io(path, e)),
        };
        if !self.records.iter().any(|r| r.path == rel) {
            self.records.push(ArtifactRecord {
                path: rel.to_string(),
                sha256: sha256_hex(&bytes),
                bytes: bytes.len() as u64,
            });
        }
        Ok((path, bytes))
    }

    /// Like [`get`](Self::get) for UTF-8 text.
    pub fn text(&mut self, rel: &str, producer: &'static str) -> Result<(PathBuf, String)> {
        let (path, bytes) = self.get(rel, producer)?;
        let text = String::from_utf8(bytes).map_err(|_| CliError::Format {
            path: path.clone(),
            line: 0,
            message: "not valid UTF-8".into(),
        })?;
        Ok((path, text))
    }

    pub fn into_records(mut self) -> Vec<ArtifactRecord> {
        self.records.sort_by(|a, b| a.path.cmp(&b.path));
        self.records
    }
}

/// File-name-safe form of a word: bytes outside `[A-Za-z0-9._-]` become `%XX`.
pub fn file_stem(word: &str) -> String {
    let mut out = String::with_capacity(word.len());
    for b in word.bytes() {
        if b.is_ascii_alphanumeric() || matches!(b, b'_' | b'-') || (b == b'.' && !out.is_empty()) {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}
