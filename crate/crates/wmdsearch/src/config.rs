//! Run configuration: a flat `key = value` file, overridden by flags.
//!
//! Recognised keys:
//!
//! | key | meaning |
//! |-----|---------|
//! | `corpus` | plain-text corpus file |
//! | `stoplist` | stop-word file (default: env `WMDSEARCH_STOPLIST`, else shipped list) |
//! | `paragraphs` | `newline` (default) or `blank` paragraph boundaries |
//! | `trials` | trial file for `eval` |
//! | `backends` | comma list of backends, `kind` or `kind@embedding` |
//! | `embedding`, `embedding.<name>` | embedding file (unnamed = `default`) |
//! | `embedding_format[.<name>]` | `word2vec`, `text`, `glove` or `vec` (default: from extension) |
//! | `ngrams[.<name>]` | n-gram vector file for out-of-vocabulary words |
//! | `ngram_min`, `ngram_max` | n-gram length bounds (3, 6) |
//! | `metric` | `cosine` (default) or `euclidean` |
//! | `k` | results per query (20) |
//! | `prefetch` | exact solves before pruning in `wmd_pruned` (40) |
//! | `lsa_k` | LSA latent dimension (300) |
//! | `pv_dim`, `pv_window`, `pv_negative`, `pv_epochs`, `pv_lr_start`, `pv_lr_end`, `pv_min_count` | paragraph-vector settings |
//! | `query_repr` | paragraph-vector query mapping: `inference` or `centroid` |
//! | `seed` | seed for every random choice (0) |
//! | `out` | output directory for `eval` reports |
//! | `jobs` | worker threads (default: available cores) |
//! | `format` | `table` (default) or `csv` |
//!
//! Relative paths in a file are resolved against the file's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use wmdsearch_core::lsa::LsaConfig;
use wmdsearch_core::pv::{PvConfig, QueryRepr};
use wmdsearch_core::retrieval::{BackendKind, BackendSpec, DEFAULT_K};
use wmdsearch_core::svd::SvdOptions;
use wmdsearch_core::text::ParagraphMode;
use wmdsearch_core::transport::GroundMetric;

use crate::error::{Error, Result};
use crate::formats::{read_to_string, EmbeddingFormat};
use crate::persist::{EmbeddingSource, NgramSource};

/// Name of the embedding referenced by bare `embedding = ...`.
pub const DEFAULT_EMBEDDING: &str = "default";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Table,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(OutputFormat::Table),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::Config(format!(
                "unknown output format {other:?} (expected table or csv)"
            ))),
        }
    }
}

/// One backend to run, optionally bound to a named embedding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackendEntry {
    pub kind: BackendKind,
    pub embedding: Option<String>,
}

impl BackendEntry {
    /// Report label: `kind`, or `kind@name` for a named embedding.
    pub fn label(&self) -> String {
        match &self.embedding {
            Some(name) if name != DEFAULT_EMBEDDING => format!("{}@{name}", self.kind),
            _ => self.kind.to_string(),
        }
    }

    /// The embedding this entry uses, if its kind needs one.
    pub fn embedding_name(&self) -> Option<&str> {
        self.kind
            .needs_embeddings()
            .then(|| self.embedding.as_deref().unwrap_or(DEFAULT_EMBEDDING))
    }
}

impl std::str::FromStr for BackendEntry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, embedding) = match s.split_once('@') {
            Some((k, e)) if !e.is_empty() => (k, Some(e.to_string())),
            Some(_) => return Err(Error::Config(format!("backend {s:?} names no embedding"))),
            None => (s, None),
        };
        let kind: BackendKind = kind.parse()?;
        if embedding.is_some() && !kind.needs_embeddings() {
            return Err(Error::Config(format!(
                "backend {kind} does not use embeddings"
            )));
        }
        Ok(Self { kind, embedding })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct EmbeddingEntry {
    path: Option<PathBuf>,
    format: Option<EmbeddingFormat>,
    ngrams: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub stoplist: Option<PathBuf>,
    pub paragraphs: ParagraphMode,
    pub trials: Option<PathBuf>,
    pub backends: Vec<BackendEntry>,
    embeddings: BTreeMap<String, EmbeddingEntry>,
    pub ngram_min: usize,
    pub ngram_max: usize,
    pub metric: GroundMetric,
    pub k: usize,
    pub prefetch: usize,
    pub lsa_k: usize,
    pub pv: PvConfig,
    pub query_repr: QueryRepr,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub jobs: usize,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            corpus: None,
            stoplist: None,
            paragraphs: ParagraphMode::default(),
            trials: None,
            backends: Vec::new(),
            embeddings: BTreeMap::new(),
            ngram_min: 3,
            ngram_max: 6,
            metric: GroundMetric::default(),
            k: DEFAULT_K,
            prefetch: 2 * DEFAULT_K,
            lsa_k: LsaConfig::default().k,
            pv: PvConfig::default(),
            query_repr: QueryRepr::default(),
            seed: 0,
            out: None,
            jobs: std::thread::available_parallelism().map_or(1, |n| n.get()),
            format: OutputFormat::default(),
        }
    }
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: invalid number {value:?}")))
}

fn positive(key: &str, value: &str) -> Result<usize> {
    match number::<usize>(key, value)? {
        0 => Err(Error::Config(format!("{key} must be at least 1"))),
        n => Ok(n),
    }
}

impl RunConfig {
    /// Reads a config file on top of the defaults.
    pub fn from_file(path: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.merge_file(path)?;
        Ok(cfg)
    }

    /// Applies every `key = value` line of `path`. Blank lines and lines
    /// starting with `#` are skipped; repeated or unknown keys are errors.
    pub fn merge_file(&mut self, path: &Path) -> Result<()> {
        let base = path.parent().unwrap_or(Path::new(""));
        let mut seen = std::collections::BTreeSet::new();
        for (n, line) in read_to_string(path)?.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let at = |msg: String| Error::format(path, n + 1, msg);
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| at(format!("expected key = value, found {line:?}")))?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(at(format!("key {key:?} given twice")));
            }
            self.set(key, value.trim(), base)
                .map_err(|e| at(e.to_string()))?;
        }
        Ok(())
    }

    /// Sets one key. Relative paths are joined onto `base`.
    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<()> {
        let path = || base.join(value);
        let (root, name) = match key.split_once('.') {
            Some((r, n)) if !n.is_empty() => (r, Some(n)),
            _ => (key, None),
        };
        let embedding_name = name.unwrap_or(DEFAULT_EMBEDDING).to_string();
        match (root, name) {
            ("embedding", _) => {
                self.embeddings.entry(embedding_name).or_default().path = Some(path())
            }
            ("embedding_format", _) => {
                self.embeddings.entry(embedding_name).or_default().format = Some(value.parse()?)
            }
            ("ngrams", _) => {
                self.embeddings.entry(embedding_name).or_default().ngrams = Some(path())
            }
            (_, Some(_)) => return Err(Error::Config(format!("unknown key {key:?}"))),
            ("corpus", None) => self.corpus = Some(path()),
            ("stoplist", None) => self.stoplist = Some(path()),
            ("trials", None) => self.trials = Some(path()),
            ("out", None) => self.out = Some(path()),
            ("paragraphs", None) => {
                self.paragraphs = match value {
                    "newline" => ParagraphMode::Newline,
                    "blank" | "blank_line" => ParagraphMode::BlankLine,
                    other => {
                        return Err(Error::Config(format!("paragraphs: unknown mode {other:?}")))
                    }
                }
            }
            ("backends", None) => {
                self.backends = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            ("ngram_min", None) => self.ngram_min = positive(key, value)?,
            ("ngram_max", None) => self.ngram_max = positive(key, value)?,
            ("metric", None) => self.metric = value.parse()?,
            ("k", None) => self.k = positive(key, value)?,
            ("prefetch", None) => self.prefetch = positive(key, value)?,
            ("lsa_k", None) => self.lsa_k = positive(key, value)?,
            ("pv_dim", None) => self.pv.dim = positive(key, value)?,
            ("pv_window", None) => self.pv.window = positive(key, value)?,
            ("pv_negative", None) => self.pv.negative = positive(key, value)?,
            ("pv_epochs", None) => self.pv.epochs = positive(key, value)?,
            ("pv_lr_start", None) => self.pv.lr_start = number(key, value)?,
            ("pv_lr_end", None) => self.pv.lr_end = number(key, value)?,
            ("pv_min_count", None) => self.pv.min_count = positive(key, value)?,
            ("query_repr", None) => self.query_repr = value.parse()?,
            ("seed", None) => self.seed = number(key, value)?,
            ("jobs", None) => self.jobs = positive(key, value)?,
            ("format", None) => self.format = value.parse()?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Resolved source for a named embedding.
    pub fn embedding(&self, name: &str) -> Result<EmbeddingSource> {
        let entry = self.embeddings.get(name);
        let path = entry
            .and_then(|e| e.path.clone())
            .ok_or_else(|| Error::Config(format!("no embedding file configured for {name:?}")))?;
        let entry = entry.expect("path came from it");
        Ok(EmbeddingSource {
            path,
            format: entry.format,
            ngrams: entry.ngrams.clone().map(|path| NgramSource {
                path,
                nmin: self.ngram_min,
                nmax: self.ngram_max,
            }),
        })
    }

    /// Names of all configured embeddings.
    pub fn embedding_names(&self) -> impl Iterator<Item = &str> {
        self.embeddings.keys().map(String::as_str)
    }

    /// The core backend settings for one entry.
    pub fn spec(&self, entry: &BackendEntry) -> BackendSpec {
        let mut spec = BackendSpec::new(entry.kind);
        spec.metric = self.metric;
        spec.embedding = entry
            .embedding_name()
            .and_then(|n| self.embedding(n).ok())
            .map(|s| s.path.to_string_lossy().into_owned());
        spec.lsa = LsaConfig {
            k: self.lsa_k,
            svd: SvdOptions {
                seed: self.seed,
                ..SvdOptions::default()
            },
        };
        spec.pv = PvConfig {
            mode: entry.kind.pv_mode().unwrap_or(self.pv.mode),
            seed: self.seed,
            ..self.pv
        };
        spec.query_repr = self.query_repr;
        spec.prefetch = self.prefetch;
        spec
    }

    /// Checks everything that does not need the filesystem.
    pub fn validate(&self) -> Result<()> {
        if self.ngram_min > self.ngram_max {
            return Err(Error::Config("ngram_min exceeds ngram_max".into()));
        }
        for (name, e) in &self.embeddings {
            if e.path.is_none() {
                return Err(Error::Config(format!(
                    "embedding {name:?} has settings but no file"
                )));
            }
        }
        for entry in &self.backends {
            if let Some(name) = entry.embedding_name() {
                self.embedding(name).map_err(|_| {
                    Error::Config(format!(
                        "backend {} needs embedding {name:?}",
                        entry.label()
                    ))
                })?;
            }
        }
        let mut labels: Vec<String> = self.backends.iter().map(BackendEntry::label).collect();
        labels.sort();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("backend {} listed twice", w[0])));
        }
        PvConfig {
            seed: self.seed,
            ..self.pv
        }
        .validate()?;
        Ok(())
    }
}

/// Fails unless the named path is set.
pub fn required<'a>(what: &str, value: &'a Option<PathBuf>) -> Result<&'a Path> {
    value
        .as_deref()
        .ok_or_else(|| Error::Config(format!("{what} is required")))
}
