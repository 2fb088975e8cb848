//! File-backed index building, reopening and evaluation.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use wmdsearch_core::embedding::Embeddings;
use wmdsearch_core::eval::{
    query_outcome, render_csv, render_ranks_csv, render_table, QueryOutcome, RankingReport,
    TrialSet,
};
use wmdsearch_core::retrieval::{Backend, BackendSpec, Index};
use wmdsearch_core::text::{query_tokens, Statement, StopwordSet};

use crate::config::{required, OutputFormat, RunConfig};
use crate::error::{Error, Result};
use crate::formats::{load_embeddings, load_ngrams};
use crate::inputs::{load_corpus, load_stoplist, load_trials, needed_vocabulary};
use crate::persist::{EmbeddingSource, IndexFile, StoredModel};

/// Loads word vectors, keeping only `vocab` when given. N-gram vectors, if
/// configured, are loaded whole since any unseen word may need them.
pub fn load_source(
    source: &EmbeddingSource,
    vocab: Option<&BTreeSet<String>>,
) -> Result<Embeddings> {
    let (table, report) = load_embeddings(&source.path, source.format, vocab)?;
    log::info!(
        "{}: kept {} of {} vectors (dim {})",
        source.path.display(),
        table.len(),
        report.entries,
        table.dim()
    );
    let ngrams = source
        .ngrams
        .as_ref()
        .map(|n| load_ngrams(&n.path, n.nmin, n.nmax))
        .transpose()?;
    Ok(Embeddings::new(table, ngrams)?)
}

/// Builds an index, loading embeddings for the kinds that need them.
pub fn build_index(
    corpus: &[Statement],
    spec: &BackendSpec,
    stops: &StopwordSet,
    source: Option<&EmbeddingSource>,
    vocab: Option<&BTreeSet<String>>,
) -> Result<Index> {
    let embeddings = match (spec.kind.needs_embeddings(), source) {
        (true, Some(s)) => Some(load_source(s, vocab)?),
        (true, None) => {
            return Err(Error::Config(format!(
                "backend {} needs an embedding file",
                spec.kind
            )));
        }
        (false, _) => None,
    };
    Ok(Index::build(corpus, spec, stops.clone(), embeddings)?)
}

/// The on-disk form of a built index.
pub fn index_file(
    index: &Index,
    statements: &[Statement],
    source: Option<&EmbeddingSource>,
) -> IndexFile {
    IndexFile {
        spec: index.spec().clone(),
        source: source
            .filter(|_| index.spec().kind.needs_embeddings())
            .cloned(),
        stops: index.stopwords().clone(),
        statements: statements.to_vec(),
        model: StoredModel::of(index),
    }
}

/// Reopens a saved index. Embedding backends reload their vectors (from
/// `source` if given, else the recorded file) for the statement tokens and
/// the tokens of `queries`.
pub fn open_index(
    file: &IndexFile,
    source: Option<&EmbeddingSource>,
    queries: &[&str],
) -> Result<Index> {
    let backend = match &file.model {
        StoredModel::Lsa(m) => Some(Backend::Lsa(m.clone())),
        StoredModel::Pv(m) => Some(Backend::Pv(m.clone())),
        StoredModel::None => None,
    };
    if let Some(backend) = backend {
        return Ok(Index::from_backend(
            file.spec.clone(),
            file.stops.clone(),
            None,
            backend,
        )?);
    }
    let source = source.or(file.source.as_ref());
    let mut vocab: BTreeSet<String> = file
        .statements
        .iter()
        .flat_map(|s| s.tokens.iter().cloned())
        .collect();
    for q in queries {
        vocab.extend(query_tokens(q, &file.stops));
    }
    build_index(
        &file.statements,
        &file.spec,
        &file.stops,
        source,
        Some(&vocab),
    )
}

/// Runs every query of `trials` against `index` on up to `jobs` threads.
/// Outcomes are assembled in trial order, so the report does not depend on
/// scheduling.
pub fn evaluate_parallel(
    label: &str,
    index: &Index,
    trials: &TrialSet,
    jobs: usize,
) -> RankingReport {
    let work: Vec<(usize, usize)> = trials
        .trials
        .iter()
        .enumerate()
        .flat_map(|(t, trial)| (0..trial.queries.len()).map(move |q| (t, q)))
        .collect();
    let slots: Vec<Mutex<Option<QueryOutcome>>> = work.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = jobs.clamp(1, work.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(t, q)) = work.get(i) else { break };
                let outcome = query_outcome(index, &trials.trials[t], q);
                *slots[i]
                    .lock()
                    .expect("no worker panics while holding a slot") = Some(outcome);
            });
        }
    });
    let outcomes = slots
        .into_iter()
        .map(|s| {
            s.into_inner()
                .expect("slot lock")
                .expect("every slot filled")
        })
        .collect();
    RankingReport::from_outcomes(label, outcomes)
}

/// Reports of one evaluation run plus their rendered forms.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalOutput {
    pub reports: Vec<RankingReport>,
    pub queries: usize,
    pub trials: usize,
}

impl EvalOutput {
    pub fn csv(&self) -> String {
        render_csv(&self.reports)
    }

    pub fn table(&self) -> String {
        render_table(&self.reports)
    }

    pub fn ranks_csv(&self) -> String {
        render_ranks_csv(&self.reports)
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Table => self.table(),
            OutputFormat::Csv => self.csv(),
        }
    }

    /// Writes `report.csv`, `report.txt` and `ranks.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, body) in [
            ("report.csv", self.csv()),
            ("report.txt", self.table()),
            ("ranks.csv", self.ranks_csv()),
        ] {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

/// Loads every input named by `cfg`, builds each backend and scores every
/// trial query. A backend that cannot be built is reported as failed and
/// the run continues.
pub fn run_eval(cfg: &RunConfig) -> Result<EvalOutput> {
    cfg.validate()?;
    let corpus_path = required("corpus", &cfg.corpus)?;
    let trials_path = required("trials", &cfg.trials)?;
    if cfg.backends.is_empty() {
        return Err(Error::Config("backends is required".into()));
    }
    let stops = load_stoplist(cfg.stoplist.as_deref())?;
    let corpus = load_corpus(corpus_path, &stops, cfg.paragraphs)?;
    let trials = load_trials(trials_path, &corpus)?;
    let vocab = needed_vocabulary(&corpus, Some(&trials), &stops);

    let mut loaded: BTreeMap<String, std::result::Result<Embeddings, String>> = BTreeMap::new();
    let mut reports = Vec::with_capacity(cfg.backends.len());
    for entry in &cfg.backends {
        let label = entry.label();
        let spec = cfg.spec(entry);
        let embeddings = match entry.embedding_name() {
            Some(name) => {
                let slot = loaded.entry(name.to_string()).or_insert_with(|| {
                    cfg.embedding(name)
                        .and_then(|s| load_source(&s, Some(&vocab)))
                        .map_err(|e| e.to_string())
                });
                match slot {
                    Ok(e) => Some(e.clone()),
                    Err(msg) => {
                        log::error!("{label}: {msg}");
                        reports.push(RankingReport::failed(label, msg.clone()));
                        continue;
                    }
                }
            }
            None => None,
        };
        log::info!("building {label}");
        let report = match Index::build(&corpus, &spec, stops.clone(), embeddings) {
            Ok(index) => evaluate_parallel(&label, &index, &trials, cfg.jobs),
            Err(e) => {
                log::error!("{label}: {e}");
                RankingReport::failed(label, e.to_string())
            }
        };
        reports.push(report);
    }
    Ok(EvalOutput {
        reports,
        queries: trials.total_queries(),
        trials: trials.len(),
    })
}
