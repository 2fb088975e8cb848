//! Corpus, stoplist and trial files.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use wmdsearch_core::eval::{parse_trials, resolve_trials, TrialSet};
use wmdsearch_core::text::{
    default_stopwords, ingest, query_tokens, ParagraphMode, Statement, StopwordSet,
};

use crate::error::{Error, Result};
use crate::formats::read_to_string;

/// Environment variable naming a stoplist to use instead of the shipped one.
pub const STOPLIST_ENV: &str = "WMDSEARCH_STOPLIST";

/// Where the stoplist comes from: an explicit path, else the environment
/// variable, else the list shipped with the library.
pub fn stoplist_source(explicit: Option<&Path>) -> Option<PathBuf> {
    explicit.map(Path::to_path_buf).or_else(|| {
        std::env::var_os(STOPLIST_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
    })
}

pub fn load_stoplist(explicit: Option<&Path>) -> Result<StopwordSet> {
    match stoplist_source(explicit) {
        Some(path) => Ok(StopwordSet::parse(&read_to_string(&path)?)),
        None => Ok(default_stopwords()),
    }
}

/// Reads a plain-text corpus and turns it into tokenized statements.
pub fn load_corpus(
    path: &Path,
    stops: &StopwordSet,
    mode: ParagraphMode,
) -> Result<Vec<Statement>> {
    let statements = ingest(&read_to_string(path)?, stops, mode);
    if statements.is_empty() {
        return Err(Error::format(path, 0, "corpus has no statements"));
    }
    Ok(statements)
}

/// Reads a trial file and resolves every target against `corpus`.
pub fn load_trials(path: &Path, corpus: &[Statement]) -> Result<TrialSet> {
    let wrap = |e: wmdsearch_core::Error| Error::format(path, 0, e.to_string());
    let specs = parse_trials(&read_to_string(path)?).map_err(wrap)?;
    resolve_trials(specs, corpus).map_err(wrap)
}

/// Every token an embedding table must cover for `corpus` and `trials`.
pub fn needed_vocabulary(
    corpus: &[Statement],
    trials: Option<&TrialSet>,
    stops: &StopwordSet,
) -> BTreeSet<String> {
    let mut vocab: BTreeSet<String> = corpus
        .iter()
        .flat_map(|s| s.tokens.iter().cloned())
        .collect();
    for trial in trials.into_iter().flat_map(|t| &t.trials) {
        for q in &trial.queries {
            vocab.extend(query_tokens(q, stops));
        }
    }
    vocab
}
