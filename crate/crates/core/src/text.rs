//! Text normalization, paragraph segmentation and tokenization.
//!
//! Every backend consumes the same token streams, so all of them go
//! through [`ingest`] for the corpus and [`query_tokens`] for queries.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use unicode_general_category::{get_general_category, GeneralCategory};

/// The stoplist shipped with the crate.
pub const DEFAULT_STOPLIST: &str = include_str!("../data/stopwords-en.txt");

/// A corpus paragraph: the unit that gets ranked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub id: usize,
    pub raw: String,
    pub tokens: Vec<String>,
}

impl Statement {
    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopwordSet {
    words: BTreeSet<String>,
}

impl StopwordSet {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            words: words
                .into_iter()
                .map(|w| w.as_ref().trim().to_lowercase())
                .filter(|w| !w.is_empty())
                .collect(),
        }
    }

    /// Parses the one-word-per-line stoplist format; `#` starts a comment line.
    pub fn parse(contents: &str) -> Self {
        Self::new(
            contents
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

/// The shipped English stoplist.
pub fn default_stopwords() -> StopwordSet {
    StopwordSet::parse(DEFAULT_STOPLIST)
}

/// How paragraph boundaries are recognised.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ParagraphMode {
    /// Any run of newline characters ends a paragraph.
    #[default]
    Newline,
    /// Only blank (whitespace-only) lines end a paragraph.
    BlankLine,
}

/// Lowercases cased letters and changes nothing else.
pub fn normalize_text(raw: &str) -> String {
    raw.to_lowercase()
}

/// Splits raw text into statements, numbering them in document order.
///
/// Whitespace-only segments are discarded. Returned statements carry no
/// tokens yet; see [`ingest`].
pub fn segment_paragraphs(raw: &str, mode: ParagraphMode) -> Vec<Statement> {
    let segments: Vec<String> = match mode {
        ParagraphMode::Newline => raw
            .split(['\n', '\r'])
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(ToString::to_string)
            .collect(),
        ParagraphMode::BlankLine => {
            let mut out = Vec::new();
            let mut current: Vec<&str> = Vec::new();
            for line in raw.lines() {
                let line = line.trim();
                if line.is_empty() {
                    if !current.is_empty() {
                        out.push(current.join("\n"));
                        current.clear();
                    }
                } else {
                    current.push(line);
                }
            }
            if !current.is_empty() {
                out.push(current.join("\n"));
            }
            out
        }
    };
    segments
        .into_iter()
        .enumerate()
        .map(|(id, raw)| Statement {
            id,
            raw,
            tokens: Vec::new(),
        })
        .collect()
}

fn is_punctuation(c: char) -> bool {
    matches!(
        get_general_category(c),
        GeneralCategory::ConnectorPunctuation
            | GeneralCategory::DashPunctuation
            | GeneralCategory::OpenPunctuation
            | GeneralCategory::ClosePunctuation
            | GeneralCategory::InitialPunctuation
            | GeneralCategory::FinalPunctuation
            | GeneralCategory::OtherPunctuation
    )
}

/// Splits on whitespace, trims punctuation from token edges and drops
/// stop words. Interior punctuation and currency symbols survive, so
/// `£31.4` stays one token. No stemming.
pub fn tokenize(raw: &str, stops: &StopwordSet) -> Vec<String> {
    raw.split_whitespace()
        .filter_map(|word| {
            let word = word.trim_matches(is_punctuation);
            if word.is_empty() {
                return None;
            }
            let word = word.to_lowercase();
            (!stops.contains(&word)).then_some(word)
        })
        .collect()
}

/// Normalizes and tokenizes a query with the shared pipeline.
pub fn query_tokens(raw: &str, stops: &StopwordSet) -> Vec<String> {
    tokenize(&normalize_text(raw), stops)
}

/// Segments a corpus and tokenizes every statement.
pub fn ingest(raw: &str, stops: &StopwordSet, mode: ParagraphMode) -> Vec<Statement> {
    let mut statements = segment_paragraphs(raw, mode);
    for s in &mut statements {
        s.tokens = query_tokens(&s.raw, stops);
    }
    statements
}
