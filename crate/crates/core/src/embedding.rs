//! In-memory word-vector tables and subword synthesis for
//! out-of-vocabulary tokens.

use alloc::borrow::Cow;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Token to dense `f32` vector map with a fixed dimension.
///
/// Rows are stored contiguously in insertion order. Duplicate tokens keep
/// the first row.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    index: BTreeMap<String, usize>,
    tokens: Vec<String>,
    data: Vec<f32>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "embedding dimension must be positive".into(),
            ));
        }
        Ok(Self {
            dim,
            index: BTreeMap::new(),
            tokens: Vec::new(),
            data: Vec::new(),
        })
    }

    /// Builds a table from `(token, vector)` pairs; later duplicates are ignored.
    pub fn from_rows<I, S>(dim: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f32>)>,
        S: Into<String>,
    {
        let mut table = Self::new(dim)?;
        for (token, vector) in rows {
            table.push(token, &vector)?;
        }
        Ok(table)
    }

    /// Appends a row. Returns `Ok(false)` when the token is already present
    /// (the existing row is kept).
    pub fn push(&mut self, token: impl Into<String>, vector: &[f32]) -> Result<bool> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: vector.len(),
            });
        }
        let token = token.into();
        if self.index.contains_key(&token) {
            return Ok(false);
        }
        self.index.insert(token.clone(), self.tokens.len());
        self.tokens.push(token);
        self.data.extend_from_slice(vector);
        Ok(true)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn get(&self, token: &str) -> Option<&[f32]> {
        self.index_of(token).map(|i| self.row(i))
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Tokens in row order.
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f32])> {
        self.tokens
            .iter()
            .zip(self.data.chunks_exact(self.dim))
            .map(|(t, v)| (t.as_str(), v))
    }
}

/// Character n-gram vectors used to synthesize vectors for unseen words.
#[derive(Debug, Clone, PartialEq)]
pub struct NgramTable {
    nmin: usize,
    nmax: usize,
    vectors: EmbeddingTable,
}

impl NgramTable {
    /// Wraps a table keyed by n-gram strings. Every key must be between
    /// `nmin` and `nmax` characters long, boundary markers included.
    pub fn new(nmin: usize, nmax: usize, vectors: EmbeddingTable) -> Result<Self> {
        check_bounds(nmin, nmax)?;
        if let Some(bad) = vectors.tokens().iter().find(|k| {
            let n = k.chars().count();
            n < nmin || n > nmax
        }) {
            return Err(Error::InvalidArgument(format!(
                "n-gram {bad:?} outside length bounds {nmin}..={nmax}"
            )));
        }
        Ok(Self {
            nmin,
            nmax,
            vectors,
        })
    }

    pub fn nmin(&self) -> usize {
        self.nmin
    }

    pub fn nmax(&self) -> usize {
        self.nmax
    }

    pub fn dim(&self) -> usize {
        self.vectors.dim()
    }

    pub fn vectors(&self) -> &EmbeddingTable {
        &self.vectors
    }

    /// Sum of the known n-gram vectors of `token`, or `None` if none is known.
    pub fn synthesize(&self, token: &str) -> Option<Vec<f32>> {
        let mut sum = alloc::vec![0f32; self.dim()];
        let mut found = false;
        for gram in extract_ngrams(token, self.nmin, self.nmax) {
            if let Some(v) = self.vectors.get(&gram) {
                found = true;
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += x;
                }
            }
        }
        found.then_some(sum)
    }
}

fn check_bounds(nmin: usize, nmax: usize) -> Result<()> {
    if nmin == 0 || nmin > nmax {
        return Err(Error::InvalidArgument(format!(
            "invalid n-gram bounds {nmin}..={nmax}"
        )));
    }
    Ok(())
}

/// Character n-grams of `<token>` with lengths `nmin..=nmax`, ordered by
/// start position and then by length. The whole wrapped word is included
/// when it fits within `nmax`.
pub fn extract_ngrams(token: &str, nmin: usize, nmax: usize) -> Vec<String> {
    let wrapped: Vec<char> = core::iter::once('<')
        .chain(token.chars())
        .chain(core::iter::once('>'))
        .collect();
    let mut grams = Vec::new();
    for start in 0..wrapped.len() {
        for n in nmin..=nmax {
            if start + n > wrapped.len() {
                break;
            }
            grams.push(wrapped[start..start + n].iter().collect());
        }
    }
    grams
}

/// Returns the stored row for `token`, or a vector synthesized from
/// `ngrams` when the token is out of vocabulary.
pub fn lookup_or_synthesize<'a>(
    table: &'a EmbeddingTable,
    ngrams: Option<&NgramTable>,
    token: &str,
) -> Option<Cow<'a, [f32]>> {
    if let Some(v) = table.get(token) {
        return Some(Cow::Borrowed(v));
    }
    ngrams.and_then(|ng| ng.synthesize(token)).map(Cow::Owned)
}

/// A word table plus optional subword table: the vector source for the
/// embedding backends.
#[derive(Debug, Clone, PartialEq)]
pub struct Embeddings {
    table: EmbeddingTable,
    ngrams: Option<NgramTable>,
}

impl Embeddings {
    pub fn new(table: EmbeddingTable, ngrams: Option<NgramTable>) -> Result<Self> {
        if let Some(ng) = &ngrams {
            if ng.dim() != table.dim() {
                return Err(Error::DimensionMismatch {
                    expected: table.dim(),
                    found: ng.dim(),
                });
            }
        }
        Ok(Self { table, ngrams })
    }

    pub fn dim(&self) -> usize {
        self.table.dim()
    }

    pub fn table(&self) -> &EmbeddingTable {
        &self.table
    }

    pub fn ngrams(&self) -> Option<&NgramTable> {
        self.ngrams.as_ref()
    }

    pub fn vector(&self, token: &str) -> Option<Cow<'_, [f32]>> {
        lookup_or_synthesize(&self.table, self.ngrams.as_ref(), token)
    }

    pub fn resolves(&self, token: &str) -> bool {
        self.table.contains(token)
            || self.ngrams.as_ref().is_some_and(|ng| {
                extract_ngrams(token, ng.nmin, ng.nmax)
                    .iter()
                    .any(|g| ng.vectors.contains(g))
            })
    }
}

impl From<EmbeddingTable> for Embeddings {
    fn from(table: EmbeddingTable) -> Self {
        Self {
            table,
            ngrams: None,
        }
    }
}
