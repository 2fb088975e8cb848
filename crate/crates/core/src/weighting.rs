//! Bag-of-words mass vectors and the TF-IDF term-document matrix.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::embedding::Embeddings;
use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::text::Statement;

/// Normalized bag of words: unique tokens (sorted) with weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct NbowVector {
    entries: Vec<(String, f64)>,
}

impl NbowVector {
    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(t, _)| t.as_str())
    }

    pub fn weights(&self) -> Vec<f64> {
        self.entries.iter().map(|(_, w)| *w).collect()
    }

    pub fn weight(&self, token: &str) -> Option<f64> {
        self.entries
            .binary_search_by(|(t, _)| t.as_str().cmp(token))
            .ok()
            .map(|i| self.entries[i].1)
    }

    /// Builds directly from `(token, weight)` pairs, renormalizing the
    /// weights. Intended for synthetic inputs; duplicate tokens are merged.
    pub fn from_weights<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut merged: BTreeMap<String, f64> = BTreeMap::new();
        for (t, w) in pairs {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidArgument(
                    "nbow weights must be finite and non-negative".into(),
                ));
            }
            *merged.entry(t.into()).or_insert(0.0) += w;
        }
        merged.retain(|_, w| *w > 0.0);
        let total: f64 = merged.values().sum();
        if merged.is_empty() || total <= 0.0 {
            return Err(Error::EmptyDocument);
        }
        Ok(Self {
            entries: merged.into_iter().map(|(t, w)| (t, w / total)).collect(),
        })
    }
}

/// Count-normalized bag of words over `tokens`. With `vectors` given,
/// tokens that cannot be resolved are dropped first.
pub fn nbow(tokens: &[String], vectors: Option<&Embeddings>) -> Result<NbowVector> {
    nbow_counting_dropped(tokens, vectors).map(|(v, _)| v)
}

/// Like [`nbow`], also returning how many token occurrences were dropped.
pub fn nbow_counting_dropped(
    tokens: &[String],
    vectors: Option<&Embeddings>,
) -> Result<(NbowVector, usize)> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for t in tokens {
        *counts.entry(t.as_str()).or_insert(0) += 1;
    }
    let mut dropped = 0;
    if let Some(v) = vectors {
        counts.retain(|t, c| {
            let keep = v.resolves(t);
            if !keep {
                dropped += *c;
            }
            keep
        });
    }
    let total: usize = counts.values().sum();
    if total == 0 {
        return Err(Error::EmptyDocument);
    }
    let total = total as f64;
    let entries = counts
        .into_iter()
        .map(|(t, c)| (String::from(t), c as f64 / total))
        .collect();
    Ok((NbowVector { entries }, dropped))
}

/// Sparse TF-IDF matrix: terms are rows, non-empty statements columns.
///
/// `weight(t, d) = count(t, d) · ln(N / df(t))`. Terms present in every
/// column get idf 0 and are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct TermDocumentMatrix {
    terms: Vec<String>,
    term_index: BTreeMap<String, usize>,
    idf: Vec<f64>,
    doc_ids: Vec<usize>,
    excluded: Vec<usize>,
    weights: CsrMatrix,
}

impl TermDocumentMatrix {
    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn term_index(&self, term: &str) -> Option<usize> {
        self.term_index.get(term).copied()
    }

    /// Statement ids of the columns, ascending.
    pub fn doc_ids(&self) -> &[usize] {
        &self.doc_ids
    }

    /// Ids of statements left out because they had no tokens.
    pub fn excluded(&self) -> &[usize] {
        &self.excluded
    }

    pub fn weights(&self) -> &CsrMatrix {
        &self.weights
    }

    pub fn weight(&self, term: &str, doc_id: usize) -> f64 {
        let (Some(t), Ok(col)) = (self.term_index(term), self.doc_ids.binary_search(&doc_id))
        else {
            return 0.0;
        };
        self.weights
            .row(t)
            .find(|(c, _)| *c == col)
            .map_or(0.0, |(_, w)| w)
    }

    /// TF-IDF vector of an unseen token list using this matrix's idf values,
    /// as `(term row, weight)` pairs. Unknown terms are ignored.
    pub fn query_vector(&self, tokens: &[String]) -> Vec<(usize, f64)> {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for t in tokens {
            if let Some(i) = self.term_index(t) {
                *counts.entry(i).or_insert(0) += 1;
            }
        }
        counts
            .into_iter()
            .map(|(i, c)| (i, c as f64 * self.idf[i]))
            .collect()
    }
}

pub fn tfidf_matrix(corpus: &[Statement]) -> Result<TermDocumentMatrix> {
    let mut excluded = Vec::new();
    let mut columns: Vec<(usize, BTreeMap<&str, usize>)> = Vec::new();
    for s in corpus {
        if s.tokens.is_empty() {
            excluded.push(s.id);
            continue;
        }
        let mut counts = BTreeMap::new();
        for t in &s.tokens {
            *counts.entry(t.as_str()).or_insert(0usize) += 1;
        }
        columns.push((s.id, counts));
    }
    if columns.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    // columns in ascending id order, so lookups can binary search
    columns.sort_by_key(|(id, _)| *id);
    excluded.sort_unstable();
    let (doc_ids, doc_counts): (Vec<usize>, Vec<_>) = columns.into_iter().unzip();

    let n = doc_ids.len() as f64;
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for counts in &doc_counts {
        for t in counts.keys() {
            *df.entry(t).or_insert(0) += 1;
        }
    }
    let mut terms = Vec::new();
    let mut idf = Vec::new();
    let mut term_index = BTreeMap::new();
    for (t, d) in &df {
        let w = libm::log(n / *d as f64);
        if w > 0.0 {
            term_index.insert(String::from(*t), terms.len());
            terms.push(String::from(*t));
            idf.push(w);
        }
    }
    let mut rows: Vec<Vec<(usize, f64)>> = alloc::vec![Vec::new(); terms.len()];
    for (col, counts) in doc_counts.iter().enumerate() {
        for (t, c) in counts {
            if let Some(&row) = term_index.get(*t) {
                rows[row].push((col, *c as f64 * idf[row]));
            }
        }
    }
    let weights = CsrMatrix::from_rows(doc_ids.len(), rows);
    Ok(TermDocumentMatrix {
        terms,
        term_index,
        idf,
        doc_ids,
        excluded,
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(ToString::to_string).collect()
    }

    fn stmt(id: usize, s: &str) -> Statement {
        Statement {
            id,
            raw: s.to_string(),
            tokens: toks(s),
        }
    }

    #[test]
    fn nbow_counts() {
        let v = nbow(&toks("a a b"), None).unwrap();
        assert_eq!(
            v.entries(),
            &[("a".to_string(), 2.0 / 3.0), ("b".to_string(), 1.0 / 3.0)]
        );
        let v = nbow(&toks("x"), None).unwrap();
        assert_eq!(v.entries(), &[("x".to_string(), 1.0)]);
        assert_eq!(nbow(&[], None), Err(Error::EmptyDocument));
    }

    #[test]
    fn nbow_drops_unresolvable_tokens() {
        let table =
            crate::embedding::EmbeddingTable::from_rows(1, [("a", vec![1.0f32]), ("b", vec![2.0])])
                .unwrap();
        let e = Embeddings::from(table);
        let (v, dropped) = nbow_counting_dropped(&toks("a b c"), Some(&e)).unwrap();
        assert_eq!(
            v.entries(),
            &[("a".to_string(), 0.5), ("b".to_string(), 0.5)]
        );
        assert_eq!(dropped, 1);
        assert_eq!(nbow(&toks("c c"), Some(&e)), Err(Error::EmptyDocument));
    }

    #[test]
    fn idf_zero_rows_dropped() {
        let m = tfidf_matrix(&[stmt(0, "a b"), stmt(1, "a c")]).unwrap();
        assert_eq!(m.terms(), &["b".to_string(), "c".to_string()]);
        let single = tfidf_matrix(&[stmt(0, "x x")]).unwrap();
        assert!(single.terms().is_empty());
        assert_eq!(single.doc_ids(), &[0]);
    }

    #[test]
    fn empty_statements_excluded() {
        let m = tfidf_matrix(&[stmt(0, "a"), stmt(1, ""), stmt(2, "b")]).unwrap();
        assert_eq!(m.doc_ids(), &[0, 2]);
        assert_eq!(m.excluded(), &[1]);
        assert_eq!(tfidf_matrix(&[stmt(0, "")]), Err(Error::EmptyCorpus));
    }

    /// Hand-computed 3 docs × 5 terms fixture.
    #[test]
    fn three_document_fixture() {
        // d0: apple apple banana
        // d1: banana cherry
        // d2: cherry date elder apple
        // df: apple 2, banana 2, cherry 2, date 1, elder 1; N = 3
        let m = tfidf_matrix(&[
            stmt(0, "apple apple banana"),
            stmt(1, "banana cherry"),
            stmt(2, "cherry date elder apple"),
        ])
        .unwrap();
        let l32 = libm::log(1.5);
        let l3 = libm::log(3.0);
        assert_eq!(m.terms().len(), 5);
        let expect = [
            ("apple", 0, 2.0 * l32),
            ("apple", 2, l32),
            ("banana", 0, l32),
            ("banana", 1, l32),
            ("cherry", 1, l32),
            ("cherry", 2, l32),
            ("date", 2, l3),
            ("elder", 2, l3),
            ("date", 0, 0.0),
            ("apple", 1, 0.0),
        ];
        for (t, d, w) in expect {
            assert_eq!(m.weight(t, d), w, "{t} in {d}");
        }
        assert_eq!(m.weights().nnz(), 8);
    }

    proptest! {
        #[test]
        fn nbow_sums_to_one_and_ignores_order(
            words in proptest::collection::vec("[a-e]", 1..20)
        ) {
            let a = nbow(&words, None).unwrap();
            let total: f64 = a.weights().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            let mut rev = words.clone();
            rev.reverse();
            prop_assert_eq!(a, nbow(&rev, None).unwrap());
        }

        #[test]
        fn idf_matches_brute_force_recount(
            docs in proptest::collection::vec(proptest::collection::vec("[a-f]", 1..6), 1..6),
            dup in 0usize..6,
        ) {
            let mut corpus: Vec<Statement> = docs
                .iter()
                .enumerate()
                .map(|(i, d)| Statement { id: i, raw: String::new(), tokens: d.clone() })
                .collect();
            let dup = dup % corpus.len();
            let copy = Statement { id: corpus.len(), ..corpus[dup].clone() };
            corpus.push(copy);
            let m = tfidf_matrix(&corpus).unwrap();
            let n = corpus.len() as f64;
            for (t, idf) in m.terms().iter().zip(m.idf()) {
                let df = corpus.iter().filter(|s| s.tokens.contains(t)).count() as f64;
                prop_assert_eq!(*idf, libm::log(n / df));
                for s in &corpus {
                    let tf = s.tokens.iter().filter(|x| *x == t).count() as f64;
                    prop_assert_eq!(m.weight(t, s.id), tf * idf);
                }
            }
        }
    }
}
