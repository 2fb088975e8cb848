//! Latent semantic analysis baseline: truncated SVD of the TF-IDF matrix,
//! query folding-in and cosine ranking.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{cosine, DenseMatrix};
use crate::svd::{truncated_svd, SvdOptions};
use crate::text::Statement;
use crate::weighting::tfidf_matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsaConfig {
    /// Requested latent dimension; clamped to the matrix rank bound.
    pub k: usize,
    pub svd: SvdOptions,
}

impl Default for LsaConfig {
    fn default() -> Self {
        Self {
            k: 300,
            svd: SvdOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsaModel {
    terms: Vec<String>,
    term_index: BTreeMap<String, usize>,
    idf: Vec<f64>,
    doc_ids: Vec<usize>,
    u: DenseMatrix,
    s: Vec<f64>,
    v: DenseMatrix,
    /// Rows of `V · diag(S)`.
    doc_vectors: DenseMatrix,
}

impl LsaModel {
    pub fn build(corpus: &[Statement], config: &LsaConfig) -> Result<Self> {
        let tdm = tfidf_matrix(corpus)?;
        let bound = tdm.terms().len().min(tdm.doc_ids().len());
        if bound == 0 {
            return Err(Error::InvalidArgument(
                "no term discriminates between statements".into(),
            ));
        }
        let svd = truncated_svd(tdm.weights(), config.k.clamp(1, bound), &config.svd)?;
        // zero singular values cannot be folded into; drop them
        let keep = svd.s.iter().take_while(|s| **s > 0.0).count();
        if keep == 0 {
            return Err(Error::InvalidArgument(
                "term-document matrix is zero".into(),
            ));
        }
        let take = |m: &DenseMatrix| {
            let mut out = DenseMatrix::zeros(m.rows(), keep);
            for r in 0..m.rows() {
                out.row_mut(r).copy_from_slice(&m.row(r)[..keep]);
            }
            out
        };
        Self::from_parts(
            tdm.terms().to_vec(),
            tdm.idf().to_vec(),
            tdm.doc_ids().to_vec(),
            take(&svd.u),
            svd.s[..keep].to_vec(),
            take(&svd.v),
        )
    }

    /// Reassembles a model, e.g. after loading from disk.
    pub fn from_parts(
        terms: Vec<String>,
        idf: Vec<f64>,
        doc_ids: Vec<usize>,
        u: DenseMatrix,
        s: Vec<f64>,
        v: DenseMatrix,
    ) -> Result<Self> {
        let k = s.len();
        let shape_ok = idf.len() == terms.len()
            && u.rows() == terms.len()
            && u.cols() == k
            && v.rows() == doc_ids.len()
            && v.cols() == k;
        if !shape_ok || k == 0 {
            return Err(Error::InvalidArgument(
                "inconsistent lsa model shapes".into(),
            ));
        }
        if s.iter().any(|x| x.is_nan() || *x <= 0.0)
            || s.windows(2).any(|w| w[1] > w[0] * (1.0 + 1e-12))
        {
            return Err(Error::InvalidArgument(
                "singular values must be positive and descending".into(),
            ));
        }
        let mut doc_vectors = v.clone();
        for r in 0..doc_vectors.rows() {
            for (x, sv) in doc_vectors.row_mut(r).iter_mut().zip(&s) {
                *x *= sv;
            }
        }
        let term_index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(Self {
            terms,
            term_index,
            idf,
            doc_ids,
            u,
            s,
            v,
            doc_vectors,
        })
    }

    pub fn k(&self) -> usize {
        self.s.len()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term_id(&self, term: &str) -> Option<usize> {
        self.term_index.get(term).copied()
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn doc_ids(&self) -> &[usize] {
        &self.doc_ids
    }

    pub fn u(&self) -> &DenseMatrix {
        &self.u
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.s
    }

    pub fn v(&self) -> &DenseMatrix {
        &self.v
    }

    /// Latent vector of a statement (a row of `V · diag(S)`).
    pub fn doc_vector(&self, doc_id: usize) -> Option<&[f64]> {
        self.doc_ids
            .binary_search(&doc_id)
            .ok()
            .map(|i| self.doc_vectors.row(i))
    }

    /// `S⁻¹ Uᵀ q` for the query's TF-IDF vector `q`.
    pub fn fold_in_query(&self, tokens: &[String]) -> Result<Vec<f64>> {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for t in tokens {
            if let Some(&i) = self.term_index.get(t) {
                *counts.entry(i).or_insert(0) += 1;
            }
        }
        if counts.is_empty() {
            return Err(Error::EmptyQuery);
        }
        let mut out = alloc::vec![0.0; self.k()];
        for (term, c) in counts {
            let q = c as f64 * self.idf[term];
            for (o, u) in out.iter_mut().zip(self.u.row(term)) {
                *o += u * q;
            }
        }
        for (o, s) in out.iter_mut().zip(&self.s) {
            *o /= s;
        }
        Ok(out)
    }

    /// Statements by descending cosine to the folded-in query, ties by id.
    pub fn rank(&self, tokens: &[String], k_results: usize) -> Result<Vec<(usize, f64)>> {
        let q = self.fold_in_query(tokens)?;
        let scored = self
            .doc_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (*id, cosine(&q, self.doc_vectors.row(i))))
            .collect();
        Ok(crate::top_k_descending(scored, k_results))
    }
}
