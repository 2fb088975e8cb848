//! Top-k Word Mover's Distance search.
//!
//! [`DocIndex::prune_topk`] orders candidates by centroid distance, solves
//! the first `m` exactly, and afterwards only solves candidates whose
//! relaxed bound does not already exceed the current k-th best distance.
//! The result is identical to [`DocIndex::exhaustive_topk`].

use alloc::vec::Vec;

use crate::embedding::Embeddings;
use crate::error::{Error, Result};
use crate::text::Statement;
use crate::transport::{
    cost_from_vectors, resolve_all, rwmd_dense, weighted_mean, wmd_dense, GroundMetric,
};
use crate::weighting::{nbow_counting_dropped, NbowVector};

/// A document prepared for distance computations.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexedDoc {
    pub id: usize,
    pub nbow: NbowVector,
    /// One vector per nBOW entry, in the same order.
    pub vectors: Vec<Vec<f64>>,
    pub centroid: Vec<f64>,
}

impl IndexedDoc {
    pub fn new(
        id: usize,
        tokens: &[alloc::string::String],
        source: &Embeddings,
    ) -> Result<(Self, usize)> {
        let (nbow, dropped) = nbow_counting_dropped(tokens, Some(source))?;
        let vectors = resolve_all(source, nbow.tokens())?;
        let centroid = weighted_mean(&vectors, &nbow.weights(), source.dim());
        Ok((
            Self {
                id,
                nbow,
                vectors,
                centroid,
            },
            dropped,
        ))
    }
}

/// Work counters for one pruned query.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PruneStats {
    pub exact_solves: usize,
    pub pruned_by_rwmd: usize,
    pub pruned_by_wcd: usize,
}

/// Precomputed nBOW vectors and centroids of the non-empty statements.
#[derive(Debug, Clone, PartialEq)]
pub struct DocIndex {
    docs: Vec<IndexedDoc>,
    metric: GroundMetric,
}

impl DocIndex {
    /// Indexes every statement that keeps at least one resolvable token.
    /// Returns the index and the ids that could not be indexed.
    pub fn build(
        corpus: &[Statement],
        source: &Embeddings,
        metric: GroundMetric,
    ) -> Result<(Self, Vec<usize>)> {
        let mut docs = Vec::new();
        let mut skipped = Vec::new();
        for s in corpus {
            match IndexedDoc::new(s.id, &s.tokens, source) {
                Ok((d, _)) => docs.push(d),
                Err(Error::EmptyDocument) => skipped.push(s.id),
                Err(e) => return Err(e),
            }
        }
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        docs.sort_by_key(|d| d.id);
        Ok((Self { docs, metric }, skipped))
    }

    pub fn from_docs(mut docs: Vec<IndexedDoc>, metric: GroundMetric) -> Self {
        docs.sort_by_key(|d| d.id);
        Self { docs, metric }
    }

    pub fn docs(&self) -> &[IndexedDoc] {
        &self.docs
    }

    pub fn metric(&self) -> GroundMetric {
        self.metric
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn wmd_to(&self, query: &IndexedDoc, doc: &IndexedDoc) -> Result<f64> {
        if query.nbow == doc.nbow {
            return Ok(0.0);
        }
        let c = cost_from_vectors(&query.vectors, &doc.vectors, self.metric);
        wmd_dense(&query.nbow, &doc.nbow, &c).map(|(d, _)| d)
    }

    pub fn wcd_to(&self, query: &IndexedDoc, doc: &IndexedDoc) -> f64 {
        self.metric.distance(&query.centroid, &doc.centroid)
    }

    /// Exact WMD against every document; the `k` nearest, ties by id.
    pub fn exhaustive_topk(&self, query: &IndexedDoc, k: usize) -> Result<Vec<(usize, f64)>> {
        let mut all = Vec::with_capacity(self.docs.len());
        for d in &self.docs {
            all.push((d.id, self.wmd_to(query, d)?));
        }
        Ok(crate::top_k_ascending(all, k))
    }

    /// Centroid distance against every document; the `k` nearest.
    pub fn wcd_topk(&self, query: &IndexedDoc, k: usize) -> Vec<(usize, f64)> {
        let all = self
            .docs
            .iter()
            .map(|d| (d.id, self.wcd_to(query, d)))
            .collect();
        crate::top_k_ascending(all, k)
    }

    /// Exact top-k WMD with centroid ordering, `m` prefetched exact solves
    /// and relaxed-bound pruning.
    pub fn prune_topk(
        &self,
        query: &IndexedDoc,
        k: usize,
        m: usize,
    ) -> Result<(Vec<(usize, f64)>, PruneStats)> {
        if m < k {
            return Err(Error::InvalidArgument(alloc::format!(
                "prefetch {m} must be at least k = {k}"
            )));
        }
        let mut stats = PruneStats::default();
        if k == 0 {
            return Ok((Vec::new(), stats));
        }
        let mut order: Vec<(f64, usize)> = self
            .docs
            .iter()
            .enumerate()
            .map(|(i, d)| (self.wcd_to(query, d), i))
            .collect();
        order.sort_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then(self.docs[a.1].id.cmp(&self.docs[b.1].id))
        });

        // sorted ascending by (distance, id), at most k entries
        let mut best: Vec<(usize, f64)> = Vec::with_capacity(k + 1);
        let insert = |best: &mut Vec<(usize, f64)>, id: usize, d: f64| {
            let pos = best
                .iter()
                .position(|&(bid, bd)| d < bd || (d == bd && id < bid))
                .unwrap_or(best.len());
            if pos < k {
                best.insert(pos, (id, d));
                best.truncate(k);
            }
        };
        let slack = |kth: f64| kth + 1e-12 * (1.0 + kth);

        for (rank, &(centroid_distance, i)) in order.iter().enumerate() {
            let doc = &self.docs[i];
            if rank >= m && best.len() == k {
                let kth = best[k - 1].1;
                // centroid distance bounds WMD from below only for euclidean costs
                if self.metric == GroundMetric::Euclidean && centroid_distance > slack(kth) {
                    stats.pruned_by_wcd += order.len() - rank;
                    break;
                }
                if query.nbow != doc.nbow {
                    let c = cost_from_vectors(&query.vectors, &doc.vectors, self.metric);
                    if rwmd_dense(&query.nbow, &doc.nbow, &c)? > slack(kth) {
                        stats.pruned_by_rwmd += 1;
                        continue;
                    }
                }
            }
            stats.exact_solves += 1;
            let d = self.wmd_to(query, doc)?;
            insert(&mut best, doc.id, d);
        }
        Ok((best, stats))
    }
}
