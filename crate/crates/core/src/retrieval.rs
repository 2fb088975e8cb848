//! One interface over every retrieval backend.
//!
//! All backends report descending-better scores: similarities as they are,
//! distances negated. Ties are always broken by ascending statement id.

use alloc::string::String;
use alloc::vec::Vec;

use crate::embedding::Embeddings;
use crate::error::{Error, Result};
use crate::lsa::{LsaConfig, LsaModel};
use crate::pv::{train_pv, PvConfig, PvMode, PvModel, QueryRepr};
use crate::search::{DocIndex, IndexedDoc};
use crate::text::{query_tokens, Statement, StopwordSet};
use crate::transport::GroundMetric;

/// Default result list length.
pub const DEFAULT_K: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BackendKind {
    Lsa,
    Wcd,
    Wmd,
    WmdPruned,
    PvDm,
    PvDbow,
    PvDmPlusDbow,
}

impl BackendKind {
    pub const ALL: [BackendKind; 7] = [
        BackendKind::Lsa,
        BackendKind::Wcd,
        BackendKind::Wmd,
        BackendKind::WmdPruned,
        BackendKind::PvDm,
        BackendKind::PvDbow,
        BackendKind::PvDmPlusDbow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BackendKind::Lsa => "lsa",
            BackendKind::Wcd => "wcd",
            BackendKind::Wmd => "wmd",
            BackendKind::WmdPruned => "wmd_pruned",
            BackendKind::PvDm => "pv_dm",
            BackendKind::PvDbow => "pv_dbow",
            BackendKind::PvDmPlusDbow => "pv_dm_plus_dbow",
        }
    }

    pub fn needs_embeddings(self) -> bool {
        matches!(
            self,
            BackendKind::Wcd | BackendKind::Wmd | BackendKind::WmdPruned
        )
    }

    pub fn pv_mode(self) -> Option<PvMode> {
        match self {
            BackendKind::PvDm => Some(PvMode::Dm),
            BackendKind::PvDbow => Some(PvMode::Dbow),
            BackendKind::PvDmPlusDbow => Some(PvMode::DmPlusDbow),
            _ => None,
        }
    }
}

impl core::fmt::Display for BackendKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for BackendKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BackendKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(alloc::format!("unknown backend {s:?}")))
    }
}

/// What to build and how.
#[derive(Debug, Clone, PartialEq)]
pub struct BackendSpec {
    pub kind: BackendKind,
    /// Ground metric for the embedding backends; ignored otherwise.
    pub metric: GroundMetric,
    /// Where the embeddings came from; informational for the core.
    pub embedding: Option<String>,
    pub lsa: LsaConfig,
    /// Paragraph vector settings; `mode` is taken from `kind`.
    pub pv: PvConfig,
    pub query_repr: QueryRepr,
    /// Exact solves before pruning starts (`wmd_pruned`); raised to `k` if smaller.
    pub prefetch: usize,
}

impl BackendSpec {
    pub fn new(kind: BackendKind) -> Self {
        Self {
            kind,
            metric: GroundMetric::default(),
            embedding: None,
            lsa: LsaConfig::default(),
            pv: PvConfig::default(),
            query_repr: QueryRepr::default(),
            prefetch: 2 * DEFAULT_K,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Backend {
    Lsa(LsaModel),
    Wcd(DocIndex),
    Wmd(DocIndex),
    WmdPruned(DocIndex),
    Pv(PvModel),
}

/// Ranked statements for one query.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedResult {
    pub query_id: Option<usize>,
    /// `(statement id, score)`, best first.
    pub results: Vec<(usize, f64)>,
    /// Query tokens the backend could not represent.
    pub dropped: usize,
}

/// An immutable, queryable index for one backend.
#[derive(Debug, Clone, PartialEq)]
pub struct Index {
    spec: BackendSpec,
    stops: StopwordSet,
    embeddings: Option<Embeddings>,
    backend: Backend,
}

impl Index {
    pub fn build(
        corpus: &[Statement],
        spec: &BackendSpec,
        stops: StopwordSet,
        embeddings: Option<Embeddings>,
    ) -> Result<Self> {
        if corpus.iter().all(Statement::is_empty) {
            return Err(Error::EmptyCorpus);
        }
        let embedding_index = |metric| -> Result<DocIndex> {
            let source = embeddings.as_ref().ok_or_else(|| {
                Error::MissingResource(alloc::format!(
                    "backend {} needs word embeddings",
                    spec.kind
                ))
            })?;
            DocIndex::build(corpus, source, metric).map(|(index, _)| index)
        };
        let backend = match spec.kind {
            BackendKind::Lsa => Backend::Lsa(LsaModel::build(corpus, &spec.lsa)?),
            BackendKind::Wcd => Backend::Wcd(embedding_index(spec.metric)?),
            BackendKind::Wmd => Backend::Wmd(embedding_index(spec.metric)?),
            BackendKind::WmdPruned => Backend::WmdPruned(embedding_index(spec.metric)?),
            kind => {
                let mode = kind
                    .pv_mode()
                    .expect("remaining kinds are paragraph vectors");
                Backend::Pv(train_pv(corpus, &PvConfig { mode, ..spec.pv })?)
            }
        };
        Self::from_backend(spec.clone(), stops, embeddings, backend)
    }

    /// Wraps an already built backend, e.g. one loaded from disk.
    pub fn from_backend(
        spec: BackendSpec,
        stops: StopwordSet,
        embeddings: Option<Embeddings>,
        backend: Backend,
    ) -> Result<Self> {
        let consistent = match (&backend, spec.kind) {
            (Backend::Lsa(_), BackendKind::Lsa)
            | (Backend::Wcd(_), BackendKind::Wcd)
            | (Backend::Wmd(_), BackendKind::Wmd)
            | (Backend::WmdPruned(_), BackendKind::WmdPruned) => true,
            (Backend::Pv(m), kind) => kind.pv_mode() == Some(m.config().mode),
            _ => false,
        };
        if !consistent {
            return Err(Error::InvalidArgument(alloc::format!(
                "backend does not match kind {}",
                spec.kind
            )));
        }
        if spec.kind.needs_embeddings() && embeddings.is_none() {
            return Err(Error::MissingResource(alloc::format!(
                "backend {} needs word embeddings",
                spec.kind
            )));
        }
        Ok(Self {
            spec,
            stops,
            embeddings,
            backend,
        })
    }

    pub fn spec(&self) -> &BackendSpec {
        &self.spec
    }

    pub fn stopwords(&self) -> &StopwordSet {
        &self.stops
    }

    pub fn embeddings(&self) -> Option<&Embeddings> {
        self.embeddings.as_ref()
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    /// Ids of the statements that can be returned, ascending.
    pub fn statement_ids(&self) -> Vec<usize> {
        match &self.backend {
            Backend::Lsa(m) => m.doc_ids().to_vec(),
            Backend::Wcd(d) | Backend::Wmd(d) | Backend::WmdPruned(d) => {
                d.docs().iter().map(|d| d.id).collect()
            }
            Backend::Pv(m) => m.doc_ids().to_vec(),
        }
    }

    /// Runs the query text through the shared pipeline and ranks.
    pub fn rank(&self, query: &str, k: usize) -> Result<RankedResult> {
        self.rank_tokens(&query_tokens(query, &self.stops), k)
    }

    /// Ranks an already tokenized query.
    pub fn rank_tokens(&self, tokens: &[String], k: usize) -> Result<RankedResult> {
        if tokens.is_empty() {
            return Err(Error::EmptyQuery);
        }
        let unknown = |known: &dyn Fn(&str) -> bool| tokens.iter().filter(|t| !known(t)).count();
        let (results, dropped) = match &self.backend {
            Backend::Lsa(m) => {
                let dropped = unknown(&|t| m.term_id(t).is_some());
                (m.rank(tokens, k)?, dropped)
            }
            Backend::Pv(m) => {
                let dropped = unknown(&|t| m.vocab().id(t).is_some());
                (m.rank(tokens, k, self.spec.query_repr)?, dropped)
            }
            Backend::Wcd(index) | Backend::Wmd(index) | Backend::WmdPruned(index) => {
                let source = self.embeddings.as_ref().expect("checked at construction");
                let (query, dropped) = match IndexedDoc::new(usize::MAX, tokens, source) {
                    Err(Error::EmptyDocument) => return Err(Error::EmptyQuery),
                    other => other?,
                };
                let distances = match &self.backend {
                    Backend::Wcd(_) => index.wcd_topk(&query, k),
                    Backend::Wmd(_) => index.exhaustive_topk(&query, k)?,
                    _ => index.prune_topk(&query, k, self.spec.prefetch.max(k))?.0,
                };
                let scores = distances.into_iter().map(|(id, d)| (id, 0.0 - d)).collect();
                (scores, dropped)
            }
        };
        Ok(RankedResult {
            query_id: None,
            results,
            dropped,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::EmbeddingTable;
    use crate::text::{default_stopwords, ingest, ParagraphMode};
    use alloc::vec;

    const TEXT: &str = "Revenue grew strongly during the year.\n\
        The chief executive officer leads the company.\n\
        Lettings income rose across London branches.\n\
        Revenue grew strongly during the year.\n";

    fn embeddings() -> Embeddings {
        let words = [
            "revenue",
            "grew",
            "strongly",
            "year",
            "chief",
            "executive",
            "officer",
            "leads",
            "company",
            "lettings",
            "income",
            "rose",
            "across",
            "london",
            "branches",
        ];
        let rows = words.iter().enumerate().map(|(i, w)| {
            let mut v = vec![0.0f32; 4];
            v[i % 4] = 1.0 + i as f32 * 0.1;
            v[(i + 1) % 4] = 0.5;
            (*w, v)
        });
        EmbeddingTable::from_rows(4, rows).unwrap().into()
    }

    fn corpus() -> Vec<Statement> {
        ingest(TEXT, &default_stopwords(), ParagraphMode::Newline)
    }

    fn index(kind: BackendKind) -> Index {
        let mut spec = BackendSpec::new(kind);
        spec.pv = PvConfig {
            dim: 8,
            epochs: 5,
            ..PvConfig::default()
        };
        Index::build(&corpus(), &spec, default_stopwords(), Some(embeddings())).unwrap()
    }

    #[test]
    fn verbatim_query_ranks_first_for_embedding_backends() {
        for kind in [BackendKind::Wcd, BackendKind::Wmd, BackendKind::WmdPruned] {
            let r = index(kind)
                .rank("The chief executive officer leads the company.", 3)
                .unwrap();
            assert_eq!(r.results[0], (1, 0.0), "{kind}");
            assert!(r.results[0].1.is_sign_positive());
        }
        // identical statements tie at zero and come back in id order
        let r = index(BackendKind::Wmd)
            .rank("Revenue grew strongly during the year.", 2)
            .unwrap();
        assert_eq!(r.results, vec![(0, 0.0), (3, 0.0)]);
    }

    #[test]
    fn results_are_capped_sorted_and_unique() {
        for kind in BackendKind::ALL {
            let r = index(kind).rank("revenue income london", 3).unwrap();
            assert!(r.results.len() <= 3, "{kind}");
            assert!(r.results.windows(2).all(|w| w[0].1 >= w[1].1));
            let mut ids: Vec<usize> = r.results.iter().map(|x| x.0).collect();
            ids.dedup();
            assert_eq!(ids.len(), r.results.len());
        }
    }

    #[test]
    fn empty_queries_are_signalled() {
        for kind in BackendKind::ALL {
            let idx = index(kind);
            assert_eq!(idx.rank("the of and", 5), Err(Error::EmptyQuery), "{kind}");
            assert_eq!(idx.rank("zzzz qqqq", 5), Err(Error::EmptyQuery), "{kind}");
        }
    }

    #[test]
    fn dropped_tokens_are_counted() {
        let r = index(BackendKind::Wmd)
            .rank("revenue zzzz qqqq", 5)
            .unwrap();
        assert_eq!(r.dropped, 2);
    }

    #[test]
    fn embedding_backends_need_embeddings() {
        let spec = BackendSpec::new(BackendKind::Wmd);
        assert!(matches!(
            Index::build(&corpus(), &spec, default_stopwords(), None),
            Err(Error::MissingResource(_))
        ));
    }

    #[test]
    fn wcd_index_holds_one_centroid_per_statement() {
        match index(BackendKind::Wcd).backend() {
            Backend::Wcd(d) => {
                assert_eq!(d.len(), 4);
                assert!(d.docs().iter().all(|x| x.centroid.len() == 4));
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn rebuilds_are_identical() {
        for kind in BackendKind::ALL {
            assert_eq!(index(kind), index(kind), "{kind}");
        }
    }
}
