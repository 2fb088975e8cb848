//! Document distances over word embeddings: exact Word Mover's Distance,
//! its relaxed lower bound, and word centroid distance.

use alloc::string::String;
use alloc::vec::Vec;

use crate::embedding::Embeddings;
use crate::emd::solve_transport;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::weighting::NbowVector;

/// Per word-pair ground distance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum GroundMetric {
    Euclidean,
    /// `1 − cos(u, v)`, clamped at zero.
    #[default]
    CosineDistance,
}

impl GroundMetric {
    pub fn name(self) -> &'static str {
        match self {
            GroundMetric::Euclidean => "euclidean",
            GroundMetric::CosineDistance => "cosine",
        }
    }

    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        if a == b {
            return 0.0;
        }
        match self {
            GroundMetric::Euclidean => {
                libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
            }
            GroundMetric::CosineDistance => (1.0 - crate::linalg::cosine(a, b)).max(0.0),
        }
    }
}

impl core::str::FromStr for GroundMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(GroundMetric::Euclidean),
            "cosine" | "cosine_distance" => Ok(GroundMetric::CosineDistance),
            other => Err(Error::InvalidArgument(alloc::format!(
                "unknown metric {other:?}"
            ))),
        }
    }
}

/// Ground distances between the unique tokens of two documents.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub c: DenseMatrix,
}

/// Optimal mass flow between two documents and its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub flow: DenseMatrix,
    pub objective: f64,
}

pub(crate) fn widen(v: &[f32]) -> Vec<f64> {
    v.iter().map(|&x| f64::from(x)).collect()
}

pub(crate) fn resolve_all<'a, I>(vectors: &Embeddings, tokens: I) -> Result<Vec<Vec<f64>>>
where
    I: IntoIterator<Item = &'a str>,
{
    tokens
        .into_iter()
        .map(|t| {
            vectors
                .vector(t)
                .map(|v| widen(&v))
                .ok_or_else(|| Error::UnresolvableToken(t.into()))
        })
        .collect()
}

pub(crate) fn cost_from_vectors(
    src: &[Vec<f64>],
    dst: &[Vec<f64>],
    metric: GroundMetric,
) -> DenseMatrix {
    let mut c = DenseMatrix::zeros(src.len(), dst.len());
    for (i, a) in src.iter().enumerate() {
        for (j, b) in dst.iter().enumerate() {
            c.set(i, j, metric.distance(a, b));
        }
    }
    c
}

pub fn cost_matrix(
    vectors: &Embeddings,
    src: &[&str],
    dst: &[&str],
    metric: GroundMetric,
) -> Result<CostMatrix> {
    let a = resolve_all(vectors, src.iter().copied())?;
    let b = resolve_all(vectors, dst.iter().copied())?;
    Ok(CostMatrix {
        rows: src.iter().map(|s| String::from(*s)).collect(),
        cols: dst.iter().map(|s| String::from(*s)).collect(),
        c: cost_from_vectors(&a, &b, metric),
    })
}

/// Cost matrix aligned to the token order of two nBOW vectors.
pub fn nbow_cost_matrix(
    vectors: &Embeddings,
    src: &NbowVector,
    dst: &NbowVector,
    metric: GroundMetric,
) -> Result<CostMatrix> {
    let s: Vec<&str> = src.tokens().collect();
    let d: Vec<&str> = dst.tokens().collect();
    cost_matrix(vectors, &s, &d, metric)
}

fn check_aligned(src: &NbowVector, dst: &NbowVector, c: &DenseMatrix) -> Result<()> {
    if src.is_empty() || dst.is_empty() {
        return Err(Error::EmptyDocument);
    }
    if c.rows() != src.len() || c.cols() != dst.len() {
        return Err(Error::DimensionMismatch {
            expected: src.len() * dst.len(),
            found: c.rows() * c.cols(),
        });
    }
    Ok(())
}

/// Exact Word Mover's Distance and the plan that realizes it.
pub fn wmd(src: &NbowVector, dst: &NbowVector, c: &CostMatrix) -> Result<(f64, TransportPlan)> {
    wmd_dense(src, dst, &c.c)
}

pub(crate) fn wmd_dense(
    src: &NbowVector,
    dst: &NbowVector,
    c: &DenseMatrix,
) -> Result<(f64, TransportPlan)> {
    check_aligned(src, dst, c)?;
    let a = src.weights();
    let b = dst.weights();
    let flow = if src == dst && (0..a.len()).all(|i| c.get(i, i) == 0.0) {
        let mut t = DenseMatrix::zeros(a.len(), a.len());
        for (i, w) in a.iter().enumerate() {
            t.set(i, i, *w);
        }
        t
    } else {
        solve_transport(&a, &b, c)?
    };
    let objective = flow
        .as_slice()
        .iter()
        .zip(c.as_slice())
        .map(|(t, c)| t * c)
        .sum::<f64>();
    Ok((objective, TransportPlan { flow, objective }))
}

/// Relaxed WMD: the larger of the two one-sided relaxations, each of which
/// ships every word's mass to its cheapest counterpart.
pub fn rwmd(src: &NbowVector, dst: &NbowVector, c: &CostMatrix) -> Result<f64> {
    rwmd_dense(src, dst, &c.c)
}

pub(crate) fn rwmd_dense(src: &NbowVector, dst: &NbowVector, c: &DenseMatrix) -> Result<f64> {
    check_aligned(src, dst, c)?;
    let a = src.weights();
    let b = dst.weights();
    let forward: f64 = a
        .iter()
        .enumerate()
        .map(|(i, w)| w * c.row(i).iter().copied().fold(f64::INFINITY, f64::min))
        .sum();
    let backward: f64 = b
        .iter()
        .enumerate()
        .map(|(j, w)| {
            w * (0..c.rows())
                .map(|i| c.get(i, j))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    Ok(forward.max(backward))
}

/// nBOW-weighted mean of a document's word vectors.
pub fn centroid(vectors: &Embeddings, doc: &NbowVector) -> Result<Vec<f64>> {
    if doc.is_empty() {
        return Err(Error::EmptyDocument);
    }
    let rows = resolve_all(vectors, doc.tokens())?;
    Ok(weighted_mean(&rows, &doc.weights(), vectors.dim()))
}

pub(crate) fn weighted_mean(rows: &[Vec<f64>], weights: &[f64], dim: usize) -> Vec<f64> {
    let mut out = alloc::vec![0.0; dim];
    for (row, w) in rows.iter().zip(weights) {
        for (o, x) in out.iter_mut().zip(row) {
            *o += w * x;
        }
    }
    out
}

/// Word centroid distance: the ground metric between document centroids.
pub fn wcd(
    vectors: &Embeddings,
    src: &NbowVector,
    dst: &NbowVector,
    metric: GroundMetric,
) -> Result<f64> {
    Ok(metric.distance(&centroid(vectors, src)?, &centroid(vectors, dst)?))
}
