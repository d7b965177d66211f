//! Exhaustive cosine top-k retrieval over stored membership vectors.

use std::cmp::Ordering;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::embedding::{EmbeddingError, EmbeddingMatrix, Provenance};
use crate::ontology::ConceptId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StoreError {
    #[error("embedding matrix is empty")]
    EmptyMatrix,
    #[error("index is empty")]
    EmptyIndex,
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("k must be at least 1")]
    ZeroK,
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedHit {
    pub concept: ConceptId,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopK {
    pub hits: Vec<RankedHit>,
    /// The query vector had zero norm, so every score is 0 by convention.
    pub zero_query: bool,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Cosine similarity; 0 when either vector has zero norm.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, StoreError> {
    if u.len() != v.len() {
        return Err(StoreError::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// Immutable index over a shared embedding matrix with precomputed norms.
#[derive(Debug, Clone)]
pub struct VectorIndex {
    matrix: Arc<EmbeddingMatrix>,
    norms: Vec<f64>,
}

impl VectorIndex {
    pub fn build(matrix: Arc<EmbeddingMatrix>) -> Result<Self, StoreError> {
        if matrix.is_empty() {
            return Err(StoreError::EmptyMatrix);
        }
        let norms = matrix.rows().map(|(_, row)| norm(row)).collect();
        Ok(Self { matrix, norms })
    }

    /// Builds an index from loose entries; ids must be unique.
    pub fn from_entries<I>(dim: usize, entries: I, provenance: Provenance) -> Result<Self, StoreError>
    where
        I: IntoIterator<Item = (ConceptId, Vec<f64>)>,
    {
        let matrix = EmbeddingMatrix::from_rows(dim, entries, provenance)?;
        Self::build(Arc::new(matrix))
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn len(&self) -> usize {
        self.matrix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.is_empty()
    }

    pub fn matrix(&self) -> &Arc<EmbeddingMatrix> {
        &self.matrix
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    /// The `k` entries most cosine-similar to `query`, best first; equal
    /// scores are ordered by ascending concept id.
    pub fn top_k(&self, query: &[f64], k: usize) -> Result<TopK, StoreError> {
        if k == 0 {
            return Err(StoreError::ZeroK);
        }
        if self.is_empty() {
            return Err(StoreError::EmptyIndex);
        }
        if query.len() != self.dim() {
            return Err(StoreError::DimensionMismatch {
                expected: self.dim(),
                found: query.len(),
            });
        }

        let query_norm = norm(query);
        let zero_query = query_norm == 0.0;
        let mut scored: Vec<(f64, usize)> = self
            .matrix
            .rows()
            .zip(&self.norms)
            .enumerate()
            .map(|(i, ((_, row), &row_norm))| {
                let score = if zero_query || row_norm == 0.0 {
                    0.0
                } else {
                    (dot(query, row) / (query_norm * row_norm)).clamp(-1.0, 1.0)
                };
                (score, i)
            })
            .collect();

        // rows are in id order, so the row index breaks ties by id
        let by_rank = |a: &(f64, usize), b: &(f64, usize)| -> Ordering { b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)) };
        let k = k.min(scored.len());
        if k < scored.len() {
            scored.select_nth_unstable_by(k - 1, by_rank);
            scored.truncate(k);
        }
        scored.sort_unstable_by(by_rank);

        Ok(TopK {
            hits: scored
                .into_iter()
                .map(|(score, i)| RankedHit {
                    concept: self.matrix.ids()[i].clone(),
                    score,
                })
                .collect(),
            zero_query,
        })
    }
}
