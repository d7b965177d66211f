//! Membership vectors and the per-concept embedding matrix.

use std::collections::HashMap;
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fuzzy::OperatorFamily;
use crate::ontology::ConceptId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmbeddingError {
    #[error("embedding dimension must be at least 1")]
    ZeroDimension,
    #[error("vector for {id} has length {found}, expected {expected}")]
    WrongLength {
        id: ConceptId,
        expected: usize,
        found: usize,
    },
    #[error("value {value} for {id} at index {index} is outside [0, 1]")]
    OutOfRange { id: ConceptId, index: usize, value: f64 },
    #[error("duplicate concept id {0}")]
    DuplicateId(ConceptId),
}

/// One concept's membership degrees over the interpretation domain.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct MembershipVector(Vec<f64>);

impl MembershipVector {
    /// Validates that every entry is a degree in `[0, 1]`.
    pub fn new(values: Vec<f64>) -> Result<Self, crate::fuzzy::FuzzyError> {
        if let Some(&bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(crate::fuzzy::FuzzyError::OutOfRange(bad));
        }
        Ok(Self(values))
    }

    /// Caller guarantees the range invariant (outputs of the fuzzy kernels).
    pub(crate) fn from_valid(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
        Self(values)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }
}

impl Deref for MembershipVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Generated,
    Imported,
}

impl Source {
    pub fn token(self) -> &'static str {
        match self {
            Source::Generated => "generated",
            Source::Imported => "imported",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: Source,
    pub alpha: Option<f64>,
    pub seed: Option<u64>,
    pub family: OperatorFamily,
}

impl Provenance {
    pub fn imported(family: OperatorFamily) -> Self {
        Self {
            source: Source::Imported,
            alpha: None,
            seed: None,
            family,
        }
    }
}

/// Row-major matrix of membership vectors, rows sorted by concept id.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    dim: usize,
    ids: Vec<ConceptId>,
    data: Vec<f64>,
    lookup: HashMap<ConceptId, usize>,
    provenance: Provenance,
}

impl EmbeddingMatrix {
    /// Builds a matrix from `(id, vector)` rows in any order.
    pub fn from_rows<I>(dim: usize, rows: I, provenance: Provenance) -> Result<Self, EmbeddingError>
    where
        I: IntoIterator<Item = (ConceptId, Vec<f64>)>,
    {
        if dim == 0 {
            return Err(EmbeddingError::ZeroDimension);
        }
        let mut rows: Vec<(ConceptId, Vec<f64>)> = rows.into_iter().collect();
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(EmbeddingError::DuplicateId(w[0].0.clone()));
        }
        let mut data = Vec::with_capacity(rows.len() * dim);
        let mut ids = Vec::with_capacity(rows.len());
        for (id, values) in rows {
            if values.len() != dim {
                return Err(EmbeddingError::WrongLength {
                    id,
                    expected: dim,
                    found: values.len(),
                });
            }
            if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
                return Err(EmbeddingError::OutOfRange { id, index, value });
            }
            data.extend_from_slice(&values);
            ids.push(id);
        }
        Ok(Self::from_parts(dim, ids, data, provenance))
    }

    /// `ids` sorted and unique, `data.len() == ids.len() * dim`, values in range.
    pub(crate) fn from_parts(dim: usize, ids: Vec<ConceptId>, data: Vec<f64>, provenance: Provenance) -> Self {
        debug_assert_eq!(data.len(), ids.len() * dim);
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        let lookup = ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        Self {
            dim,
            ids,
            data,
            lookup,
            provenance,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn ids(&self) -> &[ConceptId] {
        &self.ids
    }

    pub fn vector(&self, id: &str) -> Option<&[f64]> {
        self.lookup.get(id).map(|&i| self.row(i))
    }

    pub fn row(&self, index: usize) -> &[f64] {
        &self.data[index * self.dim..(index + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = (&ConceptId, &[f64])> {
        self.ids.iter().zip(self.data.chunks_exact(self.dim))
    }

    /// Keeps only rows whose id satisfies `keep`.
    pub fn retain(self, mut keep: impl FnMut(&ConceptId) -> bool) -> Self {
        let dim = self.dim;
        let mut ids = Vec::new();
        let mut data = Vec::new();
        for (id, row) in self.ids.into_iter().zip(self.data.chunks_exact(dim)) {
            if keep(&id) {
                data.extend_from_slice(row);
                ids.push(id);
            }
        }
        Self::from_parts(dim, ids, data, self.provenance)
    }
}
