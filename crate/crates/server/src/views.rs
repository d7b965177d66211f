//! JSON shapes shared by the HTTP API and `fuzzyvis query --json`.
//!
//! Every list is emitted in a fixed order so identical requests produce
//! byte-identical bodies.

use fuzzyvis_core::embedding::{Provenance, Source};
use fuzzyvis_core::fuzzy::OperatorFamily;
use fuzzyvis_core::ontology::{ConceptMetadata, ConceptRecord};
use fuzzyvis_core::{ConceptId, QueryResult};
use serde::Serialize;
use serde_json::Value;

use crate::registry::{EmbeddingState, Instance, JobStatus};

#[derive(Debug, Clone, Serialize)]
pub struct ConceptSummary {
    pub id: ConceptId,
    pub label: String,
    pub depth: usize,
    pub subtree_size: usize,
    pub child_count: usize,
    pub is_leaf: bool,
}

impl ConceptSummary {
    pub fn new(record: &ConceptRecord, meta: &ConceptMetadata) -> Self {
        Self {
            id: record.id.clone(),
            label: record.label.clone(),
            depth: meta.depth,
            subtree_size: meta.subtree_size,
            child_count: meta.child_count,
            is_leaf: meta.is_leaf,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConceptDetail {
    pub id: ConceptId,
    pub label: String,
    pub definition: Option<String>,
    pub parents: Vec<ConceptId>,
    pub children: Vec<ConceptId>,
    pub metadata: ConceptMetadata,
    pub has_embedding: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingView {
    pub state: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub job: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vectors: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<Source>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<OperatorFamily>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceSummary {
    pub id: String,
    pub name: String,
    pub family: OperatorFamily,
    pub concepts: usize,
    pub roots: Vec<ConceptId>,
    pub leaves: usize,
    pub obsolete_dropped: usize,
    pub embedding: EmbeddingView,
}

impl InstanceSummary {
    pub fn new(instance: &Instance) -> Self {
        let embedding = match &instance.embedding {
            EmbeddingState::Absent => EmbeddingView::bare("absent", None),
            EmbeddingState::Pending(job) => EmbeddingView::bare("pending", Some(job.to_string())),
            EmbeddingState::Failed(job) => EmbeddingView::bare("failed", Some(job.to_string())),
            EmbeddingState::Ready(ready) => {
                let matrix = ready.index.matrix();
                let Provenance {
                    source,
                    alpha,
                    seed,
                    family,
                } = *matrix.provenance();
                EmbeddingView {
                    state: "ready",
                    job: ready.job.map(|j| j.to_string()),
                    dim: Some(matrix.dim()),
                    vectors: Some(matrix.len()),
                    source: Some(source),
                    alpha,
                    seed,
                    family: Some(family),
                }
            }
        };
        let graph = &instance.graph;
        Self {
            id: instance.id.to_string(),
            name: instance.name.clone(),
            family: instance.config.family,
            concepts: graph.len(),
            roots: graph.roots().cloned().collect(),
            leaves: graph.leaf_indices().len(),
            obsolete_dropped: graph.obsolete().len(),
            embedding,
        }
    }
}

impl EmbeddingView {
    fn bare(state: &'static str, job: Option<String>) -> Self {
        Self {
            state,
            job,
            dim: None,
            vectors: None,
            source: None,
            alpha: None,
            seed: None,
            family: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CreatedInstance {
    pub instance: InstanceSummary,
    pub job: Option<JobStatus>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchResponse {
    pub query: String,
    pub hits: Vec<ConceptSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Focus,
    Ancestor,
    Descendant,
}

#[derive(Debug, Clone, Serialize)]
pub struct NeighborhoodNode {
    #[serde(flatten)]
    pub concept: ConceptSummary,
    pub relation: Relation,
}

#[derive(Debug, Clone, Serialize)]
pub struct Edge {
    pub parent: ConceptId,
    pub child: ConceptId,
}

#[derive(Debug, Clone, Serialize)]
pub struct NeighborhoodResponse {
    pub focus: ConceptId,
    pub depth: usize,
    pub nodes: Vec<NeighborhoodNode>,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScoredConcept {
    #[serde(flatten)]
    pub concept: ConceptSummary,
    pub score: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct QueryResponse {
    pub echo: String,
    pub family: OperatorFamily,
    pub k: usize,
    pub zero_query: bool,
    pub ast: Value,
    pub hits: Vec<ScoredConcept>,
}

impl QueryResponse {
    pub fn new(
        result: QueryResult,
        ast: Value,
        family: OperatorFamily,
        k: usize,
        summary: impl Fn(&ConceptId) -> ConceptSummary,
    ) -> Self {
        let hits = result
            .hits
            .into_iter()
            .map(|hit| ScoredConcept {
                concept: summary(&hit.concept),
                score: hit.score,
            })
            .collect();
        Self {
            echo: result.echo,
            family,
            k,
            zero_query: result.zero_query,
            ast,
            hits,
        }
    }
}
