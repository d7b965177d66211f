//! Composite concept queries: AST, text syntax, evaluation and retrieval.
//!
//! A query's embedding is computed from the stored primitive embeddings by
//! applying the configured t-norm, t-conorm and negation index by index;
//! the result is then ranked against every stored concept by cosine.

mod ast;
mod parser;

use serde::Serialize;
use thiserror::Error;

pub use ast::QueryNode;
pub use parser::{format_expression, parse_expression, quote_label, suggest};

use crate::embedding::{EmbeddingMatrix, MembershipVector};
use crate::fuzzy::{FuzzyConfig, FuzzyError};
use crate::ontology::{ConceptId, OntologyGraph};
use crate::store::{RankedHit, StoreError, VectorIndex};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Suggestion {
    pub id: ConceptId,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QueryError {
    #[error("syntax error at position {position}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        position: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("unknown concept {name:?}")]
    UnknownConcept {
        name: String,
        position: Option<usize>,
        suggestions: Vec<Suggestion>,
    },
    #[error("label {label:?} matches several concepts")]
    AmbiguousLabel {
        label: String,
        position: Option<usize>,
        candidates: Vec<ConceptId>,
    },
    #[error("`{op}` needs at least two operands, found {found}")]
    Arity { op: &'static str, found: usize },
    #[error("invalid query AST at {path}: {message}")]
    Ast { path: String, message: String },
    #[error("no embedding stored for {0}")]
    MissingEmbedding(ConceptId),
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryResult {
    pub hits: Vec<RankedHit>,
    pub zero_query: bool,
    /// Canonical text of the evaluated query.
    pub echo: String,
}

/// Checks that every referenced concept exists in `graph`.
pub fn resolve_refs(node: &QueryNode, graph: &OntologyGraph) -> Result<(), QueryError> {
    match node.concepts().into_iter().find(|id| !graph.contains(id.as_str())) {
        None => Ok(()),
        Some(id) => Err(QueryError::UnknownConcept {
            name: id.to_string(),
            position: None,
            suggestions: suggest(graph, id.as_str()),
        }),
    }
}

/// The query's membership vector. Operands of `And`/`Or` are folded left
/// to right in the order listed.
pub fn evaluate(
    node: &QueryNode,
    matrix: &EmbeddingMatrix,
    config: &FuzzyConfig,
) -> Result<MembershipVector, QueryError> {
    node.validate()?;
    eval_node(node, matrix, config).map(MembershipVector::from_valid)
}

fn eval_node(node: &QueryNode, matrix: &EmbeddingMatrix, config: &FuzzyConfig) -> Result<Vec<f64>, QueryError> {
    match node {
        QueryNode::Ref(id) => matrix
            .vector(id.as_str())
            .map(<[f64]>::to_vec)
            .ok_or_else(|| QueryError::MissingEmbedding(id.clone())),
        QueryNode::And(children) | QueryNode::Or(children) => {
            let (first, rest) = children.split_first().expect("validated arity");
            let mut acc = eval_node(first, matrix, config)?;
            for child in rest {
                let v = eval_node(child, matrix, config)?;
                if matches!(node, QueryNode::And(_)) {
                    config.tnorm_assign(&mut acc, &v)?;
                } else {
                    config.tconorm_assign(&mut acc, &v)?;
                }
            }
            Ok(acc)
        }
        QueryNode::Not(child) => {
            let mut v = eval_node(child, matrix, config)?;
            config.negate_assign(&mut v);
            Ok(v)
        }
    }
}

/// Evaluates `node` and ranks every indexed concept against it.
pub fn answer(
    node: &QueryNode,
    index: &VectorIndex,
    config: &FuzzyConfig,
    k: usize,
) -> Result<QueryResult, QueryError> {
    let vector = evaluate(node, index.matrix(), config)?;
    let top = index.top_k(&vector, k)?;
    Ok(QueryResult {
        hits: top.hits,
        zero_query: top.zero_query,
        echo: format_expression(node),
    })
}
