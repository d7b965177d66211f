//! HTTP routes.
//!
//! | method | path                                   |
//! |--------|----------------------------------------|
//! | POST   | `/instances`                           |
//! | GET    | `/instances`                           |
//! | GET    | `/instances/{i}`                       |
//! | GET    | `/instances/{i}/concepts/{c}`          |
//! | GET    | `/instances/{i}/search?q=&limit=`      |
//! | GET    | `/instances/{i}/neighborhood/{c}?depth=` |
//! | POST   | `/instances/{i}/query?k=`              |
//! | GET    | `/jobs/{j}`                            |

use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::routing::{get, post};
use axum::{Json, Router};
use fuzzyvis_core::alpha::AlphaParams;
use fuzzyvis_core::format::import_embedding;
use fuzzyvis_core::ontology::{neighborhood, search_labels};
use fuzzyvis_core::query::{answer, parse_expression, resolve_refs, QueryNode};
use fuzzyvis_core::{FuzzyConfig, OperatorFamily};
use serde::Deserialize;
use serde_json::Value;

use crate::error::ApiError;
use crate::loader::{parse_ontology, OntologyFormat};
use crate::registry::{
    EmbeddingSource, EmbeddingState, Instance, InstanceId, InstanceSpec, JobId, JobStatus, Registry,
};
use crate::views::{
    ConceptDetail, CreatedInstance, Edge, InstanceSummary, NeighborhoodNode, NeighborhoodResponse, QueryResponse,
    Relation, SearchResponse,
};

/// Per-request override of the instance's operator family.
pub const FAMILY_HEADER: &str = "x-fuzzy-family";
pub const MAX_K: usize = 200;
pub const DEFAULT_K: usize = 10;
pub const DEFAULT_SEARCH_LIMIT: usize = 20;
pub const MAX_SEARCH_LIMIT: usize = 1000;
const MAX_BODY_BYTES: usize = 512 * 1024 * 1024;

type ApiResult<T> = Result<T, ApiError>;

pub fn router(registry: Arc<Registry>) -> Router {
    Router::new()
        .route("/instances", post(create_instance).get(list_instances))
        .route("/instances/{instance}", get(get_instance))
        .route("/instances/{instance}/concepts/{concept}", get(get_concept))
        .route("/instances/{instance}/search", get(search))
        .route("/instances/{instance}/neighborhood/{concept}", get(get_neighborhood))
        .route("/instances/{instance}/query", post(run_query))
        .route("/jobs/{job}", get(get_job))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route") })
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .with_state(registry)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateInstanceRequest {
    /// Ontology file contents.
    pub ontology: String,
    #[serde(default)]
    pub format: Option<String>,
    #[serde(default)]
    pub family: Option<String>,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub embedding: Option<EmbeddingRequest>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum EmbeddingRequest {
    Generate {
        alpha: f64,
        dim: usize,
        seed: u64,
    },
    /// Embedding file contents.
    Upload(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryRequest {
    #[serde(default)]
    pub expr: Option<String>,
    #[serde(default)]
    pub ast: Option<Value>,
}

#[derive(Debug, Deserialize)]
pub struct SearchParams {
    #[serde(default)]
    q: String,
    limit: Option<usize>,
}

#[derive(Debug, Deserialize)]
pub struct DepthParams {
    depth: Option<usize>,
}

#[derive(Debug, Deserialize)]
pub struct KParams {
    k: Option<usize>,
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> ApiResult<T> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ApiError::new(e.status(), "invalid_body", e.body_text()))
}

fn params<T>(query: Result<Query<T>, QueryRejection>) -> ApiResult<T> {
    query
        .map(|Query(v)| v)
        .map_err(|e| ApiError::invalid_params(e.body_text()))
}

fn parse_family(text: &str) -> ApiResult<OperatorFamily> {
    text.parse()
        .map_err(|e: fuzzyvis_core::fuzzy::FuzzyError| ApiError::invalid_params(e.to_string()))
}

fn lookup(registry: &Registry, id: &str) -> ApiResult<Arc<Instance>> {
    id.parse::<InstanceId>()
        .ok()
        .and_then(|id| registry.instance(id))
        .ok_or_else(|| ApiError::unknown_instance(id))
}

fn spec_from_request(request: CreateInstanceRequest) -> ApiResult<(InstanceSpec, Vec<String>)> {
    let format = match request.format.as_deref() {
        None => OntologyFormat::default(),
        Some(f) => f.parse::<OntologyFormat>()?,
    };
    let requested_family = request.family.as_deref().map(parse_family).transpose()?;
    let graph = parse_ontology(&request.ontology, format)?;

    let mut warnings = Vec::new();
    let (embedding, file_family) = match request.embedding {
        None => (EmbeddingSource::None, None),
        Some(EmbeddingRequest::Generate { alpha, dim, seed }) => {
            (EmbeddingSource::Generate(AlphaParams::new(alpha, dim, seed)?), None)
        }
        Some(EmbeddingRequest::Upload(text)) => {
            let imported = import_embedding(&text, Some(&graph))?;
            warnings.extend(imported.warnings.iter().map(ToString::to_string));
            let family = imported.matrix.provenance().family;
            (EmbeddingSource::Matrix(imported.matrix), Some(family))
        }
    };
    let family = requested_family.or(file_family).unwrap_or_default();
    Ok((
        InstanceSpec {
            name: request.name.unwrap_or_default(),
            graph,
            config: FuzzyConfig::new(family),
            embedding,
        },
        warnings,
    ))
}

/// Parses and registers an instance; generation jobs are started on the
/// blocking pool.
pub fn create_from_request(registry: &Arc<Registry>, request: CreateInstanceRequest) -> ApiResult<CreatedInstance> {
    let (spec, warnings) = spec_from_request(request)?;
    let created = registry.create(spec)?;
    // snapshot before spawning so the response always reports `queued`
    let job = created.task.map(|task| {
        let status = registry.job(task.job()).expect("task registers its job");
        tokio::task::spawn_blocking(move || task.run());
        status
    });
    Ok(CreatedInstance {
        instance: InstanceSummary::new(&created.instance),
        job,
        warnings,
    })
}

async fn create_instance(
    State(registry): State<Arc<Registry>>,
    payload: Result<Json<CreateInstanceRequest>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<CreatedInstance>)> {
    let request = body(payload)?;
    // parsing a large ontology is CPU work; keep it off the async workers
    let created = tokio::task::spawn_blocking(move || create_from_request(&registry, request))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    Ok((StatusCode::CREATED, Json(created)))
}

async fn list_instances(State(registry): State<Arc<Registry>>) -> Json<Vec<InstanceSummary>> {
    Json(registry.instances().iter().map(|i| InstanceSummary::new(i)).collect())
}

async fn get_instance(
    State(registry): State<Arc<Registry>>,
    Path(id): Path<String>,
) -> ApiResult<Json<InstanceSummary>> {
    let instance = lookup(&registry, &id)?;
    Ok(Json(InstanceSummary::new(&instance)))
}

async fn get_job(State(registry): State<Arc<Registry>>, Path(id): Path<String>) -> ApiResult<Json<JobStatus>> {
    id.parse::<JobId>()
        .ok()
        .and_then(|j| registry.job(j))
        .map(Json)
        .ok_or_else(|| ApiError::unknown_job(&id))
}

async fn get_concept(
    State(registry): State<Arc<Registry>>,
    Path((instance, concept)): Path<(String, String)>,
) -> ApiResult<Json<ConceptDetail>> {
    let instance = lookup(&registry, &instance)?;
    let i = instance
        .graph
        .index_of(&concept)
        .ok_or_else(|| ApiError::unknown_concept(&concept))?;
    let record = instance.graph.record_at(i);
    Ok(Json(ConceptDetail {
        id: record.id.clone(),
        label: record.label.clone(),
        definition: record.definition.clone(),
        parents: record.parents.iter().cloned().collect(),
        children: record.children.iter().cloned().collect(),
        metadata: instance.metadata[i],
        has_embedding: instance
            .index()
            .is_some_and(|index| index.matrix().vector(record.id.as_str()).is_some()),
    }))
}

async fn search(
    State(registry): State<Arc<Registry>>,
    Path(instance): Path<String>,
    query: Result<Query<SearchParams>, QueryRejection>,
) -> ApiResult<Json<SearchResponse>> {
    let instance = lookup(&registry, &instance)?;
    let SearchParams { q, limit } = params(query)?;
    let limit = limit.unwrap_or(DEFAULT_SEARCH_LIMIT);
    if limit == 0 || limit > MAX_SEARCH_LIMIT {
        return Err(ApiError::invalid_params(format!(
            "limit must be between 1 and {MAX_SEARCH_LIMIT}"
        )));
    }
    let hits = search_labels(&instance.graph, &q, limit)?
        .iter()
        .map(|id| instance.summary(id.as_str()).expect("search returns graph concepts"))
        .collect();
    Ok(Json(SearchResponse { query: q, hits }))
}

async fn get_neighborhood(
    State(registry): State<Arc<Registry>>,
    Path((instance, concept)): Path<(String, String)>,
    query: Result<Query<DepthParams>, QueryRejection>,
) -> ApiResult<Json<NeighborhoodResponse>> {
    let instance = lookup(&registry, &instance)?;
    let depth = params(query)?.depth.unwrap_or(1);
    let sub = neighborhood(&instance.graph, &concept, depth)?;

    let focus = instance.graph.index_of(&concept).expect("neighborhood checked the id");
    let mut ancestors = vec![false; instance.graph.len()];
    let mut stack = vec![focus];
    while let Some(i) = stack.pop() {
        for &p in instance.graph.parent_indices(i) {
            if !ancestors[p] {
                ancestors[p] = true;
                stack.push(p);
            }
        }
    }

    let mut nodes = Vec::with_capacity(sub.len());
    let mut edges = Vec::new();
    for record in sub.concepts() {
        let full = instance
            .graph
            .index_of(record.id.as_str())
            .expect("subgraph of the instance graph");
        let relation = if full == focus {
            Relation::Focus
        } else if ancestors[full] {
            Relation::Ancestor
        } else {
            Relation::Descendant
        };
        // metadata comes from the full graph, not the cut-down view
        nodes.push(NeighborhoodNode {
            concept: instance.summary(record.id.as_str()).expect("known concept"),
            relation,
        });
        edges.extend(record.children.iter().map(|c| Edge {
            parent: record.id.clone(),
            child: c.clone(),
        }));
    }
    Ok(Json(NeighborhoodResponse {
        focus: instance.graph.id_at(focus).clone(),
        depth,
        nodes,
        edges,
    }))
}

async fn run_query(
    State(registry): State<Arc<Registry>>,
    Path(instance): Path<String>,
    headers: HeaderMap,
    query: Result<Query<KParams>, QueryRejection>,
    payload: Result<Json<QueryRequest>, JsonRejection>,
) -> ApiResult<Json<QueryResponse>> {
    let instance = lookup(&registry, &instance)?;
    let k = params(query)?.k.unwrap_or(DEFAULT_K);
    if k == 0 || k > MAX_K {
        return Err(ApiError::invalid_params(format!("k must be between 1 and {MAX_K}")));
    }
    let family = match headers.get(FAMILY_HEADER) {
        None => instance.config.family,
        Some(value) => parse_family(
            value
                .to_str()
                .map_err(|_| ApiError::invalid_params(format!("{FAMILY_HEADER} is not ASCII")))?,
        )?,
    };
    let request = body(payload)?;
    let node = match (request.expr, request.ast) {
        (Some(expr), None) => parse_expression(&expr, &instance.graph)?,
        (None, Some(ast)) => {
            let node = QueryNode::from_json(&ast)?;
            node.validate()?;
            resolve_refs(&node, &instance.graph)?;
            node
        }
        _ => {
            return Err(ApiError::invalid_params(
                "body must contain exactly one of `expr` or `ast`",
            ))
        }
    };
    if instance.index().is_none() {
        let state = match instance.embedding {
            EmbeddingState::Pending(_) => "pending",
            EmbeddingState::Failed(_) => "failed",
            _ => "absent",
        };
        return Err(ApiError::no_embedding(state));
    }

    tokio::task::spawn_blocking(move || {
        let index = instance.index().expect("checked above");
        let result = answer(&node, index, &FuzzyConfig::new(family), k)?;
        Ok(Json(QueryResponse::new(result, node.to_json(), family, k, |id| {
            instance.summary(id.as_str()).expect("indexed ids are graph concepts")
        })))
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
}
