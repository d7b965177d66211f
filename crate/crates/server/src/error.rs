//! API error bodies: `{"error": {"code", "message", "details"}}`.

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use fuzzyvis_core::alpha::AlphaError;
use fuzzyvis_core::format::FormatError;
use fuzzyvis_core::ontology::OntologyError;
use fuzzyvis_core::query::QueryError;
use fuzzyvis_core::store::StoreError;
use serde::Serialize;
use serde_json::{json, Value};

use crate::loader::LoadError;
use crate::registry::RegistryError;

#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub details: Option<Value>,
}

#[derive(Serialize)]
struct Body<'a> {
    error: Inner<'a>,
}

#[derive(Serialize)]
struct Inner<'a> {
    code: &'a str,
    message: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    details: Option<&'a Value>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
            details: None,
        }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = Some(details);
        self
    }

    pub fn invalid_params(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid_params", message)
    }

    pub fn unknown_instance(id: &str) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            "unknown_instance",
            format!("unknown instance {id:?}"),
        )
    }

    pub fn unknown_job(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "unknown_job", format!("unknown job {id:?}"))
    }

    pub fn unknown_concept(id: &str) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            "unknown_concept",
            format!("unknown concept {id:?}"),
        )
    }

    pub fn no_embedding(state: &str) -> Self {
        Self::new(
            StatusCode::CONFLICT,
            "no_embedding",
            format!("instance has no embedding index (embedding {state})"),
        )
        .with_details(json!({ "embedding": state }))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Body {
            error: Inner {
                code: self.code,
                message: &self.message,
                details: self.details.as_ref(),
            },
        };
        (self.status, Json(body)).into_response()
    }
}

fn unprocessable(code: &'static str, message: String) -> ApiError {
    ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, code, message)
}

/// Errors while reading an uploaded ontology.
impl From<OntologyError> for ApiError {
    fn from(e: OntologyError) -> Self {
        let message = e.to_string();
        let details = match &e {
            OntologyError::MissingId { line } => json!({ "line": line }),
            OntologyError::InvalidId { value, line } => json!({ "value": value, "line": line }),
            OntologyError::DuplicateId { id, line } => json!({ "id": id, "line": line }),
            OntologyError::DanglingParent { child, parent, line } => {
                json!({ "child": child, "parent": parent, "line": line })
            }
            OntologyError::CycleDetected { ids } => json!({ "cycle": ids }),
            OntologyError::Schema { path, .. } => json!({ "path": path }),
            OntologyError::EmptyQuery => {
                return ApiError::new(StatusCode::BAD_REQUEST, "empty_query", message);
            }
            OntologyError::UnknownConcept(id) => return ApiError::unknown_concept(id.as_str()),
            OntologyError::NotALeaf(_) | OntologyError::NoCommonAncestor(..) => {
                return ApiError::invalid_params(message);
            }
        };
        unprocessable("ontology_parse_error", message).with_details(details)
    }
}

impl From<FormatError> for ApiError {
    fn from(e: FormatError) -> Self {
        let line = match &e {
            FormatError::DimMismatchAcrossRows { line, .. }
            | FormatError::ValueOutOfRange { line, .. }
            | FormatError::BadRow { line, .. }
            | FormatError::DuplicateId { line, .. } => Some(*line),
            FormatError::HeaderMissing | FormatError::BadHeader(_) => Some(1),
        };
        let code = match e {
            FormatError::HeaderMissing => "header_missing",
            FormatError::DimMismatchAcrossRows { .. } => "dim_mismatch_across_rows",
            FormatError::ValueOutOfRange { .. } => "value_out_of_range",
            _ => "embedding_format_error",
        };
        unprocessable(code, e.to_string()).with_details(json!({ "line": line }))
    }
}

impl From<LoadError> for ApiError {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::UnsupportedFormat(_) => {
                ApiError::new(StatusCode::BAD_REQUEST, "unsupported_format", e.to_string())
            }
            LoadError::Ontology(e) => e.into(),
            LoadError::Embedding(e) => e.into(),
            LoadError::Io { .. } => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "io_error", e.to_string()),
        }
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        let message = e.to_string();
        match e {
            QueryError::Syntax {
                position,
                expected,
                found,
            } => unprocessable("query_syntax", message)
                .with_details(json!({ "position": position, "expected": expected, "found": found })),
            QueryError::UnknownConcept {
                name,
                position,
                suggestions,
            } => unprocessable("unknown_concept", message)
                .with_details(json!({ "name": name, "position": position, "suggestions": suggestions })),
            QueryError::AmbiguousLabel {
                label,
                position,
                candidates,
            } => unprocessable("ambiguous_label", message)
                .with_details(json!({ "label": label, "position": position, "candidates": candidates })),
            QueryError::Arity { .. } | QueryError::Ast { .. } => unprocessable("invalid_ast", message),
            QueryError::MissingEmbedding(id) => {
                unprocessable("missing_embedding", message).with_details(json!({ "id": id }))
            }
            QueryError::Fuzzy(_) | QueryError::Store(_) => {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "evaluation_error", message)
            }
        }
    }
}

impl From<RegistryError> for ApiError {
    fn from(e: RegistryError) -> Self {
        match e {
            RegistryError::Store(StoreError::EmptyMatrix) => unprocessable(
                "empty_embedding",
                "embedding file has no rows for concepts of this ontology".into(),
            ),
            RegistryError::Alpha(AlphaError::NoLeaves) => unprocessable("no_leaves", e.to_string()),
            _ => ApiError::invalid_params(e.to_string()),
        }
    }
}

impl From<AlphaError> for ApiError {
    fn from(e: AlphaError) -> Self {
        ApiError::invalid_params(e.to_string())
    }
}
