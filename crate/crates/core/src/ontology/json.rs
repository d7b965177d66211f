//! JSON taxonomy format:
//!
//! ```json
//! {"concepts": [{"id": "R", "label": "root", "definition": "optional", "parents": []}]}
//! ```

use std::collections::BTreeSet;

use serde_json::{json, Map, Value};

use super::{ConceptDraft, ConceptId, OntologyError, OntologyGraph};

fn schema(path: impl Into<String>, message: impl Into<String>) -> OntologyError {
    OntologyError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

pub fn parse_json(text: &str) -> Result<OntologyGraph, OntologyError> {
    let root: Value = serde_json::from_str(text)
        .map_err(|e| schema(format!("$ (line {}, column {})", e.line(), e.column()), e.to_string()))?;
    let object = root.as_object().ok_or_else(|| schema("$", "expected an object"))?;
    let concepts = object
        .get("concepts")
        .ok_or_else(|| schema("$.concepts", "missing field"))?
        .as_array()
        .ok_or_else(|| schema("$.concepts", "expected an array"))?;

    let mut drafts = Vec::with_capacity(concepts.len());
    for (i, entry) in concepts.iter().enumerate() {
        drafts.push(concept(entry, &format!("$.concepts[{i}]"))?);
    }
    OntologyGraph::from_drafts(drafts, BTreeSet::new())
}

fn concept(entry: &Value, path: &str) -> Result<ConceptDraft, OntologyError> {
    let fields = entry.as_object().ok_or_else(|| schema(path, "expected an object"))?;
    let id = required_str(fields, path, "id")?;
    let id = ConceptId::parse(id).ok_or_else(|| schema(format!("{path}.id"), format!("invalid concept id {id:?}")))?;
    let label = required_str(fields, path, "label")?.to_owned();
    let definition = match fields.get("definition") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(schema(format!("{path}.definition"), "expected a string")),
    };
    let parents = match fields.get("parents") {
        None => Vec::new(),
        Some(Value::Array(items)) => items
            .iter()
            .enumerate()
            .map(|(j, p)| {
                let p_path = format!("{path}.parents[{j}]");
                let s = p.as_str().ok_or_else(|| schema(&p_path, "expected a string"))?;
                ConceptId::parse(s).ok_or_else(|| schema(&p_path, format!("invalid concept id {s:?}")))
            })
            .collect::<Result<_, _>>()?,
        Some(_) => return Err(schema(format!("{path}.parents"), "expected an array")),
    };
    Ok(ConceptDraft {
        id,
        label,
        definition,
        parents,
        line: None,
    })
}

fn required_str<'a>(fields: &'a Map<String, Value>, path: &str, key: &str) -> Result<&'a str, OntologyError> {
    match fields.get(key) {
        Some(Value::String(s)) => Ok(s),
        Some(_) => Err(schema(format!("{path}.{key}"), "expected a string")),
        None => Err(schema(format!("{path}.{key}"), "missing field")),
    }
}

/// Serializes a graph back into the JSON taxonomy format, concepts in id order.
pub fn to_json(graph: &OntologyGraph) -> Value {
    let concepts: Vec<Value> = graph
        .concepts()
        .map(|r| {
            let mut obj = json!({
                "id": r.id,
                "label": r.label,
                "parents": r.parents,
            });
            if let Some(def) = &r.definition {
                obj["definition"] = Value::String(def.clone());
            }
            obj
        })
        .collect();
    json!({ "concepts": concepts })
}
