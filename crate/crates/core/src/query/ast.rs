use serde_json::{json, Value};

use super::QueryError;
use crate::ontology::ConceptId;

/// A composite concept built from concept references with fuzzy
/// conjunction, disjunction and negation.
#[derive(Debug, Clone, PartialEq)]
pub enum QueryNode {
    Ref(ConceptId),
    /// At least two operands.
    And(Vec<QueryNode>),
    /// At least two operands.
    Or(Vec<QueryNode>),
    Not(Box<QueryNode>),
}

impl QueryNode {
    pub fn concept(id: impl Into<ConceptId>) -> Self {
        Self::Ref(id.into())
    }

    pub fn negate(node: QueryNode) -> Self {
        Self::Not(Box::new(node))
    }

    /// Conjunction with same-operator children spliced in.
    pub fn and(children: Vec<QueryNode>) -> Self {
        Self::And(flatten(children, |n| matches!(n, QueryNode::And(_))))
    }

    /// Disjunction with same-operator children spliced in.
    pub fn or(children: Vec<QueryNode>) -> Self {
        Self::Or(flatten(children, |n| matches!(n, QueryNode::Or(_))))
    }

    /// Checks arity rules recursively.
    pub fn validate(&self) -> Result<(), QueryError> {
        match self {
            QueryNode::Ref(_) => Ok(()),
            QueryNode::And(children) | QueryNode::Or(children) => {
                if children.len() < 2 {
                    return Err(QueryError::Arity {
                        op: self.op_name(),
                        found: children.len(),
                    });
                }
                children.iter().try_for_each(QueryNode::validate)
            }
            QueryNode::Not(child) => child.validate(),
        }
    }

    /// Referenced concept ids in first-occurrence order.
    pub fn concepts(&self) -> Vec<&ConceptId> {
        let mut out = Vec::new();
        self.collect_refs(&mut out);
        out
    }

    fn collect_refs<'a>(&'a self, out: &mut Vec<&'a ConceptId>) {
        match self {
            QueryNode::Ref(id) => {
                if !out.contains(&id) {
                    out.push(id);
                }
            }
            QueryNode::And(children) | QueryNode::Or(children) => children.iter().for_each(|c| c.collect_refs(out)),
            QueryNode::Not(child) => child.collect_refs(out),
        }
    }

    fn op_name(&self) -> &'static str {
        match self {
            QueryNode::Ref(_) => "ref",
            QueryNode::And(_) => "and",
            QueryNode::Or(_) => "or",
            QueryNode::Not(_) => "not",
        }
    }

    /// `{"op": "and"|"or"|"not"|"ref", "children": [...], "id": "..."}`
    pub fn to_json(&self) -> Value {
        match self {
            QueryNode::Ref(id) => json!({ "op": "ref", "id": id }),
            QueryNode::And(children) | QueryNode::Or(children) => json!({
                "op": self.op_name(),
                "children": children.iter().map(QueryNode::to_json).collect::<Vec<_>>(),
            }),
            QueryNode::Not(child) => json!({ "op": "not", "children": [child.to_json()] }),
        }
    }

    pub fn from_json(value: &Value) -> Result<Self, QueryError> {
        from_json_at(value, "$")
    }
}

fn flatten(children: Vec<QueryNode>, same: impl Fn(&QueryNode) -> bool) -> Vec<QueryNode> {
    let mut out = Vec::with_capacity(children.len());
    for child in children {
        if same(&child) {
            match child {
                QueryNode::And(inner) | QueryNode::Or(inner) => out.extend(inner),
                _ => unreachable!(),
            }
        } else {
            out.push(child);
        }
    }
    out
}

fn from_json_at(value: &Value, path: &str) -> Result<QueryNode, QueryError> {
    let bad = |message: &str| QueryError::Ast {
        path: path.to_owned(),
        message: message.to_owned(),
    };
    let obj = value.as_object().ok_or_else(|| bad("expected an object"))?;
    let op = obj
        .get("op")
        .and_then(Value::as_str)
        .ok_or_else(|| bad("missing string field `op`"))?;
    let children = || -> Result<Vec<QueryNode>, QueryError> {
        let items = obj
            .get("children")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing array field `children`"))?;
        items
            .iter()
            .enumerate()
            .map(|(i, c)| from_json_at(c, &format!("{path}.children[{i}]")))
            .collect()
    };
    let node = match op {
        "ref" => {
            let id = obj
                .get("id")
                .and_then(Value::as_str)
                .ok_or_else(|| bad("missing string field `id`"))?;
            QueryNode::Ref(ConceptId::parse(id).ok_or_else(|| bad("invalid concept id"))?)
        }
        "and" => QueryNode::And(children()?),
        "or" => QueryNode::Or(children()?),
        "not" => {
            let mut items = children()?;
            if items.len() != 1 {
                return Err(bad("`not` takes exactly one child"));
            }
            QueryNode::negate(items.pop().expect("one child"))
        }
        other => return Err(bad(&format!("unknown op {other:?}"))),
    };
    if let QueryNode::And(c) | QueryNode::Or(c) = &node {
        if c.len() < 2 {
            return Err(bad("`and`/`or` need at least two children"));
        }
    }
    Ok(node)
}
