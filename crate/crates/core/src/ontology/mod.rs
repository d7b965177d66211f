//! Taxonomy data model: concepts, subsumption edges and the validated graph.
//!
//! An [`OntologyGraph`] is built once from a list of [`ConceptDraft`]s (see
//! [`parse_obo`] and [`parse_json`]) and is immutable afterwards. Concepts are
//! kept in ascending id order; that order doubles as a dense index used by the
//! numeric kernels in the rest of the crate.

mod json;
mod metadata;
mod navigate;
mod obo;

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use json::{parse_json, to_json};
pub use metadata::{compute_metadata, metadata_table, ConceptMetadata};
pub use navigate::{distances_from, leaf_distance, neighborhood, search_labels};
pub use obo::parse_obo;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OntologyError {
    #[error("stanza starting at line {line} has no id")]
    MissingId { line: usize },
    #[error("invalid concept id {value:?}{}", at_line(*line))]
    InvalidId { value: String, line: Option<usize> },
    #[error("duplicate concept id {id}{}", at_line(*line))]
    DuplicateId { id: ConceptId, line: Option<usize> },
    #[error("concept {child} names undeclared parent {parent}{}", at_line(*line))]
    DanglingParent {
        child: ConceptId,
        parent: ConceptId,
        line: Option<usize>,
    },
    #[error("cycle detected through {}", join_ids(ids))]
    CycleDetected { ids: Vec<ConceptId> },
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("unknown concept {0}")]
    UnknownConcept(ConceptId),
    #[error("concept {0} is not a leaf")]
    NotALeaf(ConceptId),
    #[error("concepts {0} and {1} share no common ancestor")]
    NoCommonAncestor(ConceptId, ConceptId),
    #[error("search query is empty")]
    EmptyQuery,
}

fn at_line(line: Option<usize>) -> String {
    line.map(|l| format!(" (line {l})")).unwrap_or_default()
}

fn join_ids(ids: &[ConceptId]) -> String {
    ids.iter().map(ConceptId::as_str).collect::<Vec<_>>().join(" -> ")
}

/// Identifier of a concept, e.g. `HP:0001350`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConceptId(String);

impl ConceptId {
    /// Checked constructor: non-empty and free of whitespace.
    pub fn parse(value: &str) -> Option<Self> {
        if value.is_empty() || value.chars().any(|c| c.is_whitespace() || c.is_control()) {
            None
        } else {
            Some(Self(value.to_owned()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for ConceptId {
    fn from(value: &str) -> Self {
        Self(value.to_owned())
    }
}

impl From<String> for ConceptId {
    fn from(value: String) -> Self {
        Self(value)
    }
}

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::borrow::Borrow<str> for ConceptId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConceptRecord {
    pub id: ConceptId,
    pub label: String,
    pub definition: Option<String>,
    pub parents: BTreeSet<ConceptId>,
    pub children: BTreeSet<ConceptId>,
}

/// Unvalidated concept as produced by a parser.
#[derive(Debug, Clone, PartialEq)]
pub struct ConceptDraft {
    pub id: ConceptId,
    pub label: String,
    pub definition: Option<String>,
    pub parents: Vec<ConceptId>,
    /// Source line of the declaration, for diagnostics.
    pub line: Option<usize>,
}

impl ConceptDraft {
    pub fn new(id: impl Into<ConceptId>, label: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            label: label.into(),
            definition: None,
            parents: Vec::new(),
            line: None,
        }
    }

    pub fn with_parents<I, S>(mut self, parents: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<ConceptId>,
    {
        self.parents = parents.into_iter().map(Into::into).collect();
        self
    }
}

/// A validated, acyclic taxonomy.
#[derive(Debug, Clone)]
pub struct OntologyGraph {
    records: Vec<ConceptRecord>,
    lookup: HashMap<ConceptId, usize>,
    labels_lower: Vec<String>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    /// Parents precede children.
    topo: Vec<usize>,
    roots: Vec<usize>,
    leaves: Vec<usize>,
    obsolete: BTreeSet<ConceptId>,
}

impl OntologyGraph {
    /// Validates drafts into a graph. `obsolete` lists ids dropped by the
    /// parser; edges pointing at them are removed rather than reported.
    pub fn from_drafts(drafts: Vec<ConceptDraft>, obsolete: BTreeSet<ConceptId>) -> Result<Self, OntologyError> {
        let mut drafts = drafts;
        drafts.sort_by(|a, b| a.id.cmp(&b.id));

        let mut lookup = HashMap::with_capacity(drafts.len());
        for (i, d) in drafts.iter().enumerate() {
            if lookup.insert(d.id.clone(), i).is_some() {
                return Err(OntologyError::DuplicateId {
                    id: d.id.clone(),
                    line: d.line,
                });
            }
        }

        let n = drafts.len();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for (i, d) in drafts.iter().enumerate() {
            for p in &d.parents {
                match lookup.get(p) {
                    Some(&j) => parents[i].push(j),
                    None if obsolete.contains(p) => {}
                    None => {
                        return Err(OntologyError::DanglingParent {
                            child: d.id.clone(),
                            parent: p.clone(),
                            line: d.line,
                        })
                    }
                }
            }
            parents[i].sort_unstable();
            parents[i].dedup();
            for &j in &parents[i] {
                children[j].push(i);
            }
        }
        // children were pushed in ascending child index order already

        let topo = topological_order(&parents, &children).map_err(|cycle| OntologyError::CycleDetected {
            ids: cycle.into_iter().map(|i| drafts[i].id.clone()).collect(),
        })?;

        let roots = (0..n).filter(|&i| parents[i].is_empty()).collect();
        let leaves = (0..n).filter(|&i| children[i].is_empty()).collect();

        let ids: Vec<ConceptId> = drafts.iter().map(|d| d.id.clone()).collect();
        let records: Vec<ConceptRecord> = drafts
            .into_iter()
            .enumerate()
            .map(|(i, d)| ConceptRecord {
                parents: parents[i].iter().map(|&j| ids[j].clone()).collect(),
                children: children[i].iter().map(|&j| ids[j].clone()).collect(),
                id: d.id,
                label: d.label,
                definition: d.definition,
            })
            .collect();
        let labels_lower = records.iter().map(|r| r.label.to_lowercase()).collect();

        Ok(Self {
            records,
            lookup,
            labels_lower,
            parents,
            children,
            topo,
            roots,
            leaves,
            obsolete,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&ConceptRecord> {
        self.lookup.get(id).map(|&i| &self.records[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.lookup.contains_key(id)
    }

    /// Records in ascending id order.
    pub fn concepts(&self) -> impl ExactSizeIterator<Item = &ConceptRecord> {
        self.records.iter()
    }

    pub fn roots(&self) -> impl Iterator<Item = &ConceptId> {
        self.roots.iter().map(|&i| &self.records[i].id)
    }

    pub fn leaves(&self) -> impl Iterator<Item = &ConceptId> {
        self.leaves.iter().map(|&i| &self.records[i].id)
    }

    pub fn is_leaf(&self, id: &str) -> bool {
        self.lookup.get(id).is_some_and(|&i| self.children[i].is_empty())
    }

    /// Ids that were declared obsolete in the source and dropped.
    pub fn obsolete(&self) -> &BTreeSet<ConceptId> {
        &self.obsolete
    }

    // Dense-index accessors. Index `i` is the position of a concept in
    // ascending id order.

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.lookup.get(id).copied()
    }

    pub fn record_at(&self, index: usize) -> &ConceptRecord {
        &self.records[index]
    }

    pub fn id_at(&self, index: usize) -> &ConceptId {
        &self.records[index].id
    }

    pub(crate) fn label_lower_at(&self, index: usize) -> &str {
        &self.labels_lower[index]
    }

    pub fn parent_indices(&self, index: usize) -> &[usize] {
        &self.parents[index]
    }

    /// Children of `index`, ascending by id.
    pub fn child_indices(&self, index: usize) -> &[usize] {
        &self.children[index]
    }

    /// Every concept, parents before children.
    pub fn topological_indices(&self) -> &[usize] {
        &self.topo
    }

    pub fn root_indices(&self) -> &[usize] {
        &self.roots
    }

    /// Leaves, ascending by id.
    pub fn leaf_indices(&self) -> &[usize] {
        &self.leaves
    }

    /// Subgraph induced by `keep` (dense indices). Edges leaving the set are cut.
    pub(crate) fn induced(&self, keep: &[bool]) -> OntologyGraph {
        let drafts = self
            .records
            .iter()
            .enumerate()
            .filter(|(i, _)| keep[*i])
            .map(|(i, r)| ConceptDraft {
                id: r.id.clone(),
                label: r.label.clone(),
                definition: r.definition.clone(),
                parents: self.parents[i]
                    .iter()
                    .filter(|&&p| keep[p])
                    .map(|&p| self.records[p].id.clone())
                    .collect(),
                line: None,
            })
            .collect();
        OntologyGraph::from_drafts(drafts, BTreeSet::new()).expect("induced subgraph of a validated graph is valid")
    }
}

/// Kahn's algorithm; on failure returns one concrete cycle.
fn topological_order(parents: &[Vec<usize>], children: &[Vec<usize>]) -> Result<Vec<usize>, Vec<usize>> {
    let n = parents.len();
    let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = queue.pop_front() {
        order.push(i);
        for &c in &children[i] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                queue.push_back(c);
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }

    // Every unprocessed node keeps an unprocessed parent, so walking parents
    // inside that set must revisit a node.
    let start = (0..n).find(|&i| indegree[i] > 0).expect("unprocessed node");
    let mut seen_at = vec![usize::MAX; n];
    let mut path = Vec::new();
    let mut cur = start;
    while seen_at[cur] == usize::MAX {
        seen_at[cur] = path.len();
        path.push(cur);
        cur = *parents[cur]
            .iter()
            .find(|&&p| indegree[p] > 0)
            .expect("cyclic node has a cyclic parent");
    }
    let mut cycle = path.split_off(seen_at[cur]);
    // walked child -> parent; report parent -> child starting at the smallest id
    cycle.reverse();
    let min_pos = cycle
        .iter()
        .enumerate()
        .min_by_key(|(_, &i)| i)
        .map(|(p, _)| p)
        .unwrap_or(0);
    cycle.rotate_left(min_pos);
    Err(cycle)
}
