use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use super::{ConceptId, OntologyGraph};

/// Derived per-concept statistics shown by the exploration front-end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConceptMetadata {
    /// Fewest edges to any root.
    pub depth: usize,
    /// Distinct descendants, the concept itself included.
    pub subtree_size: usize,
    pub child_count: usize,
    pub is_leaf: bool,
}

pub fn compute_metadata(graph: &OntologyGraph) -> BTreeMap<ConceptId, ConceptMetadata> {
    metadata_table(graph)
        .into_iter()
        .enumerate()
        .map(|(i, m)| (graph.id_at(i).clone(), m))
        .collect()
}

/// Same as [`compute_metadata`] but indexed by dense concept index.
pub fn metadata_table(graph: &OntologyGraph) -> Vec<ConceptMetadata> {
    let n = graph.len();

    let mut depth = vec![usize::MAX; n];
    let mut queue: VecDeque<usize> = graph.root_indices().iter().copied().collect();
    for &r in graph.root_indices() {
        depth[r] = 0;
    }
    while let Some(i) = queue.pop_front() {
        for &c in graph.child_indices(i) {
            if depth[c] == usize::MAX {
                depth[c] = depth[i] + 1;
                queue.push_back(c);
            }
        }
    }

    // One DFS per concept; stamps avoid clearing the visited array.
    let mut stamp = vec![usize::MAX; n];
    let mut stack = Vec::new();
    let subtree: Vec<usize> = (0..n)
        .map(|start| {
            let mut count = 0;
            stack.push(start);
            stamp[start] = start;
            while let Some(i) = stack.pop() {
                count += 1;
                for &c in graph.child_indices(i) {
                    if stamp[c] != start {
                        stamp[c] = start;
                        stack.push(c);
                    }
                }
            }
            count
        })
        .collect();

    (0..n)
        .map(|i| {
            let child_count = graph.child_indices(i).len();
            ConceptMetadata {
                depth: depth[i],
                subtree_size: subtree[i],
                child_count,
                is_leaf: child_count == 0,
            }
        })
        .collect()
}
