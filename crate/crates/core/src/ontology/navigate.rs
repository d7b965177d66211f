use std::collections::VecDeque;

use super::{ConceptId, OntologyError, OntologyGraph};

/// Case-insensitive substring search over labels, ranked by match position,
/// then label length, then id.
pub fn search_labels(graph: &OntologyGraph, query: &str, limit: usize) -> Result<Vec<ConceptId>, OntologyError> {
    let needle = query.trim().to_lowercase();
    if needle.is_empty() {
        return Err(OntologyError::EmptyQuery);
    }
    let mut hits: Vec<(usize, usize, usize)> = (0..graph.len())
        .filter_map(|i| {
            let label = graph.label_lower_at(i);
            label
                .find(&needle)
                .map(|pos| (label[..pos].chars().count(), label.chars().count(), i))
        })
        .collect();
    // dense index order is id order, so the tuple ordering is the full ranking
    hits.sort_unstable();
    Ok(hits
        .into_iter()
        .take(limit)
        .map(|(_, _, i)| graph.id_at(i).clone())
        .collect())
}

/// Concepts within `depth` child edges of `id`, plus every ancestor of `id`.
pub fn neighborhood(graph: &OntologyGraph, id: &str, depth: usize) -> Result<OntologyGraph, OntologyError> {
    let center = graph
        .index_of(id)
        .ok_or_else(|| OntologyError::UnknownConcept(id.into()))?;
    let mut keep = vec![false; graph.len()];

    let mut frontier = vec![center];
    keep[center] = true;
    for _ in 0..depth {
        let mut next = Vec::new();
        for &i in &frontier {
            for &c in graph.child_indices(i) {
                if !keep[c] {
                    keep[c] = true;
                    next.push(c);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }

    let mut stack = vec![center];
    while let Some(i) = stack.pop() {
        for &p in graph.parent_indices(i) {
            if !keep[p] {
                keep[p] = true;
                stack.push(p);
            }
        }
    }
    Ok(graph.induced(&keep))
}

/// Edge counts from `start` up to each of its ancestors (itself at 0).
fn upward_distances(graph: &OntologyGraph, start: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; graph.len()];
    dist[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(i) = queue.pop_front() {
        let d = dist[i].expect("queued nodes have a distance");
        for &p in graph.parent_indices(i) {
            if dist[p].is_none() {
                dist[p] = Some(d + 1);
                queue.push_back(p);
            }
        }
    }
    dist
}

/// Path length between two leaves through their closest common ancestor:
/// the minimum over common ancestors `W` of `d(a, W) + d(b, W)`.
pub fn leaf_distance(graph: &OntologyGraph, a: &str, b: &str) -> Result<usize, OntologyError> {
    let ia = leaf_index(graph, a)?;
    let ib = leaf_index(graph, b)?;
    let up_a = upward_distances(graph, ia);
    let up_b = upward_distances(graph, ib);
    up_a.iter()
        .zip(&up_b)
        .filter_map(|(x, y)| Some((*x)? + (*y)?))
        .min()
        .ok_or_else(|| OntologyError::NoCommonAncestor(a.into(), b.into()))
}

fn leaf_index(graph: &OntologyGraph, id: &str) -> Result<usize, OntologyError> {
    let i = graph
        .index_of(id)
        .ok_or_else(|| OntologyError::UnknownConcept(id.into()))?;
    if graph.child_indices(i).is_empty() {
        Ok(i)
    } else {
        Err(OntologyError::NotALeaf(id.into()))
    }
}

/// For every concept `n`, the minimum over ancestors `W` shared by `anchor`
/// and `n` of `d(anchor, W) + d(n, W)`; `None` when no ancestor is shared.
///
/// Restricted to leaves this equals [`leaf_distance`] from `anchor`, computed
/// for all leaves in one upward BFS and one topological sweep.
pub fn distances_from(graph: &OntologyGraph, anchor: usize) -> Vec<Option<usize>> {
    let mut dist = upward_distances(graph, anchor);
    for &i in graph.topological_indices() {
        let via_parent = graph
            .parent_indices(i)
            .iter()
            .filter_map(|&p| dist[p])
            .min()
            .map(|d| d + 1);
        dist[i] = match (dist[i], via_parent) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        };
    }
    dist
}
