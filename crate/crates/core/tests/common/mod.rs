#![allow(dead_code)]

use std::collections::BTreeSet;

use fuzzyvis_core::ontology::{ConceptDraft, OntologyGraph};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Zero-padded so that id order equals creation order.
pub fn id(i: usize) -> String {
    format!("C{i:04}")
}

pub fn graph_from_parents(parents: &[Vec<usize>]) -> OntologyGraph {
    let drafts = parents
        .iter()
        .enumerate()
        .map(|(i, ps)| ConceptDraft::new(id(i), format!("concept {i}")).with_parents(ps.iter().map(|&p| id(p))))
        .collect();
    OntologyGraph::from_drafts(drafts, BTreeSet::new()).expect("generated graph is valid")
}

/// Parent lists of a random rooted tree with `n` nodes.
pub fn tree_parents(rng: &mut impl Rng, n: usize) -> Vec<Vec<usize>> {
    (0..n)
        .map(|i| if i == 0 { Vec::new() } else { vec![rng.gen_range(0..i)] })
        .collect()
}

/// Parent lists of a random DAG: up to three parents drawn from earlier
/// nodes, and occasionally an extra root (so components may be disconnected).
pub fn dag_parents(rng: &mut impl Rng, n: usize) -> Vec<Vec<usize>> {
    (0..n)
        .map(|i| {
            if i == 0 || rng.gen_bool(0.03) {
                return Vec::new();
            }
            let k = rng.gen_range(1..=3.min(i));
            let mut ps: Vec<usize> = sample(rng, i, k).into_vec();
            ps.sort_unstable();
            ps
        })
        .collect()
}

pub fn random_tree(rng: &mut impl Rng, n: usize) -> OntologyGraph {
    graph_from_parents(&tree_parents(rng, n))
}

pub fn random_dag(rng: &mut impl Rng, n: usize) -> OntologyGraph {
    graph_from_parents(&dag_parents(rng, n))
}

pub fn random_vector(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.gen::<f64>()).collect()
}
