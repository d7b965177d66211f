//! Synthetic fuzzy interpretations for taxonomies ("α-embeddings").
//!
//! Every domain element `x_i` anchors one leaf drawn uniformly at random.
//! The anchor gets degree 1, any other leaf `C'` gets `α^d` where `d` is the
//! leaf distance to the anchor through their closest common ancestor, and
//! internal concepts take the t-conorm of their direct children. Because a
//! t-conorm is never below its arguments, every parent's degree dominates its
//! children's, so the taxonomy's subsumptions hold in the fuzzy sense.
//!
//! Column `i` depends only on `(graph, alpha, family, seed, i)`: the anchor is
//! drawn from ChaCha stream `i` of the seed. Columns can therefore be
//! computed in any order or in parallel with bit-identical results.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::embedding::{EmbeddingMatrix, Provenance, Source};
use crate::fuzzy::{FuzzyConfig, OperatorFamily};
use crate::ontology::{distances_from, ConceptId, OntologyGraph};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlphaError {
    #[error("alpha must lie strictly between 0 and 1, got {0}")]
    InvalidAlpha(f64),
    #[error("embedding dimension must be at least 1")]
    ZeroDimension,
    #[error("ontology has no leaves")]
    NoLeaves,
    #[error("unknown concept {0}")]
    UnknownConcept(ConceptId),
    #[error("concept {0} is not a leaf")]
    NotALeaf(ConceptId),
    #[error("no degree given for leaf {0}")]
    MissingLeaf(ConceptId),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaParams {
    alpha: f64,
    dim: usize,
    seed: u64,
}

impl AlphaParams {
    pub fn new(alpha: f64, dim: usize, seed: u64) -> Result<Self, AlphaError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(AlphaError::InvalidAlpha(alpha));
        }
        if dim == 0 {
            return Err(AlphaError::ZeroDimension);
        }
        Ok(Self { alpha, dim, seed })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    Serial,
    #[default]
    Parallel,
}

/// Position (in the graph's ascending leaf list) of the anchor for `column`.
pub fn anchor_for_column(seed: u64, column: u64, leaf_count: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(column);
    rng.gen_range(0..leaf_count)
}

/// Leaf degrees for a single anchor: 1 at the anchor, `alpha^d` elsewhere,
/// 0 for leaves sharing no ancestor with it.
pub fn anchor_memberships(
    graph: &OntologyGraph,
    anchor_leaf: &str,
    alpha: f64,
) -> Result<BTreeMap<ConceptId, f64>, AlphaError> {
    let anchor = graph
        .index_of(anchor_leaf)
        .ok_or_else(|| AlphaError::UnknownConcept(anchor_leaf.into()))?;
    if !graph.child_indices(anchor).is_empty() {
        return Err(AlphaError::NotALeaf(anchor_leaf.into()));
    }
    let powers = power_table(alpha, graph.len());
    let dist = distances_from(graph, anchor);
    Ok(graph
        .leaf_indices()
        .iter()
        .map(|&l| (graph.id_at(l).clone(), dist[l].map_or(0.0, |d| powers[d])))
        .collect())
}

/// Fills internal concepts bottom-up with the t-conorm of their children,
/// children folded in ascending id order.
pub fn lift_internal(
    graph: &OntologyGraph,
    leaf_degrees: &BTreeMap<ConceptId, f64>,
    config: &FuzzyConfig,
) -> Result<BTreeMap<ConceptId, f64>, AlphaError> {
    let mut column = vec![0.0; graph.len()];
    for &l in graph.leaf_indices() {
        let id = graph.id_at(l);
        column[l] = *leaf_degrees
            .get(id)
            .ok_or_else(|| AlphaError::MissingLeaf(id.clone()))?;
    }
    lift_column(graph, &mut column, config.family);
    Ok(column
        .into_iter()
        .enumerate()
        .map(|(i, v)| (graph.id_at(i).clone(), v))
        .collect())
}

fn lift_column(graph: &OntologyGraph, column: &mut [f64], family: OperatorFamily) {
    for &i in graph.topological_indices().iter().rev() {
        if let Some((&first, rest)) = graph.child_indices(i).split_first() {
            column[i] = rest
                .iter()
                .fold(column[first], |acc, &c| family.tconorm(acc, column[c]));
        }
    }
}

fn power_table(alpha: f64, max_distance: usize) -> Vec<f64> {
    // leaf distances never exceed twice the node count
    (0..=2 * max_distance)
        .map(|d| alpha.powi(i32::try_from(d).unwrap_or(i32::MAX)))
        .collect()
}

struct ColumnKernel<'g> {
    graph: &'g OntologyGraph,
    powers: Vec<f64>,
    family: OperatorFamily,
    seed: u64,
}

impl ColumnKernel<'_> {
    /// Degrees of every concept (dense order) for domain element `column`.
    fn column(&self, column: u64) -> Vec<f64> {
        let leaves = self.graph.leaf_indices();
        let anchor = leaves[anchor_for_column(self.seed, column, leaves.len())];
        let dist = distances_from(self.graph, anchor);
        let mut values = vec![0.0; self.graph.len()];
        for &l in leaves {
            values[l] = dist[l].map_or(0.0, |d| self.powers[d]);
        }
        lift_column(self.graph, &mut values, self.family);
        values
    }
}

fn kernel<'g>(
    graph: &'g OntologyGraph,
    params: &AlphaParams,
    config: &FuzzyConfig,
) -> Result<ColumnKernel<'g>, AlphaError> {
    if graph.leaf_indices().is_empty() {
        return Err(AlphaError::NoLeaves);
    }
    Ok(ColumnKernel {
        graph,
        powers: power_table(params.alpha, graph.len()),
        family: config.family,
        seed: params.seed,
    })
}

/// One column of the embedding: every concept's degree for domain element
/// `column`, keyed by dense concept index.
pub fn generate_column(
    graph: &OntologyGraph,
    params: &AlphaParams,
    config: &FuzzyConfig,
    column: u64,
) -> Result<Vec<f64>, AlphaError> {
    Ok(kernel(graph, params, config)?.column(column))
}

pub fn generate(
    graph: &OntologyGraph,
    params: &AlphaParams,
    config: &FuzzyConfig,
) -> Result<EmbeddingMatrix, AlphaError> {
    generate_with(graph, params, config, Schedule::default())
}

pub fn generate_with(
    graph: &OntologyGraph,
    params: &AlphaParams,
    config: &FuzzyConfig,
    schedule: Schedule,
) -> Result<EmbeddingMatrix, AlphaError> {
    const BLOCK: usize = 64;

    let kernel = kernel(graph, params, config)?;
    let n = graph.len();
    let dim = params.dim;
    let mut data = vec![0.0; n * dim];

    for start in (0..dim).step_by(BLOCK) {
        let end = (start + BLOCK).min(dim);
        let columns: Vec<Vec<f64>> = match schedule {
            Schedule::Serial => (start..end).map(|c| kernel.column(c as u64)).collect(),
            Schedule::Parallel => (start..end).into_par_iter().map(|c| kernel.column(c as u64)).collect(),
        };
        for (offset, column) in columns.iter().enumerate() {
            let c = start + offset;
            for (row, &v) in column.iter().enumerate() {
                data[row * dim + c] = v;
            }
        }
    }

    let ids = graph.concepts().map(|r| r.id.clone()).collect();
    Ok(EmbeddingMatrix::from_parts(
        dim,
        ids,
        data,
        Provenance {
            source: Source::Generated,
            alpha: Some(params.alpha),
            seed: Some(params.seed),
            family: config.family,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::{fixtures, ConceptDraft};

    fn degrees(pairs: &[(&str, f64)]) -> BTreeMap<ConceptId, f64> {
        pairs.iter().map(|(k, v)| (ConceptId::from(*k), *v)).collect()
    }

    #[test]
    fn anchor_memberships_on_fixture() {
        let g = fixtures::tree();
        let m = anchor_memberships(&g, "L1", 0.5).unwrap();
        assert_eq!(m, degrees(&[("L1", 1.0), ("L2", 0.25), ("L3", 0.0625)]));
        assert_eq!(anchor_memberships(&g, "L3", 0.9).unwrap()[&ConceptId::from("L3")], 1.0);
        assert_eq!(anchor_memberships(&g, "A", 0.5), Err(AlphaError::NotALeaf("A".into())));
    }

    #[test]
    fn disconnected_leaf_gets_zero() {
        let g = OntologyGraph::from_drafts(
            vec![
                ConceptDraft::new("R1", "r1"),
                ConceptDraft::new("R2", "r2"),
                ConceptDraft::new("X", "x").with_parents(["R1"]),
                ConceptDraft::new("Y", "y").with_parents(["R2"]),
            ],
            Default::default(),
        )
        .unwrap();
        let m = anchor_memberships(&g, "X", 0.5).unwrap();
        assert_eq!(m[&ConceptId::from("Y")], 0.0);
    }

    #[test]
    fn lift_on_fixture() {
        let g = fixtures::tree();
        let leaves = degrees(&[("L1", 1.0), ("L2", 0.25), ("L3", 0.0625)]);
        for family in [OperatorFamily::Product, OperatorFamily::Goedel] {
            let lifted = lift_internal(&g, &leaves, &FuzzyConfig::new(family)).unwrap();
            assert_eq!(lifted[&ConceptId::from("A")], 1.0);
            assert_eq!(lifted[&ConceptId::from("B")], 0.0625);
            assert_eq!(lifted[&ConceptId::from("R")], 1.0);
        }
        let zeros = degrees(&[("L1", 0.0), ("L2", 0.0), ("L3", 0.0)]);
        let lifted = lift_internal(&g, &zeros, &FuzzyConfig::default()).unwrap();
        assert!(lifted.values().all(|&v| v == 0.0));

        let partial = degrees(&[("L1", 1.0)]);
        assert_eq!(
            lift_internal(&g, &partial, &FuzzyConfig::default()),
            Err(AlphaError::MissingLeaf("L2".into()))
        );
    }

    #[test]
    fn single_concept_is_all_ones() {
        let g = OntologyGraph::from_drafts(vec![ConceptDraft::new("only", "only")], Default::default()).unwrap();
        let m = generate(&g, &AlphaParams::new(0.3, 7, 1).unwrap(), &FuzzyConfig::default()).unwrap();
        assert_eq!(m.vector("only").unwrap(), &[1.0; 7]);
    }

    #[test]
    fn empty_graph_has_no_leaves() {
        let g = OntologyGraph::from_drafts(Vec::new(), Default::default()).unwrap();
        let err = generate(&g, &AlphaParams::new(0.3, 1, 1).unwrap(), &FuzzyConfig::default()).unwrap_err();
        assert_eq!(err, AlphaError::NoLeaves);
    }

    #[test]
    fn params_validation() {
        assert!(AlphaParams::new(0.0, 1, 0).is_err());
        assert!(AlphaParams::new(1.0, 1, 0).is_err());
        assert!(AlphaParams::new(f64::NAN, 1, 0).is_err());
        assert_eq!(AlphaParams::new(0.5, 0, 0), Err(AlphaError::ZeroDimension));
    }

    #[test]
    fn anchors_are_reproducible_and_spread() {
        let a: Vec<_> = (0..50).map(|c| anchor_for_column(9, c, 10)).collect();
        let b: Vec<_> = (0..50).map(|c| anchor_for_column(9, c, 10)).collect();
        assert_eq!(a, b);
        assert!(a.iter().any(|&x| x != a[0]));
        assert!(a.iter().all(|&x| x < 10));
    }
}
